#include "bldgsim/sim/plots.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <sstream>

#include "bldgsim/core/clock.hpp"
#include "bldgsim/core/csv.hpp"
#include "bldgsim/core/error.hpp"

namespace bldgsim::sim {

namespace {

struct Series {
    std::string label;
    std::vector<double> y;
};

struct Columns {
    std::vector<double> hours;
    std::map<std::string, std::vector<double>> data;   // by column name
};

struct ColumnName {
    std::vector<std::string> parts;   // path segments, variable, kind
    const std::string& variable() const { return parts[parts.size() - 2]; }
    const std::string& kind() const { return parts.back(); }
    std::string path() const {
        std::string s;
        for (std::size_t i = 0; i + 2 < parts.size(); ++i) s += (i ? "/" : "") + parts[i];
        return s;
    }
    std::size_t depth() const { return parts.size() - 2; }
};

ColumnName split_column(const std::string& name) { return {core::split(name, '.')}; }

Columns load(const std::string& file) {
    const auto t = core::read_csv_file(file);
    const auto ts = t.require_column("timestamp");
    Columns c;
    std::optional<core::TimePoint> t0;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto tp = core::parse_timestamp(t.rows[r][ts]);
        if (!t0) t0 = tp;
        c.hours.push_back(std::chrono::duration<double>(tp - *t0).count() / 3600.0);
    }
    for (std::size_t col = 0; col < t.header.size(); ++col) {
        if (t.header[col] == "step" || t.header[col] == "timestamp") continue;
        std::vector<double> v;
        v.reserve(t.rows.size());
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            v.push_back(col < t.rows[r].size() && !t.rows[r][col].empty() ? t.number(r, col)
                                                                           : std::numeric_limits<double>::quiet_NaN());
        }
        c.data.emplace(t.header[col], std::move(v));
    }
    return c;
}

std::vector<std::string> matching(const Columns& c, const std::function<bool(const ColumnName&)>& pred) {
    std::vector<std::string> out;
    for (const auto& [name, v] : c.data) {
        const auto n = split_column(name);
        if (n.parts.size() >= 3 && pred(n)) out.push_back(name);
    }
    return out;
}

std::string xml_escape(const std::string& s) {
    std::string o;
    for (char ch : s) {
        switch (ch) {
        case '&': o += "&amp;"; break;
        case '<': o += "&lt;"; break;
        case '>': o += "&gt;"; break;
        case '"': o += "&quot;"; break;
        default: o += ch;
        }
    }
    return o;
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string tick_label(double v) {
    char buf[32];
    if (std::abs(v) >= 1000.0 || v == std::floor(v)) {
        std::snprintf(buf, sizeof buf, "%.0f", v);
    } else {
        std::snprintf(buf, sizeof buf, "%.3g", v);
    }
    return buf;
}

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                          "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

enum class Style { Lines, Steps, Stacked };

/// Minimal line/step/stacked-area chart.
std::string chart(const std::string& title, const std::string& ylabel, const std::vector<double>& x,
                  const std::vector<Series>& series, Style style) {
    const double W = 900, H = 420, left = 70, right = 220, top = 40, bottom = 50;
    const double pw = W - left - right, ph = H - top - bottom;

    std::vector<std::vector<double>> ys;
    if (style == Style::Stacked) {
        std::vector<double> acc(x.size(), 0.0);
        for (const auto& s : series) {
            for (std::size_t i = 0; i < x.size(); ++i) acc[i] += std::isnan(s.y[i]) ? 0.0 : std::max(0.0, s.y[i]);
            ys.push_back(acc);
        }
    } else {
        for (const auto& s : series) ys.push_back(s.y);
    }
    double ymin = std::numeric_limits<double>::infinity(), ymax = -ymin;
    for (const auto& y : ys) {
        for (double v : y) {
            if (std::isnan(v)) continue;
            ymin = std::min(ymin, v);
            ymax = std::max(ymax, v);
        }
    }
    if (style == Style::Stacked) ymin = std::min(ymin, 0.0);
    if (!std::isfinite(ymin)) ymin = 0.0, ymax = 1.0;
    if (ymax - ymin < 1e-9) ymin -= 0.5, ymax += 0.5;
    const double pad = 0.05 * (ymax - ymin);
    ymin -= style == Style::Stacked && ymin == 0.0 ? 0.0 : pad;
    ymax += pad;
    const double xmin = x.empty() ? 0.0 : x.front();
    double xmax = x.empty() ? 1.0 : x.back();
    if (xmax <= xmin) xmax = xmin + 1.0;

    auto px = [&](double v) { return left + (v - xmin) / (xmax - xmin) * pw; };
    auto py = [&](double v) { return top + (ymax - v) / (ymax - ymin) * ph; };

    std::ostringstream o;
    o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
      << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << left << "\" y=\"24\" font-size=\"15\">" << xml_escape(title) << "</text>\n";
    for (int i = 0; i <= 5; ++i) {
        const double v = ymin + (ymax - ymin) * i / 5.0;
        o << "<line x1=\"" << left << "\" x2=\"" << left + pw << "\" y1=\"" << num(py(v)) << "\" y2=\"" << num(py(v))
          << "\" stroke=\"#e5e5e5\"/>\n"
          << "<text x=\"" << left - 6 << "\" y=\"" << num(py(v) + 4) << "\" text-anchor=\"end\">" << tick_label(v)
          << "</text>\n";
        const double xv = xmin + (xmax - xmin) * i / 5.0;
        o << "<text x=\"" << num(px(xv)) << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">"
          << tick_label(xv) << "</text>\n";
    }
    o << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"#444\"/>\n"
      << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\">hours</text>\n"
      << "<text transform=\"translate(16," << top + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
      << xml_escape(ylabel) << "</text>\n";

    for (std::size_t s = ys.size(); s-- > 0;) {
        const char* color = kPalette[s % 10];
        std::ostringstream pts;
        bool open = false;
        auto flush = [&] {
            if (!open) return;
            o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.6\" points=\"" << pts.str()
              << "\"/>\n";
            pts.str("");
            open = false;
        };
        if (style == Style::Stacked) {
            std::ostringstream poly;
            for (std::size_t i = 0; i < x.size(); ++i) poly << num(px(x[i])) << ',' << num(py(ys[s][i])) << ' ';
            for (std::size_t i = x.size(); i-- > 0;) {
                const double base = s == 0 ? 0.0 : ys[s - 1][i];
                poly << num(px(x[i])) << ',' << num(py(base)) << ' ';
            }
            o << "<polygon fill=\"" << color << "\" fill-opacity=\"0.75\" stroke=\"none\" points=\"" << poly.str()
              << "\"/>\n";
            continue;
        }
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double v = ys[s][i];
            if (std::isnan(v)) {
                flush();
                continue;
            }
            if (style == Style::Steps && open && i > 0 && !std::isnan(ys[s][i - 1])) {
                pts << num(px(x[i])) << ',' << num(py(ys[s][i - 1])) << ' ';
            }
            pts << num(px(x[i])) << ',' << num(py(v)) << ' ';
            open = true;
        }
        flush();
    }
    for (std::size_t s = 0; s < series.size(); ++s) {
        const double y = top + 10 + 18.0 * static_cast<double>(s);
        o << "<rect x=\"" << left + pw + 14 << "\" y=\"" << y - 9 << "\" width=\"12\" height=\"12\" fill=\""
          << kPalette[s % 10] << "\"/>\n"
          << "<text x=\"" << left + pw + 32 << "\" y=\"" << y + 1 << "\">" << xml_escape(series[s].label)
          << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

std::string short_label(const std::string& column) {
    const auto n = split_column(column);
    std::string s;
    for (std::size_t i = 1; i + 2 < n.parts.size(); ++i) {
        if (i == 1 && n.parts.size() > 4) continue;   // drop the domain when deeper segments exist
        s += (s.empty() ? "" : "/") + n.parts[i];
    }
    return (s.empty() ? n.parts[0] : s) + " " + n.variable();
}

struct Plot {
    std::string title, ylabel;
    std::vector<Series> series;
    Style style = Style::Lines;
};

using Builder = std::function<std::optional<Plot>(const Columns&, std::string& why)>;

std::optional<Plot> fan_plot(const Columns& c, std::string& why) {
    const auto refs = matching(c, [](const ColumnName& n) {
        return n.kind() == "action" && (n.variable() == "v_setpoint" || n.variable() == "v_reference");
    });
    const auto flows = matching(c, [](const ColumnName& n) { return n.kind() == "observation" && n.variable() == "flow"; });
    if (refs.empty() || flows.empty()) {
        why = "no v_setpoint action and fan flow columns";
        return std::nullopt;
    }
    Plot p{"Fan control action vs. realized flow", "kg/s", {}, Style::Steps};
    for (const auto& r : refs) p.series.push_back({short_label(r), c.data.at(r)});
    for (const auto& f : flows) p.series.push_back({short_label(f), c.data.at(f)});
    return p;
}

std::optional<Plot> zone_plot(const Columns& c, std::string& why) {
    const auto zones = matching(c, [](const ColumnName& n) { return n.kind() == "state" && n.variable() == "t_zone"; });
    if (zones.empty()) {
        why = "no t_zone columns";
        return std::nullopt;
    }
    Plot p{"Zone temperature and setpoints", "degC", {}, Style::Lines};
    for (const auto& z : zones) p.series.push_back({short_label(z), c.data.at(z)});
    for (const auto& s : matching(c, [](const ColumnName& n) { return n.kind() == "action" && n.variable() == "setpoint"; })) {
        p.series.push_back({short_label(s), c.data.at(s)});
    }
    for (const auto& s : matching(c, [](const ColumnName& n) { return n.kind() == "disturbance" && n.variable() == "t_out"; })) {
        p.series.push_back({short_label(s), c.data.at(s)});
    }
    return p;
}

std::optional<Plot> soc_plot(const Columns& c, std::string& why) {
    const auto socs = matching(c, [](const ColumnName& n) {
        return n.kind() == "state" && (n.variable() == "soc_battery" || n.variable().rfind("soc_ev_", 0) == 0);
    });
    if (socs.empty()) {
        why = "no battery or EV state-of-charge columns";
        return std::nullopt;
    }
    Plot p{"State of charge", "fraction", {}, Style::Lines};
    for (const auto& s : socs) p.series.push_back({short_label(s), c.data.at(s)});
    return p;
}

std::optional<Plot> load_plot(const Columns& c, std::string& why) {
    const auto parts = matching(c, [](const ColumnName& n) {
        if (n.kind() != "observation" || n.depth() < 4) return false;
        const auto& v = n.variable();
        const auto& domain = n.parts[1];
        return v == "p_base" || v == "p_plug" || v == "p_lighting" || v == "p_ev" ||
               (v == "power" && (domain == "thermal" || domain == "water"));
    });
    if (parts.empty()) {
        why = "no load breakdown columns";
        return std::nullopt;
    }
    Plot p{"Electrical load by end use", "W", {}, Style::Stacked};
    for (const auto& s : parts) p.series.push_back({short_label(s), c.data.at(s)});
    return p;
}

std::optional<Plot> energy_plot(const Columns& c, std::string& why) {
    const auto buildings = matching(c, [](const ColumnName& n) {
        return n.kind() == "observation" && n.variable() == "power" && n.depth() == 3 && n.parts[1] == "electrical";
    });
    if (buildings.empty() || c.hours.size() < 2) {
        why = buildings.empty() ? "no building power aggregate columns" : "fewer than two rows";
        return std::nullopt;
    }
    const double dt_h = c.hours[1] - c.hours[0];
    Plot p{"Cumulative energy per building", "kWh", {}, Style::Lines};
    for (const auto& b : buildings) {
        std::vector<double> cum;
        double acc = 0.0;
        for (double v : c.data.at(b)) {
            if (!std::isnan(v)) acc += v * dt_h / 1000.0;
            cum.push_back(acc);
        }
        p.series.push_back({split_column(b).parts[2], cum});
    }
    return p;
}

const std::vector<std::pair<std::string, Builder>>& builders() {
    static const std::vector<std::pair<std::string, Builder>> b = {{"fan_tracking", fan_plot},
                                                                   {"zone_temperature", zone_plot},
                                                                   {"soc", soc_plot},
                                                                   {"load_stack", load_plot},
                                                                   {"cumulative_energy", energy_plot}};
    return b;
}

} // namespace

const std::vector<std::string>& plot_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> n;
        for (const auto& [name, b] : builders()) n.push_back(name);
        return n;
    }();
    return names;
}

std::vector<std::string> emit_plots(const std::string& run_dir, const std::vector<std::string>& requested,
                                    std::vector<std::string>* notices) {
    const auto dir = std::filesystem::path(run_dir);
    const auto file = dir / "timeseries.csv";
    if (!std::filesystem::exists(file)) throw ParseError("no timeseries.csv in " + run_dir);
    for (const auto& r : requested) {
        if (std::find(plot_names().begin(), plot_names().end(), r) == plot_names().end()) {
            throw InvalidArgument("unknown plot '" + r + "'");
        }
    }
    const auto cols = load(file.string());
    std::vector<std::string> written;
    for (const auto& [name, build] : builders()) {
        const bool explicit_request = std::find(requested.begin(), requested.end(), name) != requested.end();
        if (!requested.empty() && !explicit_request) continue;
        std::string why;
        const auto plot = build(cols, why);
        if (!plot) {
            if (explicit_request) throw ParseError("plot " + name + " needs missing columns: " + why);
            if (notices) notices->push_back("plot " + name + " skipped: " + why);
            continue;
        }
        const auto out = dir / (name + ".svg");
        std::ofstream f(out, std::ios::binary);
        if (!f) throw RuntimeError("cannot write " + out.string());
        f << chart(plot->title, plot->ylabel, cols.hours, plot->series, plot->style);
        written.push_back(out.string());
    }
    return written;
}

} // namespace bldgsim::sim
