#include "bldgsim/sim/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "bldgsim/core/csv.hpp"
#include "bldgsim/der/ev.hpp"
#include "bldgsim/disturbance/price.hpp"
#include "bldgsim/sim/modules.hpp"
#include "bldgsim/thermal/zone_model.hpp"

namespace bldgsim::sim {

namespace {

std::string join_problems(const std::vector<std::string>& problems) {
    std::string s = "scenario invalid:";
    for (const auto& p : problems) s += "\n  " + p;
    return s;
}

bool parse_double(std::string_view text, double& out) {
    text = core::trim(text);
    if (text.empty()) return false;
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, out);
    return ec == std::errc() && ptr == end && std::isfinite(out);
}

/// Typed access to one section; remembers which keys were used so that
/// leftovers can be reported as unknown.
class Keys {
public:
    Keys(const Section& s, std::string source, std::vector<std::string>& problems)
        : s_(s), source_(std::move(source)), problems_(problems) {}

    std::string where(std::size_t line) const { return source_ + ":" + std::to_string(line); }
    std::string where() const { return where(s_.line); }
    std::string where(const std::string& key) const {
        auto it = s_.entries.find(key);
        return it == s_.entries.end() ? where() : where(it->second.line);
    }
    void problem(const std::string& key, const std::string& msg) { problems_.push_back(where(key) + ": " + msg); }
    void problem(const std::string& msg) { problems_.push_back(where() + ": " + msg); }

    bool has(const std::string& key) const { return s_.entries.count(key) != 0; }

    std::optional<std::string> str(const std::string& key) {
        auto it = s_.entries.find(key);
        if (it == s_.entries.end()) return std::nullopt;
        used_.insert(key);
        return it->second.value;
    }
    std::string str(const std::string& key, const std::string& def) { return str(key).value_or(def); }

    std::string required(const std::string& key) {
        auto v = str(key);
        if (!v) {
            problem("missing required key '" + key + "'");
            return {};
        }
        return *v;
    }

    double num(const std::string& key, double def) {
        auto v = str(key);
        if (!v) return def;
        double out = 0.0;
        if (!parse_double(*v, out)) {
            problem(key, "'" + key + "' must be a finite number, got '" + *v + "'");
            return def;
        }
        return out;
    }

    std::int64_t integer(const std::string& key, std::int64_t def) {
        auto v = str(key);
        if (!v) return def;
        const auto t = core::trim(*v);
        std::int64_t out = 0;
        auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
        if (ec != std::errc() || ptr != t.data() + t.size()) {
            problem(key, "'" + key + "' must be an integer, got '" + *v + "'");
            return def;
        }
        return out;
    }

    bool flag(const std::string& key, bool def) {
        auto v = str(key);
        if (!v) return def;
        if (*v == "true" || *v == "yes" || *v == "1") return true;
        if (*v == "false" || *v == "no" || *v == "0") return false;
        problem(key, "'" + key + "' must be true or false, got '" + *v + "'");
        return def;
    }

    std::vector<double> numbers(const std::string& key, std::vector<double> def) {
        auto v = str(key);
        if (!v) return def;
        std::vector<double> out;
        for (const auto& part : core::split(*v, ',')) {
            double x = 0.0;
            if (!parse_double(part, x)) {
                problem(key, "'" + key + "' must be a comma separated list of numbers");
                return def;
            }
            out.push_back(x);
        }
        return out;
    }

    std::optional<core::HierPath> path(const std::string& key) {
        auto v = str(key);
        if (!v) return std::nullopt;
        try {
            return core::HierPath::parse(core::trim(*v));
        } catch (const Error& e) {
            problem(key, "'" + key + "': " + e.what());
            return std::nullopt;
        }
    }

    std::vector<core::HierPath> paths(const std::string& key) {
        std::vector<core::HierPath> out;
        auto v = str(key);
        if (!v) return out;
        for (const auto& part : core::split(*v, ',')) {
            try {
                out.push_back(core::HierPath::parse(core::trim(part)));
            } catch (const Error& e) {
                problem(key, "'" + key + "': " + e.what());
            }
        }
        return out;
    }

    /// Keys "prefix.<name>" (name without further dots), marked as used.
    std::map<std::string, Entry> group(const std::string& prefix) {
        std::map<std::string, Entry> out;
        for (const auto& [k, e] : s_.entries) {
            if (k.rfind(prefix + ".", 0) == 0) {
                const std::string name = k.substr(prefix.size() + 1);
                if (name.empty() || name.find('.') != std::string::npos) continue;
                out.emplace(name, e);
                used_.insert(k);
            }
        }
        return out;
    }

    /// Distinct names of keys "prefix.<name>.<field>".
    std::set<std::string> subgroups(const std::string& prefix) const {
        std::set<std::string> out;
        for (const auto& [k, e] : s_.entries) {
            if (k.rfind(prefix + ".", 0) != 0) continue;
            const std::string rest = k.substr(prefix.size() + 1);
            const auto dot = rest.find('.');
            if (dot != std::string::npos && dot > 0) out.insert(rest.substr(0, dot));
        }
        return out;
    }

    bool any_with_prefix(const std::string& prefix) const {
        for (const auto& [k, e] : s_.entries) {
            if (k.rfind(prefix + ".", 0) == 0) return true;
        }
        return false;
    }

    void finish(const std::string& what) {
        for (const auto& [k, e] : s_.entries) {
            if (!used_.count(k)) problems_.push_back(where(e.line) + ": unknown key '" + k + "' for " + what);
        }
    }

private:
    const Section& s_;
    std::string source_;
    std::vector<std::string>& problems_;
    std::set<std::string> used_;
};

std::string resolve_file(const std::string& base, const std::string& file) {
    std::filesystem::path p(file);
    if (p.is_absolute()) return p.string();
    return (std::filesystem::path(base) / p).lexically_normal().string();
}

std::vector<disturbance::OccupancyWindow> parse_windows(Keys& k, const std::string& key,
                                                        std::vector<disturbance::OccupancyWindow> def) {
    auto v = k.str(key);
    if (!v) return def;
    std::vector<disturbance::OccupancyWindow> out;
    if (core::trim(*v) == "none") return out;
    for (const auto& part : core::split(*v, ',')) {
        const auto dash = part.find('-');
        double a = 0.0, b = 0.0;
        if (dash == std::string::npos || !parse_double(part.substr(0, dash), a) ||
            !parse_double(part.substr(dash + 1), b)) {
            k.problem(key, "'" + key + "' must look like 0-8,17-24 (or none)");
            return def;
        }
        out.push_back({a, b});
    }
    return out;
}

int minutes_of(const std::string& hhmm) {
    const auto parts = core::split(core::trim(hhmm), ':');
    if (parts.size() != 2) throw InvalidArgument("expected HH:MM, got '" + hhmm + "'");
    double h = 0.0, m = 0.0;
    if (!parse_double(parts[0], h) || !parse_double(parts[1], m) || h < 0 || h > 23 || m < 0 || m > 59) {
        throw InvalidArgument("expected HH:MM, got '" + hhmm + "'");
    }
    return static_cast<int>(h) * 60 + static_cast<int>(m);
}

/// Daily stays "HH:MM-HH:MM" covering the run with one day of margin.
std::vector<der::EvStay> daily_stays(const std::string& spec, double trip_kwh, double required_soc,
                                     const SimulationConfig& sim) {
    const auto dash = spec.find('-');
    if (dash == std::string::npos) throw InvalidArgument("daily stay must look like 18:00-07:30");
    const int arrive = minutes_of(spec.substr(0, dash));
    const int leave = minutes_of(spec.substr(dash + 1));
    if (arrive == leave) throw InvalidArgument("daily stay needs distinct arrival and departure");
    const auto day0 = std::chrono::floor<std::chrono::days>(sim.start);
    const auto days = static_cast<int>(std::ceil(sim.duration_hours / 24.0)) + 2;
    std::vector<der::EvStay> out;
    for (int d = -1; d < days; ++d) {
        der::EvStay s;
        s.arrival = core::TimePoint(day0 + std::chrono::days(d)) + std::chrono::minutes(arrive);
        s.departure = core::TimePoint(day0 + std::chrono::days(leave > arrive ? d : d + 1)) + std::chrono::minutes(leave);
        s.trip_kwh = trip_kwh;
        s.required_soc = required_soc;
        out.push_back(s);
    }
    return out;
}

hvac::FanKind fan_kind(Keys& k, const std::string& key, hvac::FanKind def) {
    auto v = k.str(key);
    if (!v) return def;
    if (*v == "vfd") return hvac::FanKind::Vfd;
    if (*v == "staged") return hvac::FanKind::Staged;
    if (*v == "constant") return hvac::FanKind::Constant;
    k.problem(key, "'" + key + "' must be vfd, staged or constant");
    return def;
}

hvac::FanSpec fan_spec(Keys& k, const std::string& prefix, hvac::FanSpec f) {
    const std::string p = prefix.empty() ? "" : prefix + ".";
    f.kind = fan_kind(k, p + "kind", f.kind);
    f.rated_flow = k.num(p + "rated_flow", f.rated_flow);
    f.rated_power = k.num(p + "rated_power", f.rated_power);
    f.stages = k.numbers(p + "stages", f.stages);
    f.turndown = k.num(p + "turndown", f.turndown);
    return f;
}

struct Declared {
    std::string type;
    bool controller = false;
    const Section* section = nullptr;
};

} // namespace

ScenarioError::ScenarioError(std::vector<std::string> problems)
    : ParseError(join_problems(problems)), problems_(std::move(problems)) {}

std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::uint64_t mix_seed(std::uint64_t run_seed, std::uint64_t local) {
    std::uint64_t z = run_seed * 0x9E3779B97F4A7C15ull + local + 0x632BE59BD9B4E019ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

std::int64_t SimulationConfig::steps() const {
    return static_cast<std::int64_t>(std::llround(duration_hours * 3600.0 / static_cast<double>(dt)));
}

std::vector<Section> parse_sections(const std::string& text, const std::string& source) {
    std::vector<Section> out;
    std::vector<std::string> problems;
    std::istringstream in(text);
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();
        const auto hash = raw.find('#');
        const std::string_view body = core::trim(std::string_view(raw).substr(0, hash));
        if (body.empty()) continue;
        const std::string where = source + ":" + std::to_string(line);
        if (body.front() == '[') {
            if (body.back() != ']') {
                problems.push_back(where + ": section header must end with ']'");
                continue;
            }
            const auto inner = core::trim(body.substr(1, body.size() - 2));
            Section s;
            s.line = line;
            const auto sp = inner.find_first_of(" \t");
            s.name = std::string(inner.substr(0, sp));
            if (sp != std::string_view::npos) s.arg = std::string(core::trim(inner.substr(sp)));
            if (s.name.empty()) problems.push_back(where + ": empty section name");
            out.push_back(std::move(s));
            continue;
        }
        const auto eq = body.find('=');
        if (eq == std::string_view::npos) {
            problems.push_back(where + ": expected 'key = value'");
            continue;
        }
        if (out.empty()) {
            problems.push_back(where + ": key outside of any section");
            continue;
        }
        const std::string key(core::trim(body.substr(0, eq)));
        const std::string value(core::trim(body.substr(eq + 1)));
        if (key.empty()) {
            problems.push_back(where + ": empty key");
            continue;
        }
        auto& entries = out.back().entries;
        if (entries.count(key)) {
            problems.push_back(where + ": duplicate key '" + key + "' (first at line " +
                               std::to_string(entries.at(key).line) + ")");
            continue;
        }
        entries.emplace(key, Entry{value, line});
    }
    if (!problems.empty()) throw ScenarioError(problems);
    return out;
}

ScenarioConfig parse_scenario_text(const std::string& text, const std::string& source, const std::string& base_dir) {
    ScenarioConfig cfg;
    cfg.source = source;
    cfg.base_dir = base_dir;
    cfg.text = text;
    const auto sections = parse_sections(text, source);
    std::vector<std::string> problems;
    bool have_sim = false, have_output = false;

    for (const auto& s : sections) {
        Keys k(s, source, problems);
        if (s.name == "simulation") {
            if (have_sim) k.problem("duplicate [simulation] section");
            have_sim = true;
            auto& sim = cfg.simulation;
            sim.name = k.str("name", sim.name);
            sim.description = k.str("description", sim.description);
            if (auto v = k.str("start")) {
                try {
                    sim.start = core::parse_timestamp(*v);
                } catch (const Error& e) {
                    k.problem("start", e.what());
                }
            }
            sim.duration_hours = k.num("duration_hours", sim.duration_hours);
            sim.dt = k.integer("dt", sim.dt);
            sim.seed = static_cast<std::uint64_t>(k.integer("seed", static_cast<std::int64_t>(sim.seed)));
            sim.cluster = k.str("cluster", sim.cluster);
            if (sim.dt <= 0 || 3600 % sim.dt != 0) {
                k.problem("dt", "dt = " + std::to_string(sim.dt) + " s must be positive and divide 3600");
            } else if (!(sim.duration_hours >= 0.0)) {
                k.problem("duration_hours", "duration_hours must be >= 0");
            } else if (std::abs(sim.duration_hours * 3600.0 / static_cast<double>(sim.dt) -
                                static_cast<double>(sim.steps())) > 1e-9) {
                k.problem("duration_hours", "duration must be a whole number of steps");
            }
            try {
                core::HierPath(sim.cluster);
            } catch (const Error& e) {
                k.problem("cluster", e.what());
            }
            if (!s.arg.empty()) k.problem("[simulation] takes no argument");
            k.finish("[simulation]");
        } else if (s.name == "output") {
            if (have_output) k.problem("duplicate [output] section");
            have_output = true;
            if (auto v = k.str("columns")) {
                if (core::trim(*v) != "all") {
                    for (const auto& c : core::split(*v, ',')) cfg.output.columns.emplace_back(core::trim(c));
                }
            }
            cfg.output.plots = k.flag("plots", cfg.output.plots);
            cfg.output.warmup_hours = k.num("warmup_hours", cfg.output.warmup_hours);
            k.finish("[output]");
        } else if (s.name == "generalization") {
            if (cfg.generalization) k.problem("duplicate [generalization] section");
            GeneralizationConfig g;
            g.zone = k.required("zone");
            g.train_days = static_cast<std::size_t>(k.integer("train_days", static_cast<std::int64_t>(g.train_days)));
            g.seed = static_cast<std::uint64_t>(k.integer("seed", static_cast<std::int64_t>(g.seed)));
            g.epochs = static_cast<int>(k.integer("epochs", g.epochs));
            g.horizon = static_cast<std::size_t>(k.integer("horizon", static_cast<std::int64_t>(g.horizon)));
            g.physics_head = k.str("physics_head", g.physics_head);
            g.hidden = static_cast<int>(k.integer("hidden", g.hidden));
            g.baseline_hidden = static_cast<int>(k.integer("baseline_hidden", g.baseline_hidden));
            g.policy = k.str("policy", g.policy);
            g.setpoint = k.num("setpoint", g.setpoint);
            g.half_band = k.num("half_band", g.half_band);
            g.q_cool = k.num("q_cool", g.q_cool);
            if (g.physics_head != "affine" && g.physics_head != "mlp") k.problem("physics_head", "physics_head must be affine or mlp");
            if (g.policy != "deadband" && g.policy != "proportional" && g.policy != "off") {
                k.problem("policy", "policy must be deadband, proportional or off");
            }
            if (g.horizon < 1 || g.train_days < 1) k.problem("horizon and train_days must be >= 1");
            k.finish("[generalization]");
            cfg.generalization = g;
        } else if (s.name == "module" || s.name == "controller" || s.name == "aggregate") {
            if (s.arg.empty()) {
                k.problem("[" + s.name + "] needs a path argument");
                continue;
            }
            (s.name == "module" ? cfg.modules : s.name == "controller" ? cfg.controllers : cfg.aggregates).push_back(s);
        } else {
            k.problem("unknown section [" + s.name + "]");
        }
    }
    if (!have_sim) problems.push_back(source + ": missing [simulation] section");
    if (!problems.empty()) throw ScenarioError(problems);
    return cfg;
}

ScenarioConfig parse_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open scenario " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    auto base = std::filesystem::path(path).parent_path().string();
    if (base.empty()) base = ".";
    return parse_scenario_text(ss.str(), path, base);
}

BuiltScenario build_scenario(const ScenarioConfig& cfg, std::optional<std::uint64_t> seed_override) {
    using core::HierPath;
    std::vector<std::string> problems;
    const auto& sim = cfg.simulation;
    const std::uint64_t run_seed = seed_override.value_or(sim.seed);

    BuiltScenario out;
    out.cluster = HierPath(sim.cluster);
    out.env = std::make_unique<core::Environment>(core::SimClock(sim.start, sim.dt));
    auto& env = *out.env;

    // Declared paths and types first, so references can be checked in any order.
    std::map<HierPath, Declared> declared;
    std::vector<std::pair<HierPath, const Section*>> mods, ctrls;
    auto declare = [&](const Section& s, bool controller) {
        Keys k(s, cfg.source, problems);
        HierPath p;
        try {
            p = HierPath::parse(s.arg);
        } catch (const Error& e) {
            k.problem(std::string("bad path: ") + e.what());
            return;
        }
        if (p.cluster() != sim.cluster) {
            k.problem("path " + p.str() + " is outside cluster '" + sim.cluster + "'");
            return;
        }
        auto t = s.entries.find("type");
        if (t == s.entries.end()) {
            k.problem("missing required key 'type'");
            return;
        }
        if (declared.count(p)) {
            k.problem("duplicate path " + p.str());
            return;
        }
        declared[p] = Declared{t->second.value, controller, &s};
        (controller ? ctrls : mods).emplace_back(p, &s);
    };
    for (const auto& s : cfg.modules) declare(s, false);
    for (const auto& s : cfg.controllers) declare(s, true);

    auto of_type = [&](const std::string& type, bool controller) {
        std::vector<HierPath> v;
        for (const auto& [p, d] : declared) {
            if (d.type == type && d.controller == controller) v.push_back(p);
        }
        return v;
    };

    // Reference to another declared module or controller of one of `types`.
    // Omitted references default to the unique candidate in the same system,
    // then in the cluster.
    const HierPath* current = nullptr;
    auto ref = [&](Keys& k, const std::string& key, std::initializer_list<const char*> types, bool controller,
                   bool required, std::optional<std::string> unique_default = std::nullopt) -> std::optional<HierPath> {
        auto p = k.path(key);
        if (!p && !k.has(key)) {
            if (unique_default) {
                auto all = of_type(*unique_default, controller);
                if (current && current->system()) {
                    std::vector<HierPath> local;
                    for (const auto& q : all) {
                        if (q.system() == current->system()) local.push_back(q);
                    }
                    if (local.size() == 1) return local.front();
                }
                if (all.size() == 1) return all.front();
                if (required) {
                    k.problem("'" + key + "' is required (" + std::to_string(all.size()) + " " + *unique_default +
                              " modules to choose from)");
                }
                return std::nullopt;
            }
            if (required) k.problem("missing required key '" + key + "'");
            return std::nullopt;
        }
        if (!p) return std::nullopt;
        auto it = declared.find(*p);
        std::string want;
        for (const char* t : types) want += (want.empty() ? "" : "|") + std::string(t);
        if (it == declared.end() || it->second.controller != controller ||
            std::none_of(types.begin(), types.end(), [&](const char* t) { return it->second.type == t; })) {
            k.problem(key, "dangling reference: '" + key + "' = " + p->str() + " is not a declared " +
                               (controller ? "controller" : "module") + " of type " + want);
            return std::nullopt;
        }
        return p;
    };

    auto guard = [&](Keys& k, const std::function<void()>& f) {
        try {
            f();
        } catch (const Error& e) {
            k.problem(e.what());
        }
    };

    // Pre-scan references that change other modules' inputs.
    std::map<HierPath, std::vector<HierPath>> zone_hvac;
    for (const auto& [p, s] : mods) {
        if (declared[p].type != "fcu") continue;
        auto z = s->entries.find("zone");
        if (z == s->entries.end()) continue;
        try {
            zone_hvac[HierPath::parse(z->second.value)].push_back(p);
        } catch (const Error&) {
        }
    }

    std::map<HierPath, std::vector<std::string>> activity_names;
    std::map<HierPath, thermal::RcZoneSpec> zone_rc;
    std::map<HierPath, std::shared_ptr<const thermal::ZoneModel>> zone_model;
    std::map<HierPath, HierPath> zone_occupancy;
    std::map<HierPath, double> fan_rated;
    std::map<HierPath, der::BatteryParams> der_battery;

    const std::vector<std::string> order = {"weather", "price", "occupancy", "zone", "fcu",
                                            "fan",     "loads", "tank",      "der"};
    for (const auto& type : order) {
        for (const auto& [path, sec] : mods) {
            if (declared[path].type != type) continue;
            const HierPath p = path;
            current = &p;
            Keys k(*sec, cfg.source, problems);
            k.str("type");
            const std::string what = "module type '" + type + "'";

            if (type == "weather") {
                WeatherSource src;
                const auto source = k.str("source", "synth");
                if (source == "synth") {
                    disturbance::SynthWeatherParams w;
                    w.t_mean = k.num("t_mean", w.t_mean);
                    w.t_amp = k.num("t_amp", w.t_amp);
                    w.ghi_peak = k.num("ghi_peak", w.ghi_peak);
                    w.sunrise = k.num("sunrise", w.sunrise);
                    w.sunset = k.num("sunset", w.sunset);
                    guard(k, [&] { w.validate(); });
                    src.synth = w;
                    out.synth_weather[p.str()] = w;
                } else if (source == "csv" || source == "epw") {
                    const auto file = resolve_file(cfg.base_dir, k.required("file"));
                    guard(k, [&] {
                        src.series = source == "csv" ? disturbance::load_weather_csv(file, sim.dt)
                                                     : disturbance::resample_hold_forward(
                                                           disturbance::load_epw_subset(file), sim.dt);
                    });
                } else {
                    k.problem("source", "weather source must be synth, csv or epw");
                }
                src.wet_bulb_depression = k.num("wet_bulb_depression", src.wet_bulb_depression);
                k.finish(what);
                guard(k, [&] { env.emplace<WeatherModule>(p, src); });
            } else if (type == "price") {
                disturbance::PriceSchedule ps;
                const auto kind = k.str("kind", "tou");
                if (kind == "tou") {
                    if (auto v = k.str("peak_hours")) {
                        ps.peak_hours.clear();
                        for (const auto& h : core::split(*v, ',')) {
                            double x = 0.0;
                            if (!parse_double(h, x) || x != std::floor(x) || x < 0 || x > 23) {
                                k.problem("peak_hours", "peak_hours must list whole hours 0..23");
                                break;
                            }
                            ps.peak_hours.insert(static_cast<int>(x));
                        }
                    }
                    ps.peak = k.num("peak", ps.peak);
                    ps.off_peak = k.num("off_peak", ps.off_peak);
                } else if (kind == "csv") {
                    const auto file = resolve_file(cfg.base_dir, k.required("file"));
                    guard(k, [&] { ps = disturbance::load_price_csv(file, sim.dt); });
                } else {
                    k.problem("kind", "price kind must be tou or csv");
                }
                k.finish(what);
                guard(k, [&] { env.emplace<PriceModule>(p, ps); });
                out.price = p;
            } else if (type == "occupancy") {
                OccupancySource src;
                const auto source = k.str("source", "synth");
                if (source == "synth") {
                    disturbance::SynthOccupancyParams o;
                    o.seed = mix_seed(run_seed, static_cast<std::uint64_t>(k.integer("seed", 0)));
                    o.weekday = parse_windows(k, "weekday", o.weekday);
                    o.weekend = parse_windows(k, "weekend", o.weekend);
                    o.occupants = k.num("occupants", o.occupants);
                    o.comfort_offset = k.num("comfort_offset", o.comfort_offset);
                    for (const auto& [name, e] : k.group("activity")) {
                        disturbance::ActivitySpec a;
                        a.name = name;
                        auto parts = core::split(e.value, ' ');
                        parts.erase(std::remove_if(parts.begin(), parts.end(),
                                                   [](const std::string& x) { return core::trim(x).empty(); }),
                                    parts.end());
                        if (parts.size() == 4 && core::trim(parts[3]) == "scheduled") {
                            a.scheduled_appliance = true;
                            parts.pop_back();
                        }
                        if (parts.size() != 3 || !parse_double(parts[0], a.probability) ||
                            !parse_double(parts[1], a.start_hour) || !parse_double(parts[2], a.end_hour)) {
                            problems.push_back(k.where(e.line) + ": activity." + name +
                                               " must be '<probability> <start_hour> <end_hour> [scheduled]'");
                            continue;
                        }
                        o.activities.push_back(a);
                    }
                    guard(k, [&] { o.validate(); });
                    src.synth = o;
                    out.synth_occupancy[p.str()] = o;
                } else if (source == "csv") {
                    const auto file = resolve_file(cfg.base_dir, k.required("file"));
                    guard(k, [&] { src.series = disturbance::load_occupancy_csv(file, sim.dt); });
                } else {
                    k.problem("source", "occupancy source must be synth or csv");
                }
                k.finish(what);
                guard(k, [&] { activity_names[p] = env.emplace<OccupancyModule>(p, src).activity_names(); });
            } else if (type == "zone") {
                ZoneSpec z;
                auto weather = ref(k, "weather", {"weather"}, false, true, "weather");
                auto occ = ref(k, "occupancy", {"occupancy"}, false, true, "occupancy");
                z.initial_t = k.num("initial_t", z.initial_t);
                const auto model = k.str("model", "rc");
                auto& rc = z.rc;
                rc.capacitance = k.num("capacitance", rc.capacitance);
                rc.resistance = k.num("resistance", rc.resistance);
                rc.solar_aperture = k.num("solar_aperture", rc.solar_aperture);
                rc.gain_per_occupant = k.num("gain_per_occupant", rc.gain_per_occupant);
                for (const auto& [name, e] : k.group("activity_gain")) {
                    double g = 0.0;
                    if (!parse_double(e.value, g)) {
                        problems.push_back(k.where(e.line) + ": activity_gain." + name + " must be a number");
                        continue;
                    }
                    rc.activity_gains[name] = g;
                }
                guard(k, [&] { rc.validate(); });
                if (model == "file") {
                    const auto file = resolve_file(cfg.base_dir, k.required("model_file"));
                    guard(k, [&] { z.model = thermal::load_zone_model(file); });
                } else if (model != "rc") {
                    k.problem("model", "zone model must be rc or file");
                }
                k.finish(what);
                if (weather && occ) {
                    zone_rc[p] = rc;
                    zone_occupancy[p] = *occ;
                    if (z.model) zone_model[p] = z.model;
                    guard(k, [&] {
                        env.emplace<ZoneModule>(p, z, *weather, *occ, activity_names[*occ], zone_hvac[p]);
                    });
                    ZoneInfo info;
                    info.path = p;
                    if (!z.model) info.rc = rc;
                    info.weather = *weather;
                    info.occupancy = *occ;
                    out.zones.push_back(info);
                }
            } else if (type == "fcu") {
                hvac::FcuAssembly a;
                auto zone = ref(k, "zone", {"zone"}, false, true);
                auto ctl = ref(k, "controller", {"deadband", "mpc"}, true, true);
                auto weather = ref(k, "weather", {"weather"}, false, true, "weather");
                a.fan = fan_spec(k, "fan", a.fan);
                a.pump = fan_spec(k, "pump", a.pump);
                a.coil.effectiveness = k.num("coil.effectiveness", a.coil.effectiveness);
                if (auto m = k.str("chiller.mode")) {
                    if (*m == "carnot") {
                        a.chiller.mode = hvac::ChillerMode::Carnot;
                    } else if (*m == "curve") {
                        a.chiller.mode = hvac::ChillerMode::Curve;
                    } else {
                        k.problem("chiller.mode", "chiller.mode must be carnot or curve");
                    }
                }
                a.chiller.eta_carnot = k.num("chiller.eta_carnot", a.chiller.eta_carnot);
                a.chiller.cop_ref = k.num("chiller.cop_ref", a.chiller.cop_ref);
                a.chiller.capacity = k.num("chiller.capacity", a.chiller.capacity);
                {
                    auto c = k.numbers("chiller.plr_coeffs", {a.chiller.plr_coeffs.begin(), a.chiller.plr_coeffs.end()});
                    if (c.size() == 3) {
                        std::copy(c.begin(), c.end(), a.chiller.plr_coeffs.begin());
                    } else {
                        k.problem("chiller.plr_coeffs", "chiller.plr_coeffs needs three values");
                    }
                }
                a.t_chw_supply = k.num("t_chw_supply", a.t_chw_supply);
                a.t_cond = k.num("t_cond", a.t_cond);
                if (k.any_with_prefix("tower")) {
                    hvac::CoolingTowerSpec t;
                    t.effectiveness = k.num("tower.effectiveness", t.effectiveness);
                    t.fan_power = k.num("tower.fan_power", t.fan_power);
                    a.tower = t;
                }
                a.t_cwr = k.num("t_cwr", a.t_cwr);
                a.max_iterations = static_cast<int>(k.integer("max_iterations", a.max_iterations));
                a.tolerance = k.num("tolerance", a.tolerance);
                k.finish(what);
                if (zone && ctl && weather) {
                    guard(k, [&] { env.emplace<FcuModule>(p, a, *ctl, *zone, *weather); });
                    fan_rated[*ctl] = a.fan.rated_flow;
                    out.fcus.push_back(p);
                }
            } else if (type == "fan") {
                hvac::FanSpec f = fan_spec(k, "", hvac::FanSpec{});
                auto sp = k.str("setpoint");
                std::optional<core::SignalKey> key;
                if (!sp) {
                    k.problem("missing required key 'setpoint'");
                } else {
                    auto parts = core::split(core::trim(*sp), ' ');
                    parts.erase(std::remove_if(parts.begin(), parts.end(), [](const std::string& x) { return x.empty(); }),
                                parts.end());
                    if (parts.size() != 2) {
                        k.problem("setpoint", "setpoint must be '<controller path> <variable>'");
                    } else {
                        try {
                            HierPath src = HierPath::parse(parts[0]);
                            if (!declared.count(src) || !declared[src].controller) {
                                k.problem("setpoint", "dangling reference: setpoint source " + src.str() +
                                                          " is not a declared controller");
                            } else {
                                key = core::SignalKey{src, parts[1], core::DataKind::Action};
                            }
                        } catch (const Error& e) {
                            k.problem("setpoint", e.what());
                        }
                    }
                }
                k.finish(what);
                if (key) guard(k, [&] { env.emplace<FanModule>(p, f, *key); });
            } else if (type == "loads") {
                building::ElectricalNetworkSpec e;
                auto occ = ref(k, "occupancy", {"occupancy"}, false, true, "occupancy");
                e.base_load = k.num("base_load", e.base_load);
                e.lighting = k.str("lighting", e.lighting);
                e.lighting_power = k.num("lighting_power", e.lighting_power);
                for (const auto& [name, en] : k.group("appliance")) {
                    double w = 0.0;
                    if (!parse_double(en.value, w)) {
                        problems.push_back(k.where(en.line) + ": appliance." + name + " must be a number");
                        continue;
                    }
                    e.appliances[name] = w;
                }
                k.finish(what);
                if (occ) {
                    const auto& names = activity_names[*occ];
                    for (const auto& [name, w] : e.appliances) {
                        if (std::find(names.begin(), names.end(), name) == names.end()) {
                            k.problem("appliance." + name, "appliance '" + name + "' has no activity in " + occ->str());
                        }
                    }
                    guard(k, [&] { env.emplace<LoadsModule>(p, e, *occ, names); });
                }
            } else if (type == "tank") {
                building::WaterTankSpec t;
                auto occ = ref(k, "occupancy", {"occupancy"}, false, true, "occupancy");
                auto ctl = ref(k, "controller", {"pid_tank"}, true, true);
                t.mass = k.num("mass", t.mass);
                t.ua = k.num("ua", t.ua);
                t.heater = k.num("heater", t.heater);
                t.t_inlet = k.num("t_inlet", t.t_inlet);
                t.t_ambient = k.num("t_ambient", t.t_ambient);
                t.t_max = k.num("t_max", t.t_max);
                const double initial = k.num("initial_t", 55.0);
                std::map<std::string, double> draws;
                for (const auto& [name, e] : k.group("draw")) {
                    double d = 0.0;
                    if (!parse_double(e.value, d)) {
                        problems.push_back(k.where(e.line) + ": draw." + name + " must be a number");
                        continue;
                    }
                    draws[name] = d;
                }
                k.finish(what);
                if (occ && ctl) guard(k, [&] { env.emplace<TankModule>(p, t, draws, initial, *occ, *ctl); });
            } else if (type == "der") {
                DerSpec d;
                auto weather = ref(k, "weather", {"weather"}, false, true, "weather");
                auto ctl = ref(k, "controller", {"tou_dispatch"}, true, false);
                std::vector<HierPath> loads;
                if (k.has("loads")) {
                    for (const auto& lp : k.paths("loads")) {
                        auto it = declared.find(lp);
                        if (it == declared.end() || it->second.controller ||
                            (it->second.type != "fcu" && it->second.type != "loads" && it->second.type != "tank")) {
                            k.problem("loads", "dangling reference: load " + lp.str() +
                                                   " is not a declared fcu, loads or tank module");
                        } else {
                            loads.push_back(lp);
                        }
                    }
                } else {
                    for (const auto& [q, dd] : declared) {
                        if (!dd.controller && q.system() == p.system() &&
                            (dd.type == "fcu" || dd.type == "loads" || dd.type == "tank")) {
                            loads.push_back(q);
                        }
                    }
                }
                if (k.any_with_prefix("pv")) {
                    der::PvSpec pv;
                    pv.rated_power = k.num("pv.rated_power", pv.rated_power);
                    pv.gamma = k.num("pv.gamma", pv.gamma);
                    pv.soiling = k.num("pv.soiling", pv.soiling);
                    pv.shading = k.num("pv.shading", pv.shading);
                    pv.inverter_eff = k.num("pv.inverter_eff", pv.inverter_eff);
                    pv.degradation = k.num("pv.degradation", pv.degradation);
                    pv.k_t = k.num("pv.k_t", pv.k_t);
                    d.pv = pv;
                }
                if (k.any_with_prefix("battery")) {
                    der::BatteryParams b;
                    b.capacity_kwh = k.num("battery.capacity_kwh", b.capacity_kwh);
                    b.soc_min = k.num("battery.soc_min", b.soc_min);
                    b.soc_max = k.num("battery.soc_max", b.soc_max);
                    b.eta_charge = k.num("battery.eta_charge", b.eta_charge);
                    b.eta_discharge = k.num("battery.eta_discharge", b.eta_discharge);
                    b.p_max_charge = k.num("battery.p_max_charge", b.p_max_charge);
                    b.p_max_discharge = k.num("battery.p_max_discharge", b.p_max_discharge);
                    b.k_cycle = k.num("battery.k_cycle", b.k_cycle);
                    b.k_calendar = k.num("battery.k_calendar", b.k_calendar);
                    b.soh_min = k.num("battery.soh_min", b.soh_min);
                    d.battery_initial_soc = k.num("battery.initial_soc", d.battery_initial_soc);
                    d.battery = b;
                    der_battery[p] = b;
                }
                for (const auto& name : k.subgroups("ev")) {
                    const std::string pre = "ev." + name + ".";
                    EvUnit ev;
                    ev.name = name;
                    auto& b = ev.params.battery;
                    b.capacity_kwh = k.num(pre + "capacity_kwh", b.capacity_kwh);
                    b.p_max_charge = k.num(pre + "p_max", b.p_max_charge);
                    b.p_max_discharge = b.p_max_charge;
                    b.soc_min = k.num(pre + "soc_min", b.soc_min);
                    b.soc_max = k.num(pre + "soc_max", b.soc_max);
                    ev.params.v2g = k.flag(pre + "v2g", false);
                    ev.initial_soc = k.num(pre + "initial_soc", ev.initial_soc);
                    const double trip = k.num(pre + "trip_kwh", 10.0);
                    const double req = k.num(pre + "required_soc", 0.8);
                    if (auto f = k.str(pre + "schedule")) {
                        guard(k, [&] { ev.params.schedule = der::load_ev_schedule_csv(resolve_file(cfg.base_dir, *f)); });
                    } else if (auto dly = k.str(pre + "daily")) {
                        guard(k, [&] { ev.params.schedule = daily_stays(*dly, trip, req, sim); });
                    } else {
                        k.problem("EV '" + name + "' needs " + pre + "schedule or " + pre + "daily");
                    }
                    d.evs.push_back(ev);
                }
                d.grid_export = k.flag("grid_export", d.grid_export);
                d.ev_grid_charging = k.flag("ev_grid_charging", d.ev_grid_charging);
                k.finish(what);
                if (weather) {
                    guard(k, [&] { env.emplace<DerModule>(p, d, loads, ctl, *weather); });
                    out.ders.push_back(p);
                }
            } else {
                k.problem("type", "unknown module type '" + type + "'");
            }
        }
    }
    for (const auto& [p, d] : declared) {
        if (d.controller || std::find(order.begin(), order.end(), d.type) != order.end()) continue;
        problems.push_back(cfg.source + ":" + std::to_string(d.section->line) + ": unknown module type '" + d.type + "'");
    }

    // Building and cluster power aggregation, one rule per system id.
    std::set<std::string> systems;
    for (const auto& m : env.handles()) {
        if (!m.path.system()) continue;
        for (const auto& o : m.outputs) {
            if (o.variable == "power" && o.kind == core::DataKind::Observation) systems.insert(*m.path.system());
        }
    }
    for (const auto& sys : systems) {
        HierPath target(sim.cluster, "electrical", sys);
        out.buildings.push_back(target);
        env.add_aggregation({target, "power", core::AggregationFn::Sum, core::DataKind::Observation, core::Unit::Watt});
    }
    if (!systems.empty()) {
        env.add_aggregation({out.cluster, "power", core::AggregationFn::Sum, core::DataKind::Observation, core::Unit::Watt});
    }

    // Controllers: coordinators first so HVAC controllers can reference them.
    std::vector<std::pair<HierPath, const Section*>> sorted = ctrls;
    std::stable_sort(sorted.begin(), sorted.end(), [&](const auto& a, const auto& b) {
        return (declared[a.first].type == "peak_coordinator") > (declared[b.first].type == "peak_coordinator");
    });
    for (const auto& [path, sec] : sorted) {
        const HierPath p = path;
        current = &p;
        Keys k(*sec, cfg.source, problems);
        const auto type = k.str("type", "");
        const std::string what = "controller type '" + type + "'";
        HvacCommand cmd;
        cmd.v_sa_rated = fan_rated.count(p) ? fan_rated[p] : cmd.v_sa_rated;

        if (type == "deadband") {
            control::DeadbandConfig c;
            auto zone = ref(k, "zone", {"zone"}, false, true);
            auto occ = ref(k, "occupancy", {"occupancy"}, false, false);
            auto coord = ref(k, "coordinator", {"peak_coordinator"}, true, false);
            c.setpoint = k.num("setpoint", c.setpoint);
            c.half_band = k.num("half_band", c.half_band);
            c.switch_margin = k.num("switch_margin", c.switch_margin);
            const auto mode = k.str("mode", "cooling");
            if (mode == "heating") {
                c.mode = control::ThermalMode::Heating;
            } else if (mode != "cooling") {
                k.problem("mode", "mode must be cooling or heating");
            }
            cmd.v_sa_rated = k.num("v_sa_rated", cmd.v_sa_rated);
            cmd.t_sa_design = k.num("t_sa_design", cmd.t_sa_design);
            k.finish(what);
            std::optional<core::SignalKey> curtail;
            if (coord && p.system()) {
                curtail = core::SignalKey{*coord, PeakCoordinatorModule::curtail_variable(p), core::DataKind::Action};
            }
            if (zone) {
                guard(k, [&] { env.emplace<DeadbandHvacController>(p, c, cmd, *zone, occ, curtail); });
                for (auto& z : out.zones) {
                    if (z.path == *zone) {
                        z.band = std::make_pair(c.setpoint - c.half_band, c.setpoint + c.half_band);
                        z.controller = p;
                        z.band_from_setpoint = true;
                        z.half_band = c.half_band;
                    }
                }
            }
        } else if (type == "mpc") {
            control::MpcConfig c;
            control::ActionBounds b;
            auto zone = ref(k, "zone", {"zone"}, false, true);
            auto weather = ref(k, "weather", {"weather"}, false, true, "weather");
            auto occ = ref(k, "occupancy", {"occupancy"}, false, false);
            auto price = ref(k, "price", {"price"}, false, true, "price");
            c.horizon = static_cast<std::size_t>(k.integer("horizon", static_cast<std::int64_t>(c.horizon)));
            c.t_low = k.num("t_low", c.t_low);
            c.t_high = k.num("t_high", c.t_high);
            c.comfort_weight = k.num("comfort_weight", c.comfort_weight);
            c.cop = k.num("cop", c.cop);
            c.iterations = static_cast<int>(k.integer("iterations", c.iterations));
            c.step = k.num("step", c.step);
            c.beta = k.num("beta", c.beta);
            b.lo = k.num("q_min", b.lo);
            b.hi = k.num("q_max", b.hi);
            cmd.v_sa_rated = k.num("v_sa_rated", cmd.v_sa_rated);
            cmd.t_sa_design = k.num("t_sa_design", cmd.t_sa_design);
            const auto model = k.str("model", "rc");
            std::string model_file;
            if (model == "file") model_file = resolve_file(cfg.base_dir, k.required("model_file"));
            else if (model != "rc") k.problem("model", "MPC model must be rc or file");
            k.finish(what);
            guard(k, [&] {
                c.validate();
                b.validate();
            });
            if (zone && weather && price) {
                const HierPath occ_path = occ ? *occ : zone_occupancy[*zone];
                std::shared_ptr<const thermal::ZoneModel> m;
                guard(k, [&] {
                    if (!model_file.empty()) {
                        m = thermal::load_zone_model(model_file);
                    } else if (zone_model.count(*zone)) {
                        m = zone_model[*zone];
                    } else {
                        m = std::make_shared<thermal::PhysicsZoneModel>(thermal::PhysicsZoneModel::from_rc(
                            zone_rc[*zone], static_cast<double>(sim.dt), activity_names[zone_occupancy[*zone]]));
                    }
                });
                if (m) {
                    guard(k, [&] {
                        env.emplace<MpcHvacController>(p, c, b, m, cmd, *zone, *weather, occ_path, *price);
                    });
                    out.mpcs.push_back(p);
                    for (auto& z : out.zones) {
                        if (z.path == *zone) {
                            z.band = std::make_pair(c.t_low, c.t_high);
                            z.controller = p;
                        }
                    }
                }
            }
        } else if (type == "pid_tank") {
            control::PidConfig c;
            auto tank = ref(k, "tank", {"tank"}, false, true);
            const double sp = k.num("setpoint", 55.0);
            c.kp = k.num("kp", 0.15);
            c.ki = k.num("ki", 2e-5);
            c.kd = k.num("kd", 0.0);
            c.u_min = k.num("u_min", 0.0);
            c.u_max = k.num("u_max", 1.0);
            c.i_min = k.num("i_min", c.i_min);
            c.i_max = k.num("i_max", c.i_max);
            k.finish(what);
            if (tank) guard(k, [&] { env.emplace<PidTankController>(p, c, sp, *tank); });
        } else if (type == "tou_dispatch") {
            control::TouDispatchConfig c;
            auto d = ref(k, "der", {"der"}, false, true);
            auto price = ref(k, "price", {"price"}, false, true, "price");
            control::StorageView view;
            if (d && der_battery.count(*d)) {
                const auto& b = der_battery[*d];
                view = {b.capacity_kwh, b.eta_charge, b.eta_discharge};
                c.p_max_charge = b.p_max_charge;
                c.p_max_discharge = b.p_max_discharge;
                c.charge_target = std::min(c.charge_target, b.soc_max);
                c.reserve_floor = std::max(c.reserve_floor, b.soc_min);
            } else if (d) {
                k.problem("der", "tou_dispatch needs a DER module with a battery");
            }
            c.charge_target = k.num("charge_target", c.charge_target);
            c.reserve_floor = k.num("reserve_floor", c.reserve_floor);
            c.p_max_charge = k.num("p_max_charge", c.p_max_charge);
            c.p_max_discharge = k.num("p_max_discharge", c.p_max_discharge);
            k.finish(what);
            if (d && der_battery.count(*d)) {
                const auto& b = der_battery[*d];
                if (c.charge_target > b.soc_max || c.reserve_floor < b.soc_min) {
                    k.problem("TOU targets must lie within the battery SOC bounds");
                }
            }
            if (d && price) guard(k, [&] { env.emplace<TouDispatchController>(p, c, view, *d, *price); });
        } else if (type == "peak_coordinator") {
            const double cap = k.num("cap", 0.0);
            std::vector<HierPath> buildings = out.buildings;
            if (k.has("buildings")) {
                buildings.clear();
                for (const auto& b : k.paths("buildings")) {
                    if (std::find(out.buildings.begin(), out.buildings.end(), b) == out.buildings.end()) {
                        k.problem("buildings", "dangling reference: " + b.str() + " has no building power aggregate");
                    } else {
                        buildings.push_back(b);
                    }
                }
            }
            k.finish(what);
            guard(k, [&] { env.emplace<PeakCoordinatorModule>(p, cap, buildings); });
        } else if (type == "sinusoid_reference") {
            const double mean = k.num("mean", 0.5);
            const double amp = k.num("amplitude", 0.4);
            const double period = k.num("period_hours", 24.0);
            k.finish(what);
            guard(k, [&] { env.emplace<SinusoidReference>(p, mean, amp, period); });
        } else if (type == "tracking") {
            auto src = ref(k, "reference", {"sinusoid_reference"}, true, true);
            const auto mode = k.str("mode", "linear");
            control::TrackMode tm = control::TrackMode::Linear;
            if (mode == "staged") {
                tm = control::TrackMode::Staged;
            } else if (mode != "linear") {
                k.problem("mode", "mode must be linear or staged");
            }
            const double lo = k.num("lo", 0.0);
            const double hi = k.num("hi", 1.0);
            const auto stages = k.numbers("stages", {});
            k.finish(what);
            if (src) {
                guard(k, [&] {
                    env.emplace<TrackingController>(p, core::SignalKey{*src, "v_reference", core::DataKind::Action},
                                                    tm, lo, hi, stages);
                });
            }
        } else {
            k.problem("type", "unknown controller type '" + type + "'");
        }
    }

    for (const auto& s : cfg.aggregates) {
        Keys k(s, cfg.source, problems);
        try {
            HierPath target = HierPath::parse(s.arg);
            const auto var = k.required("variable");
            const auto fn = k.str("fn", "sum");
            const auto kind = k.str("kind", "observation");
            core::AggregationRule rule{target, var, core::AggregationFn::Sum, core::DataKind::Observation,
                                       core::Unit::None};
            if (fn == "mean") {
                rule.fn = core::AggregationFn::Mean;
            } else if (fn != "sum") {
                k.problem("fn", "fn must be sum or mean");
            }
            rule.source_kind = core::parse_data_kind(kind);
            k.finish("[aggregate]");
            env.add_aggregation(rule);
        } catch (const Error& e) {
            k.problem(e.what());
        }
    }

    if (cfg.generalization) {
        try {
            const auto z = HierPath::parse(cfg.generalization->zone);
            auto it = std::find_if(out.zones.begin(), out.zones.end(), [&](const ZoneInfo& zi) { return zi.path == z; });
            if (it == out.zones.end() || !it->rc) {
                problems.push_back(cfg.source + ": [generalization] zone " + z.str() + " is not an RC zone module");
            } else if (!out.synth_weather.count(it->weather.str()) || !out.synth_occupancy.count(it->occupancy.str())) {
                problems.push_back(cfg.source + ": [generalization] needs synthetic weather and occupancy");
            }
        } catch (const Error& e) {
            problems.push_back(cfg.source + ": [generalization] " + e.what());
        }
    }

    if (problems.empty()) {
        for (const auto& v : env.validate_wiring()) problems.push_back(cfg.source + ": wiring: " + v.message);
    }
    if (!problems.empty()) throw ScenarioError(problems);
    return out;
}

std::vector<std::string> validate_scenario(const std::string& path) {
    try {
        const auto cfg = parse_scenario(path);
        build_scenario(cfg);
    } catch (const ScenarioError& e) {
        return e.problems();
    } catch (const Error& e) {
        return {e.what()};
    }
    return {};
}

} // namespace bldgsim::sim
