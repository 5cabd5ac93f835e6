#include "bldgsim/disturbance/weather.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "bldgsim/core/csv.hpp"
#include "bldgsim/core/error.hpp"
#include "bldgsim/disturbance/profile.hpp"

namespace bldgsim::disturbance {

namespace {

constexpr int kEpwHeaderLines = 8;
constexpr std::size_t kEpwFields = 35;

double epw_number(const std::string& cell, const std::string& path, std::size_t line, const char* what) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v)) {
        throw ParseError(path + ":" + std::to_string(line) + ": bad " + what + " '" + cell + "'");
    }
    return v;
}

} // namespace

void WeatherRecord::validate() const {
    if (!std::isfinite(t_out) || !std::isfinite(ghi)) throw InvalidArgument("weather values must be finite");
    if (ghi < 0.0) throw InvalidArgument("GHI must be >= 0");
    if (t_wb && !(*t_wb <= t_out + 1e-9)) throw InvalidArgument("wet bulb must not exceed dry bulb");
}

void SynthWeatherParams::validate() const {
    if (!std::isfinite(t_mean) || !std::isfinite(t_amp)) throw InvalidArgument("synthetic weather: non-finite");
    if (!(ghi_peak >= 0.0)) throw InvalidArgument("synthetic weather: GHI peak must be >= 0");
    if (!(sunrise >= 0.0 && sunset <= 24.0 && sunrise < sunset)) {
        throw InvalidArgument("synthetic weather: need 0 <= sunrise < sunset <= 24");
    }
}

WeatherRecord synth_weather(const SynthWeatherParams& p, double h) {
    using std::numbers::pi;
    WeatherRecord w;
    w.t_out = p.t_mean + p.t_amp * std::sin(2.0 * pi * (h - 9.0) / 24.0);
    if (h > p.sunrise && h < p.sunset) {
        w.ghi = p.ghi_peak * std::max(0.0, std::sin(pi * (h - p.sunrise) / (p.sunset - p.sunrise)));
    }
    return w;
}

WeatherRecord synth_weather(const SynthWeatherParams& p, const core::SimClock& clock) {
    return synth_weather(p, clock.hour_of_day());
}

double relative_humidity(double t_dry, double t_dew) {
    constexpr double a = 17.625, b = 243.04;
    const double rh = std::exp(a * t_dew / (b + t_dew) - a * t_dry / (b + t_dry));
    return std::clamp(rh, 0.0, 1.0);
}

double wet_bulb_stull(double t, double rh) {
    const double r = std::clamp(rh, 0.0, 1.0) * 100.0;
    const double tw = t * std::atan(0.151977 * std::sqrt(r + 8.313659)) + std::atan(t + r) -
                      std::atan(r - 1.676331) + 0.00391838 * std::pow(r, 1.5) * std::atan(0.023101 * r) - 4.686035;
    return std::min(tw, t);
}

WeatherSeries load_weather_csv(const std::string& path, std::int64_t target_dt) {
    {
        const auto table = core::read_csv_file(path);
        const auto ct = table.require_column("t_out_c"), cg = table.require_column("ghi_wm2");
        const auto cw = table.column("t_wb_c");
        for (std::size_t r = 0; r < table.rows.size(); ++r) {
            WeatherRecord w{table.number(r, ct), table.number(r, cg), std::nullopt, std::nullopt};
            if (cw != std::string::npos) w.t_wb = table.number(r, cw);
            try {
                w.validate();
            } catch (const InvalidArgument& e) {
                throw ParseError(path + ":" + std::to_string(table.line_numbers[r]) + ": " + e.what());
            }
        }
    }
    const auto p = load_profile_csv(path, {"t_out_c", "ghi_wm2"}, {"t_wb_c"}, target_dt);
    WeatherSeries s;
    s.start = p.start;
    s.dt_seconds = p.dt_seconds;
    const auto& t = p.column("t_out_c");
    const auto& g = p.column("ghi_wm2");
    const std::vector<double>* wb = p.columns.count("t_wb_c") ? &p.column("t_wb_c") : nullptr;
    for (std::size_t i = 0; i < t.size(); ++i) {
        WeatherRecord w{t[i], g[i], std::nullopt, std::nullopt};
        if (wb) w.t_wb = (*wb)[i];
        try {
            w.validate();
        } catch (const InvalidArgument& e) {
            throw ParseError(path + ": record " + std::to_string(i) + ": " + e.what());
        }
        s.records.push_back(w);
    }
    return s;
}

WeatherSeries load_epw_subset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    WeatherSeries s;
    s.dt_seconds = 3600;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (lineno <= kEpwHeaderLines) continue;
        if (core::trim(line).empty()) continue;
        const auto f = core::split(line, ',');
        if (f.size() != kEpwFields) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(kEpwFields) +
                             " fields, got " + std::to_string(f.size()));
        }
        if (s.records.empty()) {
            const int year = static_cast<int>(epw_number(f[0], path, lineno, "year"));
            const int month = static_cast<int>(epw_number(f[1], path, lineno, "month"));
            const int day = static_cast<int>(epw_number(f[2], path, lineno, "day"));
            const int hour = static_cast<int>(epw_number(f[3], path, lineno, "hour"));
            using namespace std::chrono;
            const year_month_day ymd{std::chrono::year{year}, std::chrono::month{static_cast<unsigned>(month)},
                                     std::chrono::day{static_cast<unsigned>(day)}};
            if (!ymd.ok() || hour < 1 || hour > 24) {
                throw ParseError(path + ":" + std::to_string(lineno) + ": bad date fields");
            }
            s.start = sys_days{ymd} + hours{hour - 1};
        }
        WeatherRecord w;
        w.t_out = epw_number(f[6], path, lineno, "dry bulb");
        w.t_dew = epw_number(f[7], path, lineno, "dew point");
        w.ghi = epw_number(f[13], path, lineno, "GHI");
        if (w.t_out >= 99.9 || *w.t_dew >= 99.9 || w.ghi >= 9999.0) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": missing-value code");
        }
        if (w.ghi < 0.0) throw ParseError(path + ":" + std::to_string(lineno) + ": negative GHI");
        w.t_wb = wet_bulb_stull(w.t_out, relative_humidity(w.t_out, *w.t_dew));
        s.records.push_back(w);
    }
    if (lineno < kEpwHeaderLines) throw ParseError(path + ": truncated EPW header");
    return s;
}

WeatherSeries resample_hold_forward(const WeatherSeries& in, std::int64_t target_dt) {
    if (target_dt <= 0 || in.dt_seconds % target_dt != 0) {
        throw InvalidArgument("resample: source step must be a multiple of the target step");
    }
    WeatherSeries out;
    out.start = in.start;
    out.dt_seconds = target_dt;
    const auto k = in.dt_seconds / target_dt;
    for (const auto& r : in.records) {
        for (std::int64_t i = 0; i < k; ++i) out.records.push_back(r);
    }
    return out;
}

} // namespace bldgsim::disturbance
