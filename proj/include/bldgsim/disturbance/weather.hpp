#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bldgsim/core/clock.hpp"

namespace bldgsim::disturbance {

struct WeatherRecord {
    double t_out = 20.0;               // degC
    double ghi = 0.0;                  // W/m2
    std::optional<double> t_wb;        // degC
    std::optional<double> t_dew;       // degC, kept when read from EPW

    /// GHI >= 0, finite temperatures, T_wb <= T_out.
    void validate() const;
};

struct SynthWeatherParams {
    double t_mean = 28.0;
    double t_amp = 4.0;
    double ghi_peak = 800.0;
    double sunrise = 6.0;   // hour of day
    double sunset = 18.0;

    void validate() const;
};

/// T_out = T_mean + T_amp sin(2 pi (h - 9) / 24),
/// GHI = GHI_peak max(0, sin(pi (h - rise) / (set - rise))) between rise and set.
WeatherRecord synth_weather(const SynthWeatherParams& p, double hour_of_day);
WeatherRecord synth_weather(const SynthWeatherParams& p, const core::SimClock& clock);

/// Relative humidity (0..1) from dry bulb and dew point (Magnus formula).
double relative_humidity(double t_dry, double t_dew);
/// Stull (2011) wet bulb from dry bulb and relative humidity (0..1); clamped to <= t_dry.
double wet_bulb_stull(double t_dry, double rh);

/// Time series read from a file, already at the requested step.
struct WeatherSeries {
    core::TimePoint start{};
    std::int64_t dt_seconds = 3600;
    std::vector<WeatherRecord> records;
};

/// CSV with columns timestamp, t_out_c, ghi_wm2[, t_wb_c], resampled by
/// hold-forward to `target_dt` seconds.
WeatherSeries load_weather_csv(const std::string& path, std::int64_t target_dt);

/// Hourly records from the dry bulb (field 7), dew point (field 8) and
/// GHI (field 14) of an EPW file. Missing-value codes are errors.
WeatherSeries load_epw_subset(const std::string& path);
WeatherSeries resample_hold_forward(const WeatherSeries& in, std::int64_t target_dt);

} // namespace bldgsim::disturbance
