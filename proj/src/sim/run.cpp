#include "bldgsim/sim/run.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <spdlog/spdlog.h>

#include "json.hpp"

#include "bldgsim/core/csv.hpp"
#include "bldgsim/sim/modules.hpp"
#include "bldgsim/sim/plots.hpp"
#include "bldgsim/thermal/training.hpp"

namespace bldgsim::sim {

namespace {

using core::DataKind;
using core::HierPath;
using core::SignalKey;
using json = nlohmann::ordered_json;

double value_or(const core::SignalFrame& f, const SignalKey& k, double def) {
    const auto* e = f.find(k);
    return e ? e->value : def;
}

std::string hex64(std::uint64_t v) {
    std::ostringstream s;
    s << std::hex << std::setw(16) << std::setfill('0') << v;
    return s.str();
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

void write_text(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw RuntimeError("cannot write " + p.string());
    out << text;
    if (!out) throw RuntimeError("write failed: " + p.string());
}

class TimeseriesWriter {
public:
    TimeseriesWriter(const std::filesystem::path& path, const core::SimClock& clock, std::vector<std::string> prefixes)
        : out_(path, std::ios::binary), clock_(clock), prefixes_(std::move(prefixes)) {
        if (!out_) throw RuntimeError("cannot write " + path.string());
    }

    void header(const core::SignalFrame& first) {
        for (const auto& [key, e] : first.entries()) {
            const auto name = key.column_name();
            if (selected(name)) columns_.emplace_back(name, key);
        }
        std::sort(columns_.begin(), columns_.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        std::string line = "step,timestamp";
        for (const auto& c : columns_) line += "," + c.first;
        out_ << line << '\n';
        header_done_ = true;
    }

    void empty_header() {
        if (!header_done_) out_ << "step,timestamp\n";
        header_done_ = true;
    }

    void row(const core::SignalFrame& f) {
        if (!header_done_) header(f);
        std::string line = std::to_string(f.timestep()) + "," + core::format_timestamp(clock_.at(f.timestep()));
        for (const auto& c : columns_) {
            line += ',';
            if (const auto* e = f.find(c.second)) line += core::format_double(e->value);
        }
        out_ << line << '\n';
    }

    void close() {
        empty_header();
        out_.close();
        if (!out_) throw RuntimeError("write failed: timeseries.csv");
    }

private:
    bool selected(const std::string& name) const {
        if (prefixes_.empty()) return true;
        return std::any_of(prefixes_.begin(), prefixes_.end(),
                           [&](const std::string& p) { return name.rfind(p, 0) == 0; });
    }

    std::ofstream out_;
    core::SimClock clock_;
    std::vector<std::string> prefixes_;
    std::vector<std::pair<std::string, SignalKey>> columns_;
    bool header_done_ = false;
};

struct ZoneAccumulator {
    const ZoneInfo* info = nullptr;
    ZoneMetrics m;
    std::size_t outside = 0;
};

} // namespace

std::string RunMetrics::to_json() const {
    json j;
    j["scenario"] = scenario;
    j["seed"] = seed;
    j["steps"] = steps;
    j["dt_hours"] = dt_hours;
    j["warmup_hours"] = warmup_hours;
    j["wall_seconds"] = wall_seconds;
    j["cluster"] = {{"energy_kwh", cluster_energy_kwh}, {"peak_w", cluster_peak_w}, {"cost", cluster_cost}};
    json b = json::array();
    for (const auto& x : buildings) {
        b.push_back({{"path", x.path},
                     {"energy_kwh", x.energy_kwh},
                     {"cost", x.cost},
                     {"peak_w", x.peak_w},
                     {"pv_kwh", x.pv_kwh},
                     {"self_consumption", optional_number(x.self_consumption)}});
    }
    j["buildings"] = b;
    json z = json::array();
    for (const auto& x : zones) {
        z.push_back({{"path", x.path},
                     {"comfort_violation_hours", x.banded ? json(x.violation_hours) : json(nullptr)},
                     {"in_band_fraction", x.banded ? json(x.in_band_fraction) : json(nullptr)},
                     {"steps_after_warmup", x.steps},
                     {"t_min", x.t_min},
                     {"t_max", x.t_max}});
    }
    j["zones"] = z;
    json m = json::array();
    for (const auto& x : mpcs) {
        m.push_back({{"path", x.path}, {"mean_abs_mismatch_w", x.mean_abs_mismatch_w}, {"mean_iterations", x.mean_iterations}});
    }
    j["mpc"] = m;
    j["ev"] = {{"events", ev_events}, {"departure_shortfalls", ev_shortfalls}};
    if (generalization) {
        const auto& g = *generalization;
        j["generalization"] = {
            {"horizon", g.horizon},
            {"train_steps", g.train_steps},
            {"test_steps", g.test_steps},
            {"physics", {{"rollout_rmse", g.physics_rmse},
                         {"violation_fraction", g.physics_violation.fraction},
                         {"violating_steps", g.physics_violation.violating},
                         {"qualifying_steps", g.physics_violation.qualifying},
                         {"train_seconds", g.physics_train_seconds}}},
            {"baseline", {{"rollout_rmse", g.baseline_rmse},
                          {"violation_fraction", g.baseline_violation.fraction},
                          {"violating_steps", g.baseline_violation.violating},
                          {"qualifying_steps", g.baseline_violation.qualifying},
                          {"train_seconds", g.baseline_train_seconds}}}};
    }
    return j.dump(2) + "\n";
}

std::string manifest_json(const ScenarioConfig& config, std::uint64_t seed) {
    json j;
    j["tool"] = "bldgsim";
    j["version"] = kVersion;
    j["format"] = 1;
    j["scenario"] = config.simulation.name;
    j["source"] = config.source;
    j["base_dir"] = std::filesystem::absolute(config.base_dir).lexically_normal().string();
    j["config_hash"] = "fnv1a64:" + hex64(fnv1a(config.text));
    j["seed"] = seed;
    j["start"] = core::format_timestamp(config.simulation.start);
    j["dt_seconds"] = config.simulation.dt;
    j["steps"] = config.simulation.steps();
    j["compiler"] = __VERSION__;
    j["scenario_text"] = config.text;
    return j.dump(2) + "\n";
}

Replay read_manifest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open manifest " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const std::exception& e) {
        throw ParseError(path + ": not a JSON manifest: " + e.what());
    }
    for (const char* k : {"scenario_text", "seed", "config_hash", "base_dir", "source"}) {
        if (!j.contains(k)) throw ParseError(path + ": manifest lacks '" + std::string(k) + "'");
    }
    const auto text = j["scenario_text"].get<std::string>();
    if (j["config_hash"].get<std::string>() != "fnv1a64:" + hex64(fnv1a(text))) {
        throw ParseError(path + ": config hash does not match the embedded scenario text");
    }
    Replay r;
    r.config = parse_scenario_text(text, j["source"].get<std::string>(), j["base_dir"].get<std::string>());
    r.seed = j["seed"].get<std::uint64_t>();
    return r;
}

thermal::ThermalTrace zone_trace(const std::vector<core::SignalFrame>& frames, const ZoneInfo& zone,
                                 const std::vector<std::string>& activity_names, double initial_t, double dt) {
    thermal::ThermalTrace tr;
    tr.dt = dt;
    tr.activity_names = activity_names;
    tr.activity.resize(activity_names.size());
    double t = initial_t;
    for (const auto& f : frames) {
        tr.t_zone.push_back(t);
        tr.t_out.push_back(f.value({zone.weather, "t_out", DataKind::Disturbance}));
        tr.ghi.push_back(f.value({zone.weather, "ghi", DataKind::Disturbance}));
        tr.occupancy.push_back(f.value({zone.occupancy, "occupants", DataKind::Disturbance}));
        tr.q_hvac.push_back(f.value({zone.path, "q_hvac", DataKind::Observation}));
        for (std::size_t a = 0; a < activity_names.size(); ++a) {
            tr.activity[a].push_back(f.value({zone.occupancy, activity_variable(activity_names[a]), DataKind::Disturbance}));
        }
        t = f.value({zone.path, "t_zone", DataKind::State});
    }
    return tr;
}

GeneralizationResult run_generalization(const GeneralizationConfig& g, const thermal::RcZoneSpec& rc,
                                        const disturbance::SynthWeatherParams& weather,
                                        const disturbance::SynthOccupancyParams& occupancy,
                                        const thermal::ThermalTrace& test, core::TimePoint test_start,
                                        std::vector<std::vector<double>>* predictions) {
    thermal::RcTraceConfig tc;
    tc.days = g.train_days;
    tc.dt = test.dt;
    tc.seed = g.seed;
    tc.start = test_start - std::chrono::days(static_cast<int>(g.train_days));
    tc.weather = weather;
    tc.occupancy = occupancy;
    tc.policy = g.policy == "off"            ? thermal::HvacPolicy::Off
                : g.policy == "proportional" ? thermal::HvacPolicy::Proportional
                                             : thermal::HvacPolicy::Deadband;
    tc.setpoint = g.setpoint;
    tc.half_band = g.half_band;
    tc.q_cool = g.q_cool;
    tc.initial_t = test.t_zone.empty() ? 24.0 : test.t_zone.front();
    const auto train_trace = thermal::generate_rc_trace(rc, tc);

    thermal::TrainConfig cfg;
    cfg.horizon = g.horizon;
    cfg.epochs = g.epochs;

    thermal::PhysicsModelConfig pc;
    pc.head = g.physics_head == "mlp" ? thermal::HeadKind::Mlp : thermal::HeadKind::Affine;
    pc.hidden = g.hidden;
    thermal::PhysicsZoneModel physics(test.dt, train_trace.activity_names, pc);
    thermal::BaselineZoneModel baseline(test.dt, train_trace.activity_names, g.baseline_hidden);

    GeneralizationResult r;
    spdlog::info("training physics-structured model on {} steps", train_trace.size());
    r.physics_train_seconds = thermal::train(physics, train_trace, cfg).seconds;
    spdlog::info("training unconstrained model on {} steps", train_trace.size());
    r.baseline_train_seconds = thermal::train(baseline, train_trace, cfg).seconds;

    const std::size_t h = std::min(g.horizon, test.size() > 1 ? test.size() - 1 : std::size_t{1});
    r.horizon = h;
    r.train_steps = train_trace.size();
    r.test_steps = test.size();
    r.physics_rmse = thermal::rollout_rmse(physics, test, h);
    r.baseline_rmse = thermal::rollout_rmse(baseline, test, h);
    r.physics_violation = thermal::physics_violation_metric(physics, test);
    r.baseline_violation = thermal::physics_violation_metric(baseline, test);

    if (predictions) {
        predictions->assign(3, std::vector<double>(test.size(), std::nan("")));
        (*predictions)[0] = test.t_zone;
        for (std::size_t s = 0; s + 1 < test.size(); s += h) {
            const std::size_t end = std::min(s + h, test.size() - 1);
            const auto x = thermal::exogenous_series(test, s, end);
            const std::vector<double> q(test.q_hvac.begin() + static_cast<std::ptrdiff_t>(s),
                                        test.q_hvac.begin() + static_cast<std::ptrdiff_t>(end));
            const auto pp = thermal::rollout_predict(physics, test.t_zone[s], x, q);
            const auto pb = thermal::rollout_predict(baseline, test.t_zone[s], x, q);
            for (std::size_t i = 0; i < pp.size(); ++i) {
                (*predictions)[1][s + i] = pp[i];
                (*predictions)[2][s + i] = pb[i];
            }
        }
    }
    return r;
}

RunMetrics run_scenario(const ScenarioConfig& config, const RunOptions& options) {
    const auto wall0 = std::chrono::steady_clock::now();
    const std::uint64_t seed = options.seed.value_or(config.simulation.seed);
    auto built = build_scenario(config, seed);
    auto& env = *built.env;
    env.initialize();

    const auto& sim = config.simulation;
    const std::int64_t steps = sim.steps();
    const double dt_h = static_cast<double>(sim.dt) / 3600.0;

    RunMetrics m;
    m.scenario = sim.name;
    m.seed = seed;
    m.steps = steps;
    m.dt_hours = dt_h;
    m.warmup_hours = config.output.warmup_hours;

    std::optional<std::filesystem::path> dir;
    std::optional<TimeseriesWriter> ts;
    if (options.out_dir) {
        dir = *options.out_dir;
        std::filesystem::create_directories(*dir);
        ts.emplace(*dir / "timeseries.csv", env.clock(), config.output.columns);
    }

    for (const auto& b : built.buildings) m.buildings.push_back({b.str(), 0, 0, 0, 0, std::nullopt});
    std::vector<double> pv_used(m.buildings.size(), 0.0);
    std::vector<ZoneAccumulator> zones;
    for (const auto& z : built.zones) {
        ZoneAccumulator a;
        a.info = &z;
        a.m.path = z.path.str();
        a.m.banded = z.band.has_value();
        a.m.t_min = std::numeric_limits<double>::infinity();
        a.m.t_max = -std::numeric_limits<double>::infinity();
        zones.push_back(a);
    }
    std::vector<std::pair<HierPath, HierPath>> mpc_zone;
    for (const auto& c : built.mpcs) {
        for (const auto& z : built.zones) {
            if (z.controller == c) mpc_zone.emplace_back(c, z.path);
        }
        m.mpcs.push_back({c.str(), 0.0, 0.0});
    }

    const bool generalize = config.generalization.has_value();
    std::vector<core::SignalFrame> recorded;
    if (generalize) recorded.reserve(static_cast<std::size_t>(std::max<std::int64_t>(steps, 0)));

    std::optional<SignalKey> price_key;
    if (built.price) price_key = SignalKey{*built.price, "price", DataKind::Disturbance};

    spdlog::info("running '{}' for {} steps of {} s (seed {})", sim.name, steps, sim.dt, seed);
    for (std::int64_t k = 0; k < steps; ++k) {
        const auto& f = env.step();
        if (ts) ts->row(f);
        const double price = price_key ? value_or(f, *price_key, 0.0) : 0.0;

        for (std::size_t i = 0; i < built.buildings.size(); ++i) {
            const auto& bp = built.buildings[i];
            const double p = f.value({bp, "power", DataKind::Observation});
            auto& b = m.buildings[i];
            b.energy_kwh += p * dt_h / 1000.0;
            b.cost += p * dt_h / 1000.0 * price;
            b.peak_w = std::max(b.peak_w, p);
            for (const auto& d : built.ders) {
                if (d.system() != bp.system()) continue;
                const double pv = f.value({d, "p_pv", DataKind::Observation});
                b.pv_kwh += pv * dt_h / 1000.0;
                pv_used[i] += (pv - f.value({d, "pv_spill", DataKind::Observation})) * dt_h / 1000.0;
            }
        }
        if (!built.buildings.empty()) {
            const double pc = f.value({built.cluster, "power", DataKind::Observation});
            m.cluster_energy_kwh += pc * dt_h / 1000.0;
            m.cluster_cost += pc * dt_h / 1000.0 * price;
            m.cluster_peak_w = std::max(m.cluster_peak_w, pc);
        }

        const bool after_warmup = static_cast<double>(k + 1) * dt_h > config.output.warmup_hours + 1e-9;
        for (auto& a : zones) {
            const double t = f.value({a.info->path, "t_zone", DataKind::State});
            if (!after_warmup) continue;
            a.m.t_min = std::min(a.m.t_min, t);
            a.m.t_max = std::max(a.m.t_max, t);
            ++a.m.steps;
            std::optional<std::pair<double, double>> band = a.info->band;
            if (a.info->band_from_setpoint && a.info->controller) {
                const double sp = f.value({*a.info->controller, "setpoint", DataKind::Action});
                band = std::make_pair(sp - a.info->half_band, sp + a.info->half_band);
            }
            if (band && (t < band->first - 1e-9 || t > band->second + 1e-9)) ++a.outside;
        }
        for (std::size_t i = 0; i < mpc_zone.size(); ++i) {
            const auto& [c, z] = mpc_zone[i];
            const double target = f.value({c, "q_target", DataKind::Action});
            const double real = f.value({z, "q_hvac", DataKind::Observation});
            m.mpcs[i].mean_abs_mismatch_w += std::abs(target - real);
            m.mpcs[i].mean_iterations += f.value({c, "mpc_iterations", DataKind::Observation});
        }

        if (generalize) recorded.push_back(f);
        if (options.observer) options.observer(built, f);
    }

    for (std::size_t i = 0; i < m.buildings.size(); ++i) {
        if (m.buildings[i].pv_kwh > 0.0) m.buildings[i].self_consumption = pv_used[i] / m.buildings[i].pv_kwh;
    }
    for (auto& a : zones) {
        if (a.m.steps == 0) {
            a.m.t_min = a.m.t_max = 0.0;
        } else {
            a.m.violation_hours = static_cast<double>(a.outside) * dt_h;
            a.m.in_band_fraction = 1.0 - static_cast<double>(a.outside) / static_cast<double>(a.m.steps);
        }
        m.zones.push_back(a.m);
    }
    for (auto& x : m.mpcs) {
        if (steps > 0) {
            x.mean_abs_mismatch_w /= static_cast<double>(steps);
            x.mean_iterations /= static_cast<double>(steps);
        }
    }
    for (const auto& d : built.ders) {
        const auto* mod = dynamic_cast<const DerModule*>(env.find(d));
        if (!mod) continue;
        for (const auto& [step, ev] : mod->ev_events()) {
            ++m.ev_events;
            if (ev.kind == der::EvEventKind::DepartureShortfall) ++m.ev_shortfalls;
        }
    }

    std::vector<std::vector<double>> predictions;
    if (generalize && steps > 1) {
        const auto& g = *config.generalization;
        const auto zp = HierPath::parse(g.zone);
        const auto it = std::find_if(built.zones.begin(), built.zones.end(), [&](const ZoneInfo& z) { return z.path == zp; });
        const auto& occ = built.synth_occupancy.at(it->occupancy.str());
        std::vector<std::string> names;
        for (const auto& a : occ.activities) names.push_back(a.name);
        double t0 = 24.0;
        for (const auto& h : env.handles()) {
            if (h.path != zp) continue;
            for (const auto& o : h.outputs) {
                if (o.variable == "t_zone") t0 = o.initial;
            }
        }
        const auto test = zone_trace(recorded, *it, names, t0, static_cast<double>(sim.dt));
        m.generalization = run_generalization(g, *it->rc, built.synth_weather.at(it->weather.str()), occ, test,
                                              sim.start, dir ? &predictions : nullptr);
    }

    m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();

    if (dir) {
        ts->close();
        write_text(*dir / "metrics.json", m.to_json());
        write_text(*dir / "manifest.json", manifest_json(config, seed));
        if (!predictions.empty()) {
            std::ostringstream s;
            s << "step,t_true,t_physics,t_baseline\n";
            for (std::size_t i = 0; i < predictions[0].size(); ++i) {
                s << i;
                for (const auto& col : predictions) s << ',' << (std::isnan(col[i]) ? "" : core::format_double(col[i]));
                s << '\n';
            }
            write_text(*dir / "generalization.csv", s.str());
        }
        if (options.plots || config.output.plots) {
            std::vector<std::string> notices;
            const auto files = emit_plots(dir->string(), {}, &notices);
            for (const auto& n : notices) spdlog::warn("{}", n);
            for (const auto& f : files) spdlog::info("wrote {}", f);
        }
    }
    spdlog::info("finished '{}' in {:.3f} s", sim.name, m.wall_seconds);
    return m;
}

} // namespace bldgsim::sim
