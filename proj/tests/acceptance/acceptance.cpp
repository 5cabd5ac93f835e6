// Acceptance checks. Prints one PASS/FAIL line per criterion; exits 1 on any failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "../common/random_tape.hpp"
#include "bldgsim/autodiff/tape.hpp"
#include "bldgsim/building/networks.hpp"
#include "bldgsim/control/mpc.hpp"
#include "bldgsim/core/environment.hpp"
#include "bldgsim/core/error.hpp"
#include "bldgsim/der/battery.hpp"
#include "bldgsim/der/ev.hpp"
#include "bldgsim/hvac/components.hpp"
#include "bldgsim/sim/run.hpp"
#include "bldgsim/sim/scenario.hpp"
#include "bldgsim/thermal/training.hpp"
#include "bldgsim/thermal/zone_model.hpp"

using namespace bldgsim;
using core::DataKind;
using core::HierPath;
using core::SignalKey;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string bundled(const std::string& name) { return std::string(BLDGSIM_SCENARIO_DIR) + "/" + name + ".scn"; }

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + what;
        }
    }
    void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

SignalKey key(const HierPath& p, const std::string& var, DataKind kind) { return {p, var, kind}; }

// --- 1: fan tracking --------------------------------------------------------

Outcome fan_tracking() {
    Outcome o;
    const auto cfg = sim::parse_scenario(bundled("s1_fan_tracking"));
    const auto ctl = HierPath::parse("c1/thermal/fcu1/fan_ctl");
    const auto vfd = HierPath::parse("c1/thermal/fcu1/fan_vfd");
    const auto staged = HierPath::parse("c1/thermal/fcu1/fan_staged");
    const auto constant = HierPath::parse("c1/thermal/fcu1/fan_const");
    const double rated = 1.0, turndown = 0.2;
    const std::vector<double> stages = {0.0, 0.33, 0.66, 1.0};
    double widest = 0.0;
    for (std::size_t i = 1; i < stages.size(); ++i) widest = std::max(widest, stages[i] - stages[i - 1]);

    double vfd_err = 0.0, staged_err = 0.0;
    std::size_t in_range = 0, bad_const = 0;
    sim::RunOptions opt;
    opt.observer = [&](const sim::BuiltScenario&, const core::SignalFrame& f) {
        const double sp = f.value(key(ctl, "v_setpoint", DataKind::Action));
        const double v1 = f.value(key(vfd, "flow", DataKind::Observation));
        const double v2 = f.value(key(staged, "flow", DataKind::Observation));
        const double v3 = f.value(key(constant, "flow", DataKind::Observation));
        if (sp >= turndown * rated && sp <= rated) {
            vfd_err = std::max(vfd_err, std::abs(v1 - sp));
            ++in_range;
        }
        if (sp >= 0.0 && sp <= rated) staged_err = std::max(staged_err, std::abs(v2 - sp));
        if (v3 != 0.0 && v3 != rated) ++bad_const;
    };
    const auto t0 = Clock::now();
    sim::run_scenario(cfg, opt);
    const double wall = seconds_since(t0);
    o.require(in_range > 0, "no setpoints inside the VFD range");
    o.require(vfd_err == 0.0, fmt("VFD max error %.3g", vfd_err));
    o.require(staged_err <= widest / 2.0 + 1e-12, fmt("staged max error %.3g", staged_err));
    o.require(bad_const == 0, "constant fan left {0, rated}");
    o.require(wall < 1.0, fmt("wall %.3f s", wall));
    o.note(fmt("VFD err %.3g", vfd_err) + fmt(", staged err %.3g", staged_err) +
           fmt(" (bound %.3g)", widest / 2.0) + fmt(", %.3f s", wall));
    return o;
}

// --- 2: generalization ------------------------------------------------------

Outcome generalization() {
    Outcome o;
    const auto t0 = Clock::now();
    const auto m = sim::run_scenario(sim::parse_scenario(bundled("s2_model_generalization")));
    const double wall = seconds_since(t0);
    if (!m.generalization) {
        o.require(false, "no generalization result");
        return o;
    }
    const auto& g = *m.generalization;
    o.require(g.physics_rmse < g.baseline_rmse, "physics RMSE not below baseline");
    o.require(g.physics_violation.fraction == 0.0, fmt("physics violation %.3g", g.physics_violation.fraction));
    o.require(g.baseline_violation.fraction > 0.0, "baseline shows no violation");
    o.require(g.physics_violation.qualifying > 0, "no qualifying steps");
    o.require(wall < 600.0, fmt("wall %.1f s", wall));
    o.note(fmt("RMSE physics %.4f K", g.physics_rmse) + fmt(" vs baseline %.4f K", g.baseline_rmse) +
           fmt(", violation physics %.3f", g.physics_violation.fraction) +
           fmt(" vs baseline %.3f", g.baseline_violation.fraction) + fmt(", %.1f s", wall));
    return o;
}

// --- 3: training on a 91-day trace -----------------------------------------

Outcome training() {
    Outcome o;
    thermal::RcZoneSpec rc;
    thermal::RcTraceConfig tc;
    tc.days = 91;
    tc.seed = 31;
    const auto trace = thermal::generate_rc_trace(rc, tc);
    const std::size_t split = trace.size() * 8 / 10;
    const auto train = trace.slice(0, split);
    const auto test = trace.slice(split, trace.size());
    thermal::PhysicsZoneModel model(tc.dt, trace.activity_names);
    thermal::TrainConfig cfg;
    cfg.horizon = 96;
    const auto t0 = Clock::now();
    const auto r = thermal::train(model, train, cfg);
    const double wall = seconds_since(t0);
    const double rmse = thermal::rollout_rmse(model, test, 96);
    o.require(wall < 300.0, fmt("training %.1f s", wall));
    o.require(rmse < 0.1, fmt("held-out RMSE %.4f K", rmse));
    o.note(fmt("%.1f s", wall) + fmt(", held-out RMSE %.4f K", rmse) + ", " + std::to_string(r.iterations) + " iterations");
    return o;
}

// --- 4: single house with DER ----------------------------------------------

Outcome house_der() {
    Outcome o;
    const auto cfg = sim::parse_scenario(bundled("s3_house_der"));
    const auto der_path = HierPath::parse("h/electrical/house1/der");
    const auto zone = HierPath::parse("h/thermal/house1/zone");
    const der::BatteryParams batt;
    const der::EvParams ev;
    const double warmup_steps = cfg.output.warmup_hours * 3600.0 / static_cast<double>(cfg.simulation.dt);
    std::size_t step = 0, out_of_band = 0, soc_bad = 0, waterfall_bad = 0;
    double worst_balance = 0.0;
    sim::RunOptions opt;
    opt.observer = [&](const sim::BuiltScenario&, const core::SignalFrame& f) {
        auto obs = [&](const char* v) { return f.value(key(der_path, v, DataKind::Observation)); };
        const double t = f.value(key(zone, "t_zone", DataKind::State));
        if (static_cast<double>(step) >= warmup_steps && (t < 23.0 || t > 25.0)) ++out_of_band;
        const double load = obs("p_load"), pv = obs("p_pv"), spill = obs("pv_spill");
        const double p_ev = obs("p_ev"), p_batt = obs("p_battery"), grid = obs("p_grid");
        const double pv_used = pv - spill;
        const double scale = std::max({std::abs(load), std::abs(pv), std::abs(p_ev), std::abs(p_batt),
                                       std::abs(grid), 1.0});
        worst_balance = std::max(worst_balance, std::abs(grid + pv_used - load - p_ev - p_batt) / scale);
        const double soc = f.value(key(der_path, "soc_battery", DataKind::State));
        const double soc_ev = f.value(key(der_path, "soc_ev_car", DataKind::State));
        if (soc < batt.soc_min - 1e-12 || soc > batt.soc_max + 1e-12) ++soc_bad;
        if (soc_ev < ev.battery.soc_min - 1e-12 || soc_ev > ev.battery.soc_max + 1e-12) ++soc_bad;
        if (obs("pv_to_ev") > 0.0 && obs("pv_to_building") != load) ++waterfall_bad;
        ++step;
    };
    const auto t0 = Clock::now();
    const auto m = sim::run_scenario(cfg, opt);
    const double wall = seconds_since(t0);
    o.require(out_of_band == 0, std::to_string(out_of_band) + " steps out of band after warm-up");
    o.require(worst_balance < 1e-6, fmt("bus imbalance %.3g", worst_balance));
    o.require(soc_bad == 0, "SOC out of bounds");
    o.require(waterfall_bad == 0, "PV reached the EV before the building load");
    o.require(wall < 5.0, fmt("wall %.2f s", wall));
    o.note(std::to_string(m.steps) + " steps" + fmt(", bus imbalance %.2g", worst_balance) + fmt(", %.2f s", wall));
    return o;
}

// --- 5: five-building cluster ----------------------------------------------

Outcome cluster() {
    Outcome o;
    double worst_sum = 0.0;
    sim::RunOptions opt;
    opt.observer = [&](const sim::BuiltScenario& b, const core::SignalFrame& f) {
        double sum = 0.0;
        for (const auto& p : b.buildings) sum += f.value(key(p, "power", DataKind::Observation));
        const double total = f.value(key(b.cluster, "power", DataKind::Observation));
        worst_sum = std::max(worst_sum, std::abs(total - sum) / std::max(std::abs(sum), 1.0));
    };
    const auto t0 = Clock::now();
    const auto m = sim::run_scenario(sim::parse_scenario(bundled("s4_cluster5")), opt);
    const double wall = seconds_since(t0);
    std::set<double> energies;
    for (const auto& b : m.buildings) energies.insert(b.energy_kwh);
    o.require(m.buildings.size() == 5, std::to_string(m.buildings.size()) + " buildings");
    o.require(energies.size() == m.buildings.size(), "building energies not distinct");
    double worst_band = 1.0;
    for (const auto& z : m.zones) {
        if (z.banded) worst_band = std::min(worst_band, z.in_band_fraction);
    }
    o.require(worst_band >= 0.95, fmt("worst zone in band %.3f", worst_band));
    o.require(worst_sum <= 1e-12, fmt("cluster sum mismatch %.3g", worst_sum));
    o.require(wall < 30.0, fmt("wall %.2f s", wall));
    o.note(fmt("worst zone in band %.3f", worst_band) + fmt(", sum mismatch %.2g", worst_sum) +
           fmt(", %.2f s", wall));
    return o;
}

// --- 6: gradients -------------------------------------------------------------

std::vector<double> central_difference(const std::function<double(const std::vector<double>&)>& f,
                                       std::vector<double> x, double h) {
    std::vector<double> g(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double x0 = x[k];
        x[k] = x0 + h;
        const double fp = f(x);
        x[k] = x0 - h;
        const double fm = f(x);
        x[k] = x0;
        g[k] = (fp - fm) / (2.0 * h);
    }
    return g;
}

double relative_error(const std::vector<double>& ad, const std::vector<double>& fd) {
    double worst = 0.0;
    for (std::size_t k = 0; k < ad.size(); ++k) worst = std::max(worst, std::abs(ad[k] - fd[k]) / (std::abs(fd[k]) + 1e-8));
    return worst;
}

control::MpcForecast flat_forecast(std::size_t h, double t_out, double price) {
    control::MpcForecast f;
    for (std::size_t k = 0; k < h; ++k) {
        f.exogenous.push_back({t_out, 0.0, 0.0, {}});
        f.price.push_back(price);
    }
    return f;
}

thermal::PhysicsZoneModel rc_model() { return thermal::PhysicsZoneModel::from_rc(thermal::RcZoneSpec{}, 900.0, {}); }

Outcome gradients() {
    Outcome o;
    std::mt19937_64 rng(606);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double worst_tape = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        ad::Tape t;
        const std::size_t n = 2 + trial % 5;
        const ad::Var out = testing::random_tape(t, rng, n, 20);
        std::vector<double> x(n);
        for (auto& v : x) v = u(rng);
        t.forward(x);
        const auto g = t.backward(out);
        const auto fd = central_difference([&](const std::vector<double>& p) { return t.forward(out, p); }, x, 1e-5);
        worst_tape = std::max(worst_tape, relative_error(g, fd));
    }

    const auto model = rc_model();
    control::MpcConfig cfg;
    cfg.horizon = 12;
    cfg.t_high = 24.5;
    control::MpcProblem prob(cfg, model, 26.0, flat_forecast(12, 33.0, 0.3), {-8000.0, 0.0});
    std::uniform_real_distribution<double> u01(0.05, 0.95);
    double worst_mpc = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<double> a(cfg.horizon);
        for (auto& v : a) v = u01(rng);
        std::vector<double> g;
        prob.smoothed(a, &g);
        const auto fd = central_difference([&](const std::vector<double>& p) { return prob.smoothed(p, nullptr); },
                                           a, 1e-6);
        worst_mpc = std::max(worst_mpc, relative_error(g, fd));
    }
    o.require(worst_tape < 1e-5, fmt("tape error %.3g", worst_tape));
    o.require(worst_mpc < 1e-5, fmt("MPC gradient error %.3g", worst_mpc));
    o.note(fmt("worst tape error %.2g", worst_tape) + fmt(", worst MPC error %.2g", worst_mpc));
    return o;
}

// --- 7: MPC optimality --------------------------------------------------------

Outcome mpc_optimality() {
    Outcome o;
    const auto model = rc_model();
    control::MpcConfig cfg;
    cfg.horizon = 2;
    cfg.t_high = 24.0;
    cfg.comfort_weight = 5.0;
    cfg.iterations = 300;
    const auto fc = flat_forecast(2, 34.0, 0.25);
    control::MpcProblem prob(cfg, model, 25.5, fc, {-8000.0, 0.0});
    double grid = 1e300;
    for (int a = 0; a < 5; ++a) {
        for (int b = 0; b < 5; ++b) {
            const std::vector<double> q = {-2000.0 * a, -2000.0 * b};
            grid = std::min(grid, prob.true_cost_q(q));
        }
    }
    const auto r = control::mpc_solve(cfg, model, 25.5, fc, {-8000.0, 0.0});
    o.require(r.cost <= grid * (1.0 + 1e-3), fmt("MPC cost %.6g", r.cost) + fmt(" above grid %.6g", grid));

    control::MpcConfig wide;
    wide.horizon = 8;
    wide.t_low = 10.0;
    wide.t_high = 40.0;
    const auto w = control::mpc_solve(wide, model, 24.0, flat_forecast(8, 30.0, 0.2), {-8000.0, 0.0},
                                      std::vector<double>(8, -4000.0));
    double worst = 0.0;
    for (double q : w.q) worst = std::max(worst, std::abs(q));
    o.require(worst < 1.0, fmt("wide-band |Q| %.3g W", worst));
    o.note(fmt("H=2 cost %.6g", r.cost) + fmt(" vs grid %.6g", grid) + fmt(", wide-band max |Q| %.2g W", worst));
    return o;
}

// --- 8: conservation ----------------------------------------------------------

Outcome conservation() {
    Outcome o;
    std::mt19937_64 rng(808);
    auto uni = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
    hvac::CoilSpec coil;
    double worst_coil = 0.0;
    for (int i = 0; i < 10000; ++i) {
        coil.effectiveness = uni(0.05, 1.0);
        const double ma = uni(0.01, 3.0), mw = uni(0.01, 3.0), ta = uni(-10.0, 40.0), tw = uni(2.0, 60.0);
        const auto r = hvac::coil_step(coil, ma, ta, mw, tw);
        const double air = ma * coil.cp_air * (ta - r.t_air_out);
        const double water = mw * coil.cp_water * (r.t_water_out - tw);
        worst_coil = std::max(worst_coil, std::abs(air - water) / std::max(std::abs(air), 1e-300));
    }

    double worst_batt = 0.0;
    for (int i = 0; i < 200; ++i) {
        der::BatteryParams p;
        p.eta_charge = uni(0.8, 1.0);
        p.eta_discharge = uni(0.8, 1.0);
        const double soc0 = uni(0.2, 0.5);
        const double p_in = uni(500.0, 4000.0);
        const auto c = der::battery_step(p, {soc0, 1.0}, p_in, 25.0, 900.0);
        const double e_in = c.p_actual * 0.25;
        const auto d = der::battery_step(p, c.next, -p_in * p.eta_charge * p.eta_discharge, 25.0, 900.0);
        const double e_out = -d.p_actual * 0.25;
        const double expected = p.eta_charge * p.eta_discharge * e_in;
        worst_batt = std::max(worst_batt, std::abs(e_out - expected) / expected);
        worst_batt = std::max(worst_batt, std::abs(d.next.soc - soc0) / soc0);
    }

    // Heater off, no draw: stored energy change against the loss integral of the exact solution.
    building::WaterTankSpec tank;
    const double mc = tank.mass * hvac::kCpWater, dt = 900.0, tau = mc / tank.ua;
    double worst_tank = 0.0;
    building::WaterTankState s{60.0};
    double stored = 0.0, integral = 0.0;
    for (int k = 0; k < 96; ++k) {
        const double t0 = s.t_tank;
        s = building::water_tank_step(tank, s, false, 0.0, dt).next;
        const double d_stored = mc * (s.t_tank - t0);
        const double exact_loss = tank.ua * (t0 - tank.t_ambient) * tau * (1.0 - std::exp(-dt / tau));
        worst_tank = std::max(worst_tank, std::abs(d_stored + exact_loss) / exact_loss);
        stored += d_stored;
        integral += exact_loss;
    }
    worst_tank = std::max(worst_tank, std::abs(stored + integral) / integral);

    o.require(worst_coil < 1e-9, fmt("coil imbalance %.3g", worst_coil));
    o.require(worst_batt < 1e-9, fmt("battery round trip %.3g", worst_batt));
    o.require(worst_tank < 0.01, fmt("tank first law %.3g", worst_tank));
    o.note(fmt("coil %.2g", worst_coil) + fmt(", battery %.2g", worst_batt) + fmt(", tank %.2g", worst_tank));
    return o;
}

// --- 9: wiring validation -------------------------------------------------------

class Stub final : public core::Module {
public:
    Stub(const char* path, core::ModuleKind kind, std::vector<core::InputDecl> in, std::vector<core::OutputDecl> out)
        : Module(HierPath::parse(path), kind), in_(std::move(in)), out_(std::move(out)) {}
    std::vector<core::InputDecl> inputs() const override { return in_; }
    std::vector<core::OutputDecl> outputs() const override { return out_; }
    void step(core::StepContext&) override {}

private:
    std::vector<core::InputDecl> in_;
    std::vector<core::OutputDecl> out_;
};

bool rejected_with(core::Environment& env, core::WiringViolation::Kind kind) {
    bool found = false;
    for (const auto& v : env.validate_wiring()) found = found || v.kind == kind;
    try {
        env.initialize();
    } catch (const RuntimeError&) {
        return found;
    }
    return false;
}

Outcome wiring() {
    Outcome o;
    using core::ModuleKind;
    const core::SimClock clock(core::parse_timestamp("2024-07-15 00:00"), 900);
    {
        core::Environment env(clock);
        env.emplace<Stub>("c/thermal/fcu1/fan_ctl", ModuleKind::Controller, std::vector<core::InputDecl>{},
                          std::vector<core::OutputDecl>{{"sp", DataKind::Action, core::Unit::None, 0.0}});
        env.emplace<Stub>("c/thermal/fcu1", ModuleKind::Controller,
                          std::vector<core::InputDecl>{{key(HierPath::parse("c/thermal/fcu1/fan_ctl"), "sp",
                                                            DataKind::Action)}},
                          std::vector<core::OutputDecl>{});
        o.require(rejected_with(env, core::WiringViolation::Kind::UpwardAction), "upward action accepted");
    }
    {
        core::Environment env(clock);
        env.emplace<Stub>("c/thermal/hA/zone", ModuleKind::DynamicStateful, std::vector<core::InputDecl>{},
                          std::vector<core::OutputDecl>{{"t_zone", DataKind::State, core::Unit::Celsius, 24.0}});
        env.emplace<Stub>("c/thermal/hB", ModuleKind::Controller,
                          std::vector<core::InputDecl>{{key(HierPath::parse("c/thermal/hA/zone"), "t_zone",
                                                            DataKind::State)}},
                          std::vector<core::OutputDecl>{});
        o.require(rejected_with(env, core::WiringViolation::Kind::ObservationOutOfScope),
                  "out-of-scope observation accepted");
    }
    std::size_t accepted = 0;
    for (const char* name :
         {"s1_fan_tracking", "s2_model_generalization", "s3_house_der", "s3_two_buildings", "s4_cluster5"}) {
        const auto problems = sim::validate_scenario(bundled(name));
        if (problems.empty()) {
            ++accepted;
        } else {
            o.require(false, std::string(name) + ": " + problems.front());
        }
    }
    o.note(std::to_string(accepted) + "/5 bundled scenarios accepted, both adversarial wirings rejected");
    return o;
}

// --- 10: determinism ------------------------------------------------------------

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Outcome determinism() {
    Outcome o;
    const auto cfg = sim::parse_scenario(bundled("s4_cluster5"));
    std::string first;
    for (int run = 0; run < 2; ++run) {
        const auto dir = fs::temp_directory_path() / ("bldgsim_accept_det_" + std::to_string(run));
        fs::remove_all(dir);
        sim::RunOptions opt;
        opt.out_dir = dir.string();
        opt.seed = 4242;
        sim::run_scenario(cfg, opt);
        const auto text = slurp(dir / "timeseries.csv");
        if (run == 0) {
            first = text;
        } else {
            o.require(!first.empty(), "empty timeseries");
            o.require(text == first, "timeseries differ between runs");
            o.note(std::to_string(text.size()) + " bytes identical");
        }
    }
    return o;
}

} // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"fan tracking", fan_tracking},
        {"model generalization", generalization},
        {"zone model training", training},
        {"single house with DER", house_der},
        {"five-building cluster", cluster},
        {"gradient correctness", gradients},
        {"MPC optimality", mpc_optimality},
        {"conservation", conservation},
        {"wiring validation", wiring},
        {"determinism", determinism},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        if (!o.pass) ++failures;
        std::printf("%s criterion %zu: %s (%s)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                    o.detail.c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
