// Randomized invariants. Each case draws from a fixed seed.
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <numeric>
#include <random>

#include "doctest.h"

#include "bldgsim/building/networks.hpp"
#include "bldgsim/control/controllers.hpp"
#include "bldgsim/core/clock.hpp"
#include "bldgsim/core/csv.hpp"
#include "bldgsim/core/environment.hpp"
#include "bldgsim/der/battery.hpp"
#include "bldgsim/der/ev.hpp"
#include "bldgsim/der/pv.hpp"
#include "bldgsim/hvac/components.hpp"
#include "bldgsim/thermal/zone_model.hpp"

using namespace bldgsim;

namespace {

std::mt19937_64& rng() {
    static std::mt19937_64 g(0xb1d95eed);
    return g;
}

double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng()); }

} // namespace

TEST_CASE("property: battery SOC stays within bounds for any request stream") {
    for (int trial = 0; trial < 50; ++trial) {
        der::BatteryParams p;
        p.capacity_kwh = uniform(2.0, 20.0);
        p.soc_min = uniform(0.0, 0.3);
        p.soc_max = uniform(0.7, 1.0);
        p.eta_charge = uniform(0.8, 1.0);
        p.eta_discharge = uniform(0.8, 1.0);
        p.k_cycle = 1e-3;
        der::BatteryState s{uniform(p.soc_min, p.soc_max), 1.0};
        for (int k = 0; k < 500; ++k) {
            auto r = der::battery_step(p, s, uniform(-20000.0, 20000.0), uniform(-20.0, 50.0), 900.0);
            CHECK(r.next.soc >= p.soc_min);
            CHECK(r.next.soc <= p.soc_max);
            CHECK(std::abs(r.p_actual) <= std::max(p.p_max_charge, p.p_max_discharge));
            s = r.next;
            s.soh = der::battery_degradation_step(p, s.soh, std::abs(r.cell_kwh), 900.0);
            CHECK(s.soh >= p.soh_min);
        }
    }
}

TEST_CASE("property: EV energy bookkeeping closes") {
    for (int trial = 0; trial < 20; ++trial) {
        der::EvParams p;
        p.battery.capacity_kwh = uniform(30.0, 80.0);
        p.v2g = trial % 2 == 0;
        auto day = core::parse_timestamp("2024-07-15 00:00");
        for (int d = 0; d < 5; ++d) {
            const auto base = day + std::chrono::hours(24 * d);
            p.schedule.push_back({base + std::chrono::hours(18), base + std::chrono::hours(31), uniform(0.0, 25.0),
                                  0.7});
        }
        der::EvState s;
        s.battery.soc = uniform(0.2, 0.9);
        const double soc0 = s.battery.soc;
        double cell = 0.0, trips = 0.0;
        for (int k = 0; k < 5 * 96; ++k) {
            auto r = der::ev_step(p, s, uniform(-7000.0, 7000.0), day + std::chrono::minutes(15 * k), 900.0);
            CHECK(r.next.battery.soc >= p.battery.soc_min);
            CHECK(r.next.battery.soc <= p.battery.soc_max);
            if (!r.available) CHECK(r.p_actual == 0.0);
            cell += r.cell_kwh;
            trips += r.trip_kwh;
            s = r.next;
        }
        const double lhs = (s.battery.soc - soc0) * p.battery.capacity_kwh;
        const double rhs = cell - trips;
        CHECK(std::abs(lhs - rhs) <= 1e-9 * std::max({1.0, std::abs(cell), trips}));
    }
}

TEST_CASE("property: coil energy balance") {
    hvac::CoilSpec c;
    for (int i = 0; i < 2000; ++i) {
        c.effectiveness = uniform(0.05, 1.0);
        const double ma = uniform(0.01, 3.0), mw = uniform(0.01, 3.0);
        const double ta = uniform(-10.0, 40.0), tw = uniform(2.0, 60.0);
        auto r = hvac::coil_step(c, ma, ta, mw, tw);
        const double air = ma * c.cp_air * (ta - r.t_air_out);
        const double water = mw * c.cp_water * (r.t_water_out - tw);
        CHECK(std::abs(air - water) <= 1e-9 * std::max(1.0, std::abs(r.q)));
        // Outlets never cross the opposite inlet.
        if (ta >= tw) CHECK(r.t_air_out >= tw - 1e-12);
        else CHECK(r.t_air_out <= tw + 1e-12);
    }
}

TEST_CASE("property: fan power is monotone in the setpoint and below rated") {
    hvac::FanSpec vfd{hvac::FanKind::Vfd, 1.2, 600.0, {}, 0.15};
    hvac::FanSpec staged{hvac::FanKind::Staged, 1.2, 600.0, {0.0, 0.3, 0.6, 1.0}};
    double prev_v = 0.0, prev_s = 0.0;
    for (int i = 0; i <= 300; ++i) {
        const double sp = 0.005 * i;
        auto a = hvac::fan_step(vfd, sp);
        auto b = hvac::fan_step(staged, sp);
        CHECK(a.power >= prev_v);
        CHECK(b.power >= prev_s);
        CHECK(a.power <= 600.0 + 1e-12);
        CHECK(a.flow <= 1.2);
        prev_v = a.power;
        prev_s = b.power;
    }
}

TEST_CASE("property: PV output is nonnegative and monotone in irradiance at fixed cell temperature") {
    der::PvSpec s;
    s.k_t = 0.0;
    for (int i = 0; i < 500; ++i) {
        const double t = uniform(-20.0, 45.0);
        const double g1 = uniform(0.0, 1200.0), g2 = uniform(0.0, 1200.0);
        const double p1 = der::pv_power(s, g1, t), p2 = der::pv_power(s, g2, t);
        CHECK(p1 >= 0.0);
        if (g1 < g2) CHECK(p1 <= p2);
    }
}

TEST_CASE("property: PV waterfall conserves power and respects priority") {
    for (int i = 0; i < 2000; ++i) {
        const double pv = uniform(0.0, 10000.0), load = uniform(0.0, 6000.0);
        const double ev = uniform(0.0, 7000.0), batt = uniform(0.0, 5000.0);
        auto s = control::pv_allocation(pv, load, ev, batt);
        CHECK(s.to_building + s.to_ev + s.to_battery + s.curtailed == doctest::Approx(pv).epsilon(1e-12));
        if (s.to_ev > 0.0) CHECK(s.to_building == load);
        if (s.to_battery > 0.0) CHECK(s.to_ev == ev);
        if (s.curtailed > 0.0) CHECK(s.to_battery == batt);
    }
}

TEST_CASE("property: disaggregation and peak coordination") {
    for (int i = 0; i < 500; ++i) {
        std::vector<double> loads(1 + i % 6);
        for (auto& l : loads) l = uniform(0.0, 8000.0);
        const double cap = uniform(500.0, 30000.0);
        auto r = control::cluster_peak_coordinator(loads, cap);
        const double total = std::accumulate(r.commanded.begin(), r.commanded.end(), 0.0);
        CHECK(total <= std::max(cap, std::accumulate(loads.begin(), loads.end(), 0.0)) * (1 + 1e-12));
        for (std::size_t k = 0; k < loads.size(); ++k) CHECK(r.commanded[k] <= loads[k] + 1e-9);
        if (r.curtailed) CHECK(total == doctest::Approx(cap).epsilon(1e-12));

        const double t = uniform(-100.0, 100.0);
        auto parts = core::disaggregate(t, loads);
        CHECK(std::accumulate(parts.begin(), parts.end(), 0.0) == doctest::Approx(t).epsilon(1e-12));
    }
}

TEST_CASE("property: deadband never switches inside the band") {
    control::DeadbandConfig c;
    c.switch_margin = 0.3;
    for (int i = 0; i < 2000; ++i) {
        const double t = uniform(20.0, 28.0);
        const bool prev = i % 2 == 0;
        const bool next = control::onoff_deadband(c, t, prev);
        if (t < c.setpoint + c.half_band - c.switch_margin && t > c.setpoint - c.half_band + c.switch_margin) {
            CHECK(next == prev);
        }
    }
}

TEST_CASE("property: tank temperature stays between inlet and maximum") {
    building::WaterTankSpec s;
    building::WaterTankState t{55.0};
    for (int k = 0; k < 5000; ++k) {
        t = building::water_tank_step(s, t, uniform(0.0, 1.0), uniform(0.0, 0.05), 900.0).next;
        CHECK(t.t_tank >= s.t_inlet);
        CHECK(t.t_tank <= s.t_max);
    }
}

TEST_CASE("property: sign-constrained zone model is monotone in heat input") {
    thermal::PhysicsModelConfig cfg;
    cfg.head = thermal::HeadKind::Mlp;
    for (unsigned seed = 1; seed <= 20; ++seed) {
        cfg.init_seed = seed;
        thermal::PhysicsZoneModel m(900.0, {"cooking"}, cfg);
        for (auto& p : m.params()) p += uniform(-1.0, 1.0);
        for (int i = 0; i < 50; ++i) {
            thermal::Exogenous x{uniform(15.0, 38.0), uniform(0.0, 900.0), uniform(0.0, 4.0), {uniform(0.0, 1.0)}};
            const double t = uniform(18.0, 30.0);
            const double q1 = uniform(-8000.0, 0.0), q2 = uniform(-8000.0, 0.0);
            if (q1 < q2) CHECK(m.step(t, x, q1) <= m.step(t, x, q2));
            if (x.t_out > t) CHECK(m.step(t, x, 0.0) >= t);
        }
    }
}

TEST_CASE("property: hierarchy paths round trip and containment is transitive") {
    const char* ids[] = {"a", "b", "h1", "fcu"};
    const char* domains[] = {"thermal", "electrical", "water"};
    for (int i = 0; i < 300; ++i) {
        auto pick = [&](int n) { return static_cast<std::size_t>(uniform(0.0, n - 1e-9)); };
        core::HierPath p(ids[pick(2)], std::string(domains[pick(3)]), std::string(ids[pick(4)]),
                         std::string(ids[pick(4)]));
        CHECK(core::HierPath::parse(p.str()) == p);
        for (auto q = p; q.level() != core::HierLevel::Cluster; q = q.parent()) {
            CHECK(q.parent().contains(q));
            CHECK(q.parent().contains(p));
        }
    }
}

TEST_CASE("property: format_double round-trips random doubles") {
    std::uniform_int_distribution<std::uint64_t> bits;
    int checked = 0;
    while (checked < 5000) {
        const std::uint64_t b = bits(rng());
        double v;
        std::memcpy(&v, &b, sizeof v);
        if (!std::isfinite(v)) continue;
        CHECK(std::strtod(core::format_double(v).c_str(), nullptr) == v);
        ++checked;
    }
}
