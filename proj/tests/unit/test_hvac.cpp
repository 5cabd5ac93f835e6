#include <cmath>

#include "doctest.h"

#include "bldgsim/core/error.hpp"
#include "bldgsim/hvac/components.hpp"
#include "bldgsim/hvac/fcu.hpp"

using namespace bldgsim;
using namespace bldgsim::hvac;
using doctest::Approx;

TEST_CASE("fans follow the cube law") {
    FanSpec vfd{FanKind::Vfd, 1.0, 500.0};
    auto r = fan_step(vfd, 0.6);
    CHECK(r.flow == 0.6);
    CHECK(r.power == Approx(108.0).epsilon(1e-12));

    FanSpec constant{FanKind::Constant, 1.0, 500.0};
    r = fan_step(constant, 0.6);
    CHECK(r.flow == 1.0);
    CHECK(r.power == 500.0);
    CHECK(fan_step(constant, 0.0).power == 0.0);

    FanSpec staged{FanKind::Staged, 1.0, 500.0, {0.0, 0.5, 1.0}};
    r = fan_step(staged, 0.6);
    CHECK(r.flow == 0.5);
    CHECK(r.power == Approx(62.5).epsilon(1e-12));
    CHECK(fan_step(staged, 0.75).flow == 0.5);   // midpoint rounds down

    FanSpec turndown{FanKind::Vfd, 1.0, 500.0, {}, 0.3};
    CHECK(fan_step(turndown, 0.1).flow == 0.3);
    CHECK(fan_step(turndown, 0.0).flow == 0.0);
    CHECK_THROWS_AS(fan_step(vfd, -0.1), InvalidArgument);
}

TEST_CASE("pumps") {
    PumpSpec p{FanKind::Vfd, 0.25, 200.0};
    auto r = pump_step(p, 0.2);
    CHECK(r.flow == 0.2);
    CHECK(r.power == Approx(102.4).epsilon(1e-12));
    r = pump_step(p, 0.0);
    CHECK(r.flow == 0.0);
    CHECK(r.power == 0.0);
    r = pump_step(p, 0.5);
    CHECK(r.flow == 0.25);
    CHECK(r.power == Approx(200.0).epsilon(1e-12));
}

TEST_CASE("fan spec validation") {
    FanSpec s{FanKind::Staged, 1.0, 100.0, {0.5, 1.0}};
    CHECK_THROWS_AS(s.validate(), InvalidArgument);
    s.stages = {0.0, 1.0, 0.5};
    CHECK_THROWS_AS(s.validate(), InvalidArgument);
    FanSpec v{FanKind::Vfd, 1.0, 100.0, {}, 1.0};
    CHECK_THROWS_AS(v.validate(), InvalidArgument);
}

TEST_CASE("effectiveness coil") {
    CoilSpec c;
    auto r = coil_step(c, 0.5, 26.0, 0.2, 7.0);
    // C_min is the air side: 0.5 * 1006 = 503 W/K
    CHECK(r.q == Approx(0.8 * 503.0 * 19.0).epsilon(1e-12));
    CHECK(r.q == Approx(7645.6).epsilon(1e-12));
    CHECK(r.t_air_out == Approx(10.8).epsilon(1e-12));
    CHECK(r.t_water_out == Approx(7.0 + 7645.6 / (0.2 * 4186.0)).epsilon(1e-12));
    CHECK(r.t_water_out == Approx(16.1324).epsilon(1e-5));

    r = coil_step(c, 0.5, 12.0, 0.2, 12.0);
    CHECK(r.q == 0.0);
    CHECK(r.t_air_out == 12.0);
    r = coil_step(c, 0.5, 26.0, 0.0, 7.0);
    CHECK(r.q == 0.0);
    CHECK(r.t_air_out == 26.0);
    CHECK(r.t_water_out == 7.0);
    CHECK(coil_step(c, 0.5, 15.0, 0.2, 45.0).q < 0.0);   // heating coil
}

TEST_CASE("chiller") {
    ChillerSpec s;
    auto r = chiller_step(s, 7645.6, 7.0, 35.0);
    CHECK(r.cop == Approx(0.5 * 280.15 / 28.0).epsilon(1e-12));
    CHECK(r.cop == Approx(5.00268).epsilon(1e-6));
    CHECK(r.p_elec == Approx(1528.30).epsilon(1e-5));
    CHECK_THROWS_AS(chiller_step(s, 100.0, 35.0, 35.0), InvalidArgument);
    CHECK_THROWS_AS(chiller_step(s, -1.0, 7.0, 35.0), InvalidArgument);
    r = chiller_step(s, 50000.0, 7.0, 35.0);
    CHECK(r.q_met == s.capacity);

    ChillerSpec curve;
    curve.mode = ChillerMode::Curve;
    curve.capacity = 10000.0;
    CHECK(chiller_step(curve, 10000.0, 7.0, 35.0).cop == Approx(5.0).epsilon(1e-12));
    r = chiller_step(curve, 5000.0, 7.0, 35.0);
    CHECK(r.cop == Approx(4.0).epsilon(1e-12));
    CHECK(r.p_elec == Approx(1250.0).epsilon(1e-12));
    curve.plr_coeffs = {0.2, 1.6, -0.7};
    CHECK_THROWS_AS(curve.validate(), InvalidArgument);
}

TEST_CASE("cooling tower") {
    CoolingTowerSpec s;
    auto r = cooling_tower_step(s, 1.0, 35.0, 24.0);
    CHECK(r.t_cws == Approx(27.3).epsilon(1e-12));
    CHECK(r.p_fan == s.fan_power);
    CHECK(cooling_tower_step(s, 1.0, 24.0, 24.0).t_cws == 24.0);
    r = cooling_tower_step(s, 0.0, 35.0, 24.0);
    CHECK(r.t_cws == 35.0);
    CHECK(r.p_fan == 0.0);
}

TEST_CASE("boiler") {
    BoilerSpec s;
    auto r = boiler_step(s, 10000.0, 0.2, 40.0);
    CHECK(r.q_delivered == Approx(9000.0));
    CHECK(r.t_out == Approx(40.0 + 9000.0 / (0.2 * 4186.0)).epsilon(1e-12));
    CHECK(r.t_out == Approx(50.75).epsilon(1e-4));
    CHECK(boiler_step(s, 0.0, 0.2, 40.0).t_out == 40.0);
    CHECK(boiler_step(s, 10000.0, 0.0, 40.0).q_delivered == 0.0);
}

TEST_CASE("heat pump") {
    HeatPumpSpec s;
    auto r = heat_pump_step(s, 5000.0, 5.0, 45.0, HeatPumpMode::Heating);
    CHECK(r.cop == Approx(0.45 * 318.15 / 40.0).epsilon(1e-12));
    CHECK(r.cop == Approx(3.579).epsilon(1e-3));
    CHECK(r.p_elec == Approx(1397.0).epsilon(1e-3));
    CHECK(heat_pump_step(s, 0.0, 5.0, 45.0, HeatPumpMode::Heating).p_elec == 0.0);
    CHECK_THROWS_AS(heat_pump_step(s, 100.0, 20.0, 20.0, HeatPumpMode::Heating), InvalidArgument);
    r = heat_pump_step(s, 3000.0, 35.0, 7.0, HeatPumpMode::Cooling);
    CHECK(r.cop == Approx(0.45 * 280.15 / 28.0).epsilon(1e-12));
}

TEST_CASE("ice storage") {
    IceStorageSpec s;
    auto r = ice_storage_step(s, {50.0}, 10000.0, 0.0, 900.0);
    CHECK(r.next.energy_kwh == Approx(52.45).epsilon(1e-12));
    CHECK(r.charge_accepted == 10000.0);
    r = ice_storage_step(s, {0.0}, 0.0, 5000.0, 900.0);
    CHECK(r.discharge_delivered == 0.0);
    r = ice_storage_step(s, {99.9}, 10000.0, 0.0, 900.0);
    CHECK(r.next.energy_kwh == Approx(100.0).epsilon(1e-12));
    CHECK(r.charge_accepted < 10000.0);
    CHECK_THROWS_AS(ice_storage_step(s, {10.0}, 1.0, 1.0, 900.0), InvalidArgument);
}

TEST_CASE("fan coil unit composition") {
    FcuAssembly a;
    a.fan = {FanKind::Staged, 1.0, 500.0, {0.0, 0.5, 1.0}};
    auto out = fcu_compose(a, 0.6, 0.2, 26.0);
    CHECK(out.v_sa == 0.5);
    CHECK(out.t_sa == Approx(10.8).epsilon(1e-12));
    CHECK(out.q_zone == Approx(-7645.6).epsilon(1e-12));
    CHECK(out.p_fan == Approx(62.5));
    CHECK(out.p_pump == Approx(102.4));
    CHECK(out.p_chiller == Approx(1528.30).epsilon(1e-5));
    CHECK(out.p_total == Approx(1693.2).epsilon(1e-4));
    CHECK(out.p_total == Approx(out.p_fan + out.p_pump + out.p_chiller + out.p_tower).epsilon(1e-14));

    auto off = fcu_system_step(a, {13.0, 0.0}, 26.0);
    CHECK(off.q_zone == 0.0);
    CHECK(off.p_total == 0.0);
}

TEST_CASE("fan coil unit supply air loop") {
    FcuAssembly a;
    a.fan = {FanKind::Vfd, 1.0, 500.0};
    SUBCASE("feasible setpoint within tolerance") {
        auto out = fcu_system_step(a, {14.0, 0.5}, 26.0);
        CHECK(std::abs(out.t_sa - 14.0) <= a.tolerance);
        CHECK(out.iterations <= a.max_iterations);
        CHECK(out.q_zone == Approx(0.5 * kCpAir * (out.t_sa - 26.0)).epsilon(1e-12));
    }
    SUBCASE("infeasible setpoint saturates the pump") {
        auto out = fcu_system_step(a, {5.0, 0.5}, 26.0);
        CHECK(out.t_sa > 5.0);
        CHECK(out.m_water == Approx(a.pump.rated_flow));
    }
    SUBCASE("cooling tower raises the condenser side with the wet bulb") {
        a.tower = CoolingTowerSpec{};
        auto cool = fcu_system_step(a, {13.0, 0.5}, 26.0, 15.0);
        auto warm = fcu_system_step(a, {13.0, 0.5}, 26.0, 25.0);
        CHECK(cool.p_tower > 0.0);
        CHECK(cool.cop > warm.cop);
    }
}
