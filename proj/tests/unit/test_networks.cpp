#include <cmath>

#include "doctest.h"

#include "bldgsim/building/networks.hpp"
#include "bldgsim/core/error.hpp"
#include "bldgsim/hvac/components.hpp"

using namespace bldgsim;
using namespace bldgsim::building;
using doctest::Approx;

namespace {

ElectricalNetworkSpec house_loads() {
    ElectricalNetworkSpec s;
    s.base_load = 100.0;
    s.appliances = {{"tv", 120.0}, {"cooking", 1500.0}};
    s.lighting_power = 150.0;
    return s;
}

} // namespace

TEST_CASE("electrical breakdown") {
    auto s = house_loads();
    auto b = electrical_breakdown(s, {{"tv", true}, {"cooking", false}}, true);
    CHECK(b.total() == 370.0);
    CHECK(b.plug == 120.0);
    CHECK(b.lighting == 150.0);
    CHECK(b.per_appliance.at("cooking") == 0.0);

    CHECK(electrical_demand(s, {{"tv", false}, {"cooking", false}, {"lighting", false}}, false) == 100.0);
    CHECK(electrical_demand(s, {{"lighting", false}}, true) == 100.0);
    s.base_load = 0.0;
    CHECK(electrical_demand(s, {}, false) == 0.0);
    CHECK_THROWS_AS(electrical_demand(s, {{"sauna", true}}, true), InvalidArgument);
}

TEST_CASE("hot water demand") {
    std::map<std::string, double> draws = {{"shower", 0.02}, {"sink", 0.005}};
    CHECK(dhw_demand({{"shower", true}}, draws) == 0.02);
    CHECK(dhw_demand({}, draws) == 0.0);
    CHECK(dhw_demand({{"shower", true}, {"sink", true}, {"tv", true}}, draws) == Approx(0.025));
}

TEST_CASE("water tank") {
    WaterTankSpec s;
    const double mc = 200.0 * hvac::kCpWater;
    auto r = water_tank_step(s, {55.0}, false, 0.0, 900.0);
    CHECK(r.next.t_tank == Approx(55.0 - 70.0 * 900.0 / mc).epsilon(1e-14));
    CHECK(r.next.t_tank == Approx(54.9247).epsilon(1e-6));
    CHECK(r.p_heater == 0.0);

    r = water_tank_step(s, {55.0}, false, 0.02, 900.0);
    CHECK(r.next.t_tank == Approx(55.0 - (70.0 + 0.02 * hvac::kCpWater * 45.0) * 900.0 / mc).epsilon(1e-14));
    CHECK(r.next.t_tank == Approx(50.875).epsilon(1e-5));

    r = water_tank_step(s, {55.0}, true, 0.0, 900.0);
    CHECK(r.next.t_tank == Approx(55.0 + 4430.0 * 900.0 / mc).epsilon(1e-14));
    CHECK(r.next.t_tank == Approx(59.762).epsilon(1e-5));
    CHECK(r.p_heater == 4500.0);

    auto half = water_tank_step(s, {55.0}, 0.5, 0.0, 900.0);
    CHECK(half.p_heater == 2250.0);
    CHECK_THROWS_AS(water_tank_step(s, {55.0}, 1.5, 0.0, 900.0), InvalidArgument);
    CHECK_THROWS_AS(water_tank_step(s, {55.0}, false, 20.0, 900.0), InvalidArgument);
}

TEST_CASE("building step composes zone, loads and tank") {
    BuildingSpec b;
    b.electrical.base_load = 0.0;
    b.electrical.appliances = {{"tv", 70.0}, {"cooking", 150.0}};
    b.electrical.lighting_power = 150.0;
    b.tank = WaterTankSpec{};
    b.draws = {{"shower", 0.02}};

    BuildingInputs in;
    in.t_out = 30.0;
    in.occupancy.occupied = true;
    in.occupancy.occupants = 2.0;
    in.occupancy.activity = {{"tv", true}, {"cooking", true}, {"shower", false}};
    in.q_hvac = -7645.6;
    in.p_hvac = 1693.2;
    auto out = building_step(b, {24.0, {55.0}}, in);
    CHECK(out.loads.total() == 370.0);
    CHECK(out.p_total == Approx(2063.2).epsilon(1e-14));

    in.heater_on = true;
    out = building_step(b, {24.0, {55.0}}, in);
    CHECK(out.p_total == Approx(2063.2 + 4500.0).epsilon(1e-14));
    const double q_int = 2.0 * b.rc.gain_per_occupant;
    CHECK(out.next.t_zone ==
          Approx(24.0 + 900.0 / b.rc.capacitance * (6.0 / b.rc.resistance + q_int - 7645.6)).epsilon(1e-14));

    SUBCASE("everything off at equilibrium is a fixed point") {
        BuildingSpec quiet;
        quiet.electrical.base_load = 0.0;
        quiet.electrical.lighting_power = 0.0;
        BuildingInputs calm;
        calm.t_out = 22.0;
        auto o = building_step(quiet, {22.0, {55.0}}, calm);
        CHECK(o.next.t_zone == 22.0);
        CHECK(o.next.tank.t_tank == 55.0);
        CHECK(o.p_total == 0.0);
    }
}
