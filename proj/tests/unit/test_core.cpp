#include <cmath>
#include <cstdlib>
#include <sstream>

#include "doctest.h"

#include "bldgsim/core/clock.hpp"
#include "bldgsim/core/csv.hpp"
#include "bldgsim/core/environment.hpp"
#include "bldgsim/core/error.hpp"
#include "bldgsim/core/hier_path.hpp"
#include "bldgsim/core/signal.hpp"

using namespace bldgsim;
using namespace bldgsim::core;

TEST_CASE("hier path parsing and levels") {
    auto p = HierPath::parse("clusterA/thermal/fcu1/fan1");
    CHECK(p.level() == HierLevel::Component);
    CHECK(p.str() == "clusterA/thermal/fcu1/fan1");
    CHECK(p.dotted() == "clusterA.thermal.fcu1.fan1");
    CHECK(p.parent() == HierPath::parse("clusterA/thermal/fcu1"));
    CHECK(HierPath("c").level() == HierLevel::Cluster);
    CHECK(HierPath("c", "water").level() == HierLevel::Domain);
    CHECK(HierPath("c", "water", "h1").child("tank") == HierPath::parse("c/water/h1/tank"));

    CHECK_THROWS_AS(HierPath("c", std::nullopt, "sys"), InvalidArgument);
    CHECK_THROWS_AS(HierPath("c", "plumbing"), InvalidArgument);
    CHECK_THROWS_AS(HierPath::parse("c/thermal/a.b"), InvalidArgument);
    CHECK_THROWS_AS(HierPath::parse(""), InvalidArgument);
    CHECK(HierPath("c").parent() == HierPath("c"));
}

TEST_CASE("subtree membership is by system below the domain level") {
    auto house = HierPath::parse("c/thermal/h1");
    CHECK(house.contains(HierPath::parse("c/thermal/h1/zone")));
    CHECK(house.contains(HierPath::parse("c/electrical/h1/der")));
    CHECK_FALSE(house.contains(HierPath::parse("c/thermal/h2/zone")));
    CHECK_FALSE(house.contains(HierPath::parse("c/thermal")));
    CHECK(HierPath("c").contains(HierPath::parse("c/water/h2/tank")));
    CHECK_FALSE(HierPath("c").contains(HierPath::parse("d/water/h2/tank")));
    CHECK(HierPath("c", "thermal").contains(HierPath::parse("c/thermal/h2")));
    CHECK_FALSE(HierPath("c", "thermal").contains(HierPath::parse("c/water/h2")));
}

TEST_CASE("signal keys and frames") {
    SignalKey k{HierPath::parse("c/electrical/house1"), "power", DataKind::Observation};
    CHECK(k.column_name() == "c.electrical.house1.power.observation");
    CHECK(parse_data_kind("action") == DataKind::Action);
    CHECK_THROWS(parse_data_kind("bogus"));

    SignalFrame f(3);
    f.insert(k, {2.5, Unit::Watt});
    CHECK(f.value(k) == 2.5);
    CHECK_THROWS_AS(f.insert(k, {1.0, Unit::Watt}), RuntimeError);
    CHECK_THROWS_AS(f.set(k, {std::nan(""), Unit::Watt}), RuntimeError);
    f.set(k, {4.0, Unit::Watt});
    CHECK(f.value(k) == 4.0);
    CHECK_THROWS(f.value(SignalKey{HierPath("c"), "x", DataKind::State}));
}

TEST_CASE("units") {
    CHECK(units_compatible(Unit::Celsius, Unit::Kelvin));
    CHECK_FALSE(units_compatible(Unit::Watt, Unit::Celsius));
    CHECK(convert_unit(25.0, Unit::Celsius, Unit::Kelvin) == doctest::Approx(298.15));
    CHECK(convert_unit(300.0, Unit::Kelvin, Unit::Celsius) == doctest::Approx(26.85));
    CHECK(convert_unit(7.0, Unit::Watt, Unit::Watt) == 7.0);
}

TEST_CASE("clock") {
    SimClock c(parse_timestamp("2024-07-15 00:00"), 900);
    CHECK(c.steps_per_day() == 96);
    CHECK(c.is_weekday());   // a Monday
    for (int i = 0; i < 62; ++i) c.advance();
    CHECK(c.hour_of_day() == doctest::Approx(15.5));
    CHECK(format_timestamp(c.now()) == "2024-07-15 15:30");
    CHECK_FALSE(SimClock::is_weekday(parse_timestamp("2024-07-20T10:00")));
    CHECK_THROWS(parse_timestamp("15/07/2024"));
}

TEST_CASE("csv reading") {
    std::istringstream in("a,b\n# note\n1,2\n\n3,x\n");
    auto t = read_csv(in, "mem.csv");
    REQUIRE(t.rows.size() == 2);
    CHECK(t.line_numbers[1] == 5);
    CHECK(t.number(0, t.require_column("b")) == 2.0);
    CHECK_THROWS_WITH_AS(t.number(1, 1), doctest::Contains("mem.csv:5"), ParseError);
    CHECK_THROWS_AS(t.require_column("zz"), ParseError);

    std::istringstream ragged("a,b\n1\n");
    CHECK_THROWS_AS(read_csv(ragged), ParseError);
}

TEST_CASE("format_double round-trips") {
    for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 1e21, 42.0}) {
        CHECK(std::strtod(format_double(v).c_str(), nullptr) == v);
    }
}

TEST_CASE("aggregate and disaggregate") {
    SignalFrame f;
    auto hvac = SignalKey{HierPath::parse("c/thermal/h1/fcu"), "power", DataKind::Observation};
    auto plug = SignalKey{HierPath::parse("c/electrical/h1/plug"), "power", DataKind::Observation};
    auto light = SignalKey{HierPath::parse("c/electrical/h1/light"), "power", DataKind::Observation};
    f.insert(hvac, {1693.2, Unit::Watt});
    f.insert(plug, {220.0, Unit::Watt});
    f.insert(light, {150.0, Unit::Watt});
    CHECK(aggregate(f, HierPath::parse("c/electrical/h1"), "power", DataKind::Observation) ==
          doctest::Approx(2063.2).epsilon(1e-12));
    CHECK(aggregate(f, HierPath::parse("c/thermal/h1/fcu"), "power", DataKind::Observation) == 1693.2);
    CHECK(aggregate(f, HierPath::parse("c/electrical/h1"), "power", DataKind::Observation, AggregationFn::Mean) ==
          doctest::Approx(2063.2 / 3.0));
    CHECK_THROWS_AS(aggregate(f, HierPath::parse("c/thermal/h9"), "power", DataKind::Observation), RuntimeError);

    f.insert({HierPath::parse("c/electrical/h1"), "power", DataKind::Observation}, {2063.2, Unit::Watt, true});
    CHECK(aggregate(f, HierPath("c"), "power", DataKind::Observation) == doctest::Approx(2063.2));

    const double w11[] = {1.0, 1.0};
    auto a = disaggregate(100.0, w11);
    CHECK(a[0] == 50.0);
    CHECK(a[1] == 50.0);
    const double w21[] = {2.0, 1.0};
    auto b = disaggregate(90.0, w21);
    CHECK(b[0] == doctest::Approx(60.0));
    CHECK(b[1] == doctest::Approx(30.0));
    const double w00[] = {0.0, 0.0};
    CHECK_THROWS_AS(disaggregate(1.0, w00), InvalidArgument);
}
