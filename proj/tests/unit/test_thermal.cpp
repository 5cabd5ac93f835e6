#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <sstream>

#include "doctest.h"

#include "bldgsim/core/error.hpp"
#include "bldgsim/thermal/rc_zone.hpp"
#include "bldgsim/thermal/trace.hpp"
#include "bldgsim/thermal/training.hpp"
#include "bldgsim/thermal/zone_model.hpp"

using namespace bldgsim;
using namespace bldgsim::thermal;

namespace {

RcZoneSpec house() {
    RcZoneSpec s;
    s.capacitance = 1e7;
    s.resistance = 0.002;
    s.solar_aperture = 1.5;
    s.gain_per_occupant = 100.0;
    s.activity_gains = {{"cooking", 800.0}};
    return s;
}

// Hand-built summer day: sinusoidal outdoor air, a noon sun, evening cooking.
ThermalTrace summer_day(double q_hvac) {
    ThermalTrace tr;
    tr.dt = 900.0;
    tr.activity_names = {"cooking"};
    tr.activity.resize(1);
    for (int k = 0; k < 96; ++k) {
        const double h = k * 0.25;
        tr.t_zone.push_back(24.0);
        tr.t_out.push_back(28.0 + 4.0 * std::sin(2.0 * M_PI * (h - 9.0) / 24.0));
        tr.ghi.push_back(std::max(0.0, 800.0 * std::sin(M_PI * (h - 6.0) / 12.0)));
        tr.occupancy.push_back(h < 8.0 || h >= 17.0 ? 2.0 : 0.0);
        tr.q_hvac.push_back(q_hvac);
        tr.activity[0].push_back(h >= 18.0 && h < 19.0 ? 1.0 : 0.0);
    }
    return tr;
}

} // namespace

TEST_CASE("RC ground truth step") {
    RcZoneSpec s;
    s.capacitance = 1e7;
    s.resistance = 0.002;
    // dT = 900/1e7 * (8/0.002 + 300 + 200 - 3000) = 9e-5 * 1500
    CHECK(rc_ground_truth_step(s, 24.0, 32.0, 300.0, 200.0, -3000.0, 900.0) == doctest::Approx(24.135).epsilon(1e-12));
    CHECK(rc_ground_truth_step(s, 24.0, 32.0, 300.0, 200.0, 0.0, 900.0) == doctest::Approx(24.405).epsilon(1e-12));
    CHECK(rc_ground_truth_step(s, 21.0, 21.0, 0.0, 0.0, 0.0, 900.0) == 21.0);
    s.capacitance = -1.0;
    CHECK_THROWS_AS(s.validate(), InvalidArgument);
}

TEST_CASE("internal gains") {
    auto s = house();
    std::vector<std::string> names = {"cooking", "unknown"};
    std::vector<double> act = {1.0, 1.0};
    CHECK(s.internal_gain(3.0, names, act) == 1100.0);
    CHECK(s.solar_gain(400.0) == 600.0);
}

TEST_CASE("physics model built from RC parameters reproduces the oracle") {
    auto spec = house();
    auto m = PhysicsZoneModel::from_rc(spec, 900.0, {"cooking"});
    Exogenous x{32.0, 200.0 / spec.solar_aperture, 3.0, {0.0}};
    const double rc = rc_ground_truth_step(spec, 24.0, 32.0, 300.0, 200.0, -3000.0, 900.0);
    CHECK(std::abs(m.step(24.0, x, -3000.0) - rc) < 1e-10);

    SUBCASE("no heat flow keeps the temperature") {
        Exogenous calm{24.0, 0.0, 0.0, {0.0}};
        CHECK(m.step(24.0, calm, 0.0) == doctest::Approx(24.0).epsilon(1e-14));
    }
    SUBCASE("cooling lowers the next temperature") {
        CHECK(m.step(24.0, x, -3000.0) < m.step(24.0, x, 0.0));
    }
    SUBCASE("96-step rollout matches the iterated oracle") {
        auto day = summer_day(-1500.0);
        auto ex = exogenous_series(day, 0, 96);
        auto pred = rollout_predict(m, 24.0, ex, day.q_hvac);
        REQUIRE(pred.size() == 97);
        double t = 24.0;
        for (std::size_t k = 0; k < 96; ++k) {
            const double q_int = spec.internal_gain(day.occupancy[k], day.activity_names, day.activity_at(k));
            t = rc_ground_truth_step(spec, t, day.t_out[k], q_int, spec.solar_gain(day.ghi[k]), day.q_hvac[k], 900.0);
            CHECK(std::abs(pred[k + 1] - t) < 1e-8);
        }
    }
    SUBCASE("empty horizon") {
        auto pred = rollout_predict(m, 23.0, std::span<const Exogenous>{}, std::span<const double>{});
        CHECK(pred == std::vector<double>{23.0});
    }
    SUBCASE("equilibrium is a fixed point") {
        std::vector<Exogenous> ex(20, Exogenous{26.0, 0.0, 0.0, {0.0}});
        std::vector<double> q(20, 0.0);
        for (double t : rollout_predict(m, 26.0, ex, q)) CHECK(t == doctest::Approx(26.0).epsilon(1e-14));
    }
}

TEST_CASE("taped step matches the double step") {
    PhysicsModelConfig mlp;
    mlp.head = HeadKind::Mlp;
    std::vector<std::unique_ptr<ZoneModel>> models;
    models.push_back(std::make_unique<PhysicsZoneModel>(900.0, std::vector<std::string>{"cooking"}));
    models.push_back(std::make_unique<PhysicsZoneModel>(900.0, std::vector<std::string>{"cooking"}, mlp));
    models.push_back(std::make_unique<BaselineZoneModel>(900.0, std::vector<std::string>{"cooking"}, 6));
    Exogenous x{31.0, 350.0, 2.0, {1.0}};
    for (auto& m : models) {
        ad::Tape tape(m->params());
        std::vector<ad::Var> p;
        for (std::size_t i = 0; i < m->params().size(); ++i) p.push_back(tape.param(i));
        ad::Var t = m->step(p, tape.constant(24.5), x, tape.constant(-2000.0), nullptr);
        CHECK(t.value() == doctest::Approx(m->step(24.5, x, -2000.0)).epsilon(1e-13));
    }
}

TEST_CASE("trace csv round trip and validation") {
    auto tr = summer_day(-500.0);
    std::stringstream ss;
    write_trace_csv(ss, tr);
    auto path = (std::filesystem::temp_directory_path() / "bldgsim_trace_rt.csv").string();
    {
        std::FILE* f = std::fopen(path.c_str(), "w");
        std::fputs(ss.str().c_str(), f);
        std::fclose(f);
    }
    auto back = read_trace_csv(path, 900.0);
    CHECK(back.t_zone == tr.t_zone);
    CHECK(back.t_out == tr.t_out);
    CHECK(back.ghi == tr.ghi);
    CHECK(back.activity_names == tr.activity_names);
    CHECK(back.activity == tr.activity);
    std::filesystem::remove(path);

    auto bad = tr;
    bad.t_zone[3] = 80.0;
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
    bad = tr;
    bad.ghi.pop_back();
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
    auto part = tr.slice(10, 20);
    CHECK(part.size() == 10);
    CHECK(part.t_out[0] == tr.t_out[10]);
}

TEST_CASE("model files round trip") {
    PhysicsModelConfig mlp;
    mlp.head = HeadKind::Mlp;
    mlp.hidden = 4;
    std::vector<std::unique_ptr<ZoneModel>> models;
    models.push_back(std::make_unique<PhysicsZoneModel>(
        PhysicsZoneModel::from_rc(house(), 900.0, {"cooking"})));
    models.push_back(std::make_unique<PhysicsZoneModel>(900.0, std::vector<std::string>{"cooking"}, mlp));
    models.push_back(std::make_unique<BaselineZoneModel>(900.0, std::vector<std::string>{"cooking"}, 5));
    Exogenous x{30.0, 500.0, 1.0, {1.0}};
    for (const auto& m : models) {
        std::stringstream ss;
        m->write(ss);
        auto back = read_zone_model(ss);
        CHECK(back->kind() == m->kind());
        CHECK(back->params() == m->params());
        CHECK(back->step(25.0, x, -1000.0) == m->step(25.0, x, -1000.0));
    }
    std::istringstream junk("not a model\n");
    CHECK_THROWS_AS(read_zone_model(junk), ParseError);
}

TEST_CASE("physics violation metric") {
    auto day = summer_day(0.0);
    SUBCASE("sign-constrained model never violates") {
        PhysicsZoneModel m(900.0, {"cooking"});
        auto r = physics_violation_metric(m, day);
        CHECK(r.qualifying > 0);
        CHECK(r.violating == 0);
        CHECK(r.fraction == 0.0);
    }
    SUBCASE("no qualifying steps") {
        auto cold = day;
        for (auto& t : cold.t_out) t = 10.0;
        PhysicsZoneModel m(900.0, {"cooking"});
        auto r = physics_violation_metric(m, cold);
        CHECK(r.qualifying == 0);
        CHECK(r.fraction == 0.0);
    }
}

TEST_CASE("training on RC oracle data") {
    RcTraceConfig cfg;
    cfg.days = 21;
    cfg.seed = 5;
    auto spec = RcZoneSpec{};
    auto tr = generate_rc_trace(spec, cfg);
    CHECK(tr.size() == 21 * 96);
    auto train_part = tr.slice(0, 14 * 96);
    auto test_part = tr.slice(14 * 96, 21 * 96);

    SUBCASE("zero epochs leaves the parameters and records one loss") {
        PhysicsZoneModel m(900.0, tr.activity_names);
        TrainConfig tc;
        tc.epochs = 0;
        tc.warm_start = false;
        tc.fit_normalization = false;
        auto before = m.params();
        auto r = train(m, train_part, tc);
        CHECK(r.loss_history.size() == 1);
        CHECK(m.params() == before);
    }
    SUBCASE("held-out rollout error is small") {
        PhysicsZoneModel m(900.0, tr.activity_names);
        TrainConfig tc;
        tc.epochs = 50;
        auto r = train(m, train_part, tc);
        for (std::size_t i = 1; i < r.loss_history.size(); ++i) CHECK(r.loss_history[i] <= r.loss_history[i - 1]);
        CHECK(rollout_rmse(m, test_part, 96) < 0.1);
        CHECK(one_step_rmse(m, test_part) < 0.05);
    }
    SUBCASE("rollout loss gradient matches finite differences") {
        PhysicsZoneModel m(900.0, tr.activity_names);
        TrainConfig tc;
        auto short_part = tr.slice(0, 3 * 96);
        m.set_normalization(Normalization::fit(short_part));
        std::vector<double> g;
        rollout_loss(m, short_part, tc, &g);
        auto p = m.params();
        const double h = 1e-5;
        for (std::size_t k = 0; k < p.size(); ++k) {
            auto q = m;
            q.params()[k] = p[k] + h;
            const double fp = rollout_loss(q, short_part, tc);
            q.params()[k] = p[k] - h;
            const double fm = rollout_loss(q, short_part, tc);
            const double fd = (fp - fm) / (2 * h);
            CHECK(std::abs(g[k] - fd) / (std::abs(fd) + 1e-8) < 1e-5);
        }
    }
}

TEST_CASE("sign penalty drives an unprojected model towards consistent heads") {
    RcTraceConfig on;
    on.days = 7;
    on.policy = HvacPolicy::Proportional;
    on.seed = 11;
    auto tr = generate_rc_trace(RcZoneSpec{}, on);

    PhysicsModelConfig free_cfg;
    free_cfg.sign_projection = false;
    free_cfg.head = HeadKind::Mlp;
    free_cfg.init_seed = 5;
    TrainConfig measure;
    measure.epochs = 0;
    measure.fit_normalization = false;
    auto penalty = [&](const PhysicsZoneModel& m) {
        TrainConfig w1 = measure;
        w1.physics_weight = 1.0;
        return rollout_loss(m, tr, w1) - rollout_loss(m, tr, measure);
    };

    PhysicsZoneModel m(900.0, tr.activity_names, free_cfg);
    m.set_normalization(Normalization::fit(tr));
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n(0.0, 1.0);
    for (auto& p : m.params()) p += n(rng);
    const double before = penalty(m);
    REQUIRE(before > 0.0);

    TrainConfig cfg;
    cfg.epochs = 60;
    cfg.physics_weight = 10.0;
    cfg.fit_normalization = false;
    cfg.warm_start = false;
    train(m, tr, cfg);
    const double after = penalty(m);
    CHECK(after >= 0.0);
    CHECK(after < 0.5 * before);
}

TEST_CASE("multi-zone coupling conserves exchanged heat") {
    std::vector<std::unique_ptr<ZoneModel>> zones;
    RcZoneSpec a, b;
    b.capacitance = 2e7;
    zones.push_back(std::make_unique<PhysicsZoneModel>(PhysicsZoneModel::from_rc(a, 900.0, {})));
    zones.push_back(std::make_unique<PhysicsZoneModel>(PhysicsZoneModel::from_rc(b, 900.0, {})));
    MultiZoneModel mz(std::move(zones), {{0.0, 50.0}, {50.0, 0.0}});
    // Both zones at the outdoor temperature: only conduction moves heat.
    std::vector<Exogenous> x(2, Exogenous{20.0, 0.0, 0.0, {}});
    auto next = mz.step({20.0, 20.0}, x, {0.0, 0.0});
    CHECK(next[0] == doctest::Approx(20.0));
    auto hot = mz.step({25.0, 20.0}, x, {0.0, 0.0});
    // Heat lost by zone 0 through the wall equals heat gained by zone 1.
    const double lost = (25.0 - hot[0]) * a.capacitance - 900.0 * 5.0 / a.resistance;
    const double gained = (hot[1] - 20.0) * b.capacitance;
    CHECK(lost == doctest::Approx(gained).epsilon(1e-9));
    CHECK_THROWS_AS(MultiZoneModel({}, {}), InvalidArgument);
}
