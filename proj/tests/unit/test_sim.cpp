#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "helpers.hpp"
#include "stab/bench.hpp"
#include "stab/errors.hpp"
#include "stab/sim.hpp"

using namespace stab;
using testutil::vec;

namespace {

ControlledSystem decay_system() {
    return {"decay", 1, 1, [](const StateVec& x, const ControlVec&) { return StateVec(-x); }, symmetric_box(1, 1.0)};
}

BallRadii radii_1d(double s) {
    BallRadii r;
    r.s = s;
    r.s_star = s / 4.0;
    r.S = 1.0;
    r.S_star = 2.0;
    return r;
}

}  // namespace

TEST_CASE("RK4 on constant and linear fields") {
    const auto sys = testutil::integrator(1);
    CHECK(integrate_interval(sys, vec({0}), vec({1}), vec({0}), 0.5, 20)[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(integrate_interval(decay_system(), vec({1}), vec({0}), vec({0}), 0.5, 20)[0] ==
          doctest::Approx(std::exp(-0.5)).epsilon(1e-8));
    const auto sys2 = testutil::integrator(2);
    const StateVec a = integrate_interval(sys2, vec({0.2, 0.1}), vec({1, -1}), vec({0, 0}), 0.5, 20);
    const StateVec b = integrate_interval(sys2, vec({0.2, 0.1}), vec({1, -1}), vec({0.1, 0}), 0.5, 20);
    CHECK(b[0] - a[0] == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(b[1] == a[1]);
}

TEST_CASE("RK4 is fourth order") {
    const double exact = std::exp(-2.0);
    const double e1 = std::abs(integrate_interval(decay_system(), vec({1}), vec({0}), vec({0}), 2.0, 8)[0] - exact);
    const double e2 = std::abs(integrate_interval(decay_system(), vec({1}), vec({0}), vec({0}), 2.0, 16)[0] - exact);
    CHECK(std::log2(e1 / e2) >= 3.5);
}

TEST_CASE("blow-up raises an integration error") {
    const ControlledSystem blow{"blow", 1, 1,
                                [](const StateVec& x, const ControlVec&) { return StateVec(x.array().square() * 1e3); },
                                symmetric_box(1, 1.0)};
    CHECK_THROWS_AS(integrate_interval(blow, vec({1e200}), vec({0}), vec({0}), 1.0, 10), IntegrationError);
}

TEST_CASE("closed loop: integrator with OBC reaches and stays in the target") {
    const auto sys = testutil::integrator(1);
    const auto sq = testutil::squared_norm(1);
    StabilizerConfig sc;
    sc.delta = 0.1;
    const auto ctrl = make_controller(sc, sys, sq);
    SimConfig cfg;
    cfg.delta = 0.1;
    cfg.t_end = 3.0;
    const auto res = run_closed_loop(sys, sq, ctrl, vec({1}), cfg, radii_1d(0.05));
    REQUIRE(!res.failure);
    CHECK(res.record.size() == 31);
    for (std::size_t k = 1; k < 10; ++k) CHECK(res.record.states[k][0] < res.record.states[k - 1][0]);
    CHECK(res.report.entered_target);
    CHECK(res.report.stayed);
    CHECK(res.report.overshoot_ok);
    for (std::size_t k = 0; k < res.record.size(); ++k) {
        CHECK(res.record.times[k] == doctest::Approx(0.1 * k).epsilon(1e-12));
        CHECK(res.record.clf_values[k] == sq(res.record.states[k]));
    }
}

TEST_CASE("closed loop: starting inside the target") {
    const auto sys = testutil::integrator(1);
    const auto sq = testutil::squared_norm(1);
    StabilizerConfig sc;
    const auto ctrl = make_controller(sc, sys, sq);
    SimConfig cfg;
    cfg.t_end = 1.0;
    const auto res = run_closed_loop(sys, sq, ctrl, vec({0.025}), cfg, radii_1d(0.05));
    CHECK(res.report.entered_target);
    CHECK(*res.report.T_reach == 0.0);
}

TEST_CASE("closed loop: controller errors produce a partial record") {
    const auto sys = testutil::integrator(1);
    const auto sq = testutil::squared_norm(1);
    int calls = 0;
    const Controller flaky = [&](const StateVec&, std::uint64_t) -> ControlVec {
        if (++calls > 3) throw NumericDomainError("boom");
        return vec({-1});
    };
    SimConfig cfg;
    cfg.delta = 0.1;
    cfg.t_end = 2.0;
    const auto res = run_closed_loop(sys, sq, flaky, vec({1}), cfg, radii_1d(0.05));
    REQUIRE(res.failure);
    CHECK(res.record.size() < 21);
}

TEST_CASE("ENDI runs: determinism, zero-noise equivalence, target entry") {
    ExperimentSpec spec;
    const auto ctx = prepare_context(spec);
    StabilizerConfig sc;
    const auto ctrl = make_controller(sc, ctx.sys, ctx.clf);
    const StateVec x0 = vec({-1, 0.5, 0.2, 0.1, 0.1});
    SimConfig cfg;
    cfg.seed = 3;
    cfg.noise.e_bar = 0.1;
    cfg.noise.q_bar = 0.1;
    const auto a = run_closed_loop(ctx.sys, ctx.clf, ctrl, x0, cfg, ctx.radii);
    const auto b = run_closed_loop(ctx.sys, ctx.clf, ctrl, x0, cfg, ctx.radii);
    for (std::size_t k = 0; k < a.record.size(); ++k) {
        CHECK(a.record.states[k] == b.record.states[k]);
        CHECK(a.record.controls[k] == b.record.controls[k]);
    }

    // Zero bounds against a controller fed the true state directly.
    SimConfig nominal;
    const auto n = run_closed_loop(ctx.sys, ctx.clf, ctrl, x0, nominal, ctx.radii);
    StateVec x = x0;
    for (std::size_t k = 0; k + 1 < n.record.size(); ++k) {
        CHECK(n.record.states[k] == x);
        const auto u = ctrl(x, 0);
        x = integrate_interval(ctx.sys, x, u, StateVec::Zero(5), nominal.delta, nominal.substeps);
    }
    CHECK(n.report.entered_target);
    CHECK(n.report.overshoot_ok);
}

TEST_CASE("check_decay on synthetic records") {
    BallRadii r;
    r.s_star = 0.1;
    const double w = 2.0, beta = 0.125, delta = 0.25;
    TrajectoryRecord rec;
    rec.delta = delta;
    for (int k = 0; k < 6; ++k) {
        rec.times.push_back(k * delta);
        rec.states.push_back(vec({1.0 - 0.1 * k}));
        rec.clf_values.push_back(10.0 - k * 2 * beta * delta * w);
    }
    CHECK(check_decay(rec, r, w, beta) == 1.0);
    for (auto& v : rec.clf_values) v = 3.0;
    CHECK(check_decay(rec, r, w, beta) == 0.0);
}

TEST_CASE("trajectory CSV") {
    CHECK(trajectory_filename(Method::Obc, 0.25, 0.1, 0, 3) == "run_obc_0.25_0.1_0_3.csv");
    const auto sys = testutil::integrator(1);
    const auto sq = testutil::squared_norm(1);
    StabilizerConfig sc;
    SimConfig cfg;
    cfg.t_end = 1.0;
    const auto res = run_closed_loop(sys, sq, make_controller(sc, sys, sq), vec({1}), cfg, radii_1d(0.05));
    const auto path = std::filesystem::temp_directory_path() / "stab_traj_test.csv";
    write_trajectory_csv(res.record, path.string());
    std::ifstream is(path);
    std::string header;
    std::getline(is, header);
    CHECK(header == "t,x1,u1,L,decay_flag");
    int lines = 0;
    for (std::string l; std::getline(is, l);) ++lines;
    CHECK(lines == 5);
}
