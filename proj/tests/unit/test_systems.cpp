#include <doctest.h>

#include <cmath>
#include <numbers>

#include "helpers.hpp"
#include "stab/errors.hpp"
#include "stab/rng.hpp"
#include "stab/systems.hpp"

using namespace stab;
using testutil::vec;

TEST_CASE("nonholonomic integrator") {
    using A3 = std::array<double, 3>;
    CHECK(ni_dynamics({0, 0, 0}, {1, 1}) == A3{1, 1, 0});
    CHECK(ni_dynamics({0.3, -2, 5}, {0, 0}) == A3{0, 0, 0});
    CHECK(ni_dynamics({1, 2, 0}, {1, 0}) == A3{1, 0, -2});
}

TEST_CASE("ENDI dynamics") {
    CHECK(endi_dynamics(vec({1, 0, 0, 0, 0}), vec({1, 0})) == vec({0, 0, 0, 1, 0}));
    CHECK(endi_dynamics(StateVec::Zero(5), ControlVec::Zero(2)) == StateVec::Zero(5));
    CHECK(endi_dynamics(vec({1, 2, 0, 3, 4}), vec({0, 0})) == vec({3, 4, -2, 0, 0}));
}

TEST_CASE("F tilde and the reduced NI CLF") {
    CHECK(f_tilde({1, 0, 0}, 0.7) == 1.0);
    CHECK(f_tilde({0, 0, 0}, 1.3) == 0.0);
    CHECK(f_tilde({1, 0, 1}, 0.0) == 1.0);
    CHECK(f_tilde({0.4, -0.2, 0.3}, 1.1) == doctest::Approx(f_tilde({0.4, -0.2, 0.3}, 1.1 + 2 * std::numbers::pi)));
    CHECK(ni_clf_reduced({1, 0, 0}) == 1.0);
    CHECK(ni_clf_reduced({0, 0, 0}) == 0.0);
    CHECK(ni_clf_reduced({1, 0, 1}) == 1.0);
}

TEST_CASE("kappa examples") {
    using A2 = std::array<double, 2>;
    CHECK(kappa_lambda({1, 0, 0}, 0.0) == A2{-2, 2});
    CHECK(kappa_lambda({0, 0, 0}, 0.4) == A2{0, 0});
}

TEST_CASE("kappa matches finite differences of F tilde") {
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        auto eng = make_engine(derive_key(5, Stream::Sampling, static_cast<std::uint64_t>(i)));
        const StateVec p = random_in_ball(eng, 3, 2.0);
        const double lam = std::uniform_real_distribution<double>(0.0, 2 * std::numbers::pi)(eng);
        const Phi phi{p[0], p[1], p[2]};
        std::array<double, 3> grad{};
        const double h = 1e-5;
        for (int j = 0; j < 3; ++j) {
            Phi a = phi, b = phi;
            a[j] += h;
            b[j] -= h;
            grad[j] = (f_tilde(a, lam) - f_tilde(b, lam)) / (2 * h);
        }
        const double k1 = -(grad[0] - phi[1] * grad[2]);
        const double k2 = -(grad[1] + phi[0] * grad[2]);
        const auto k = kappa_lambda(phi, lam);
        const double scale = std::max({std::abs(k[0]), std::abs(k[1]), 1e-3});
        worst = std::max({worst, std::abs(k[0] - k1) / scale, std::abs(k[1] - k2) / scale});
    }
    CHECK(worst <= 1e-6);
}

TEST_CASE("ENDI CLF: closed-form example and origin") {
    const LambdaClf cfg;
    const auto v = endi_clf(vec({1, 0, 0, -2, 2}), cfg);
    CHECK(v.value == doctest::Approx(1.0).epsilon(1e-10));
    CHECK((std::abs(v.lambda_star) < 1e-4 || std::abs(v.lambda_star - 2 * std::numbers::pi) < 1e-4));
    CHECK(endi_clf(StateVec::Zero(5), cfg).value == 0.0);
    CHECK_THROWS_AS(LambdaClf(32), ConfigError);
}

TEST_CASE("min over lambda of F tilde equals the reduced CLF") {
    const LambdaClf cfg;
    for (int i = 0; i < 100; ++i) {
        auto eng = make_engine(derive_key(6, Stream::Sampling, static_cast<std::uint64_t>(i)));
        const StateVec p = random_in_ball(eng, 3, 2.0);
        const Phi phi{p[0], p[1], p[2]};
        CHECK(min_f_tilde(phi, cfg).value == doctest::Approx(ni_clf_reduced(phi)).epsilon(1e-8).scale(1.0));
    }
}

TEST_CASE("ENDI CLF on the kappa manifold equals the reduced CLF and beats a dense sweep") {
    const LambdaClf cfg;
    for (int i = 0; i < 50; ++i) {
        auto eng = make_engine(derive_key(8, Stream::Sampling, static_cast<std::uint64_t>(i)));
        const StateVec p = random_in_ball(eng, 3, 1.5);
        const Phi phi{p[0], p[1], p[2]};
        const double lam0 = min_f_tilde(phi, cfg).lambda;
        const auto k = kappa_lambda(phi, lam0);
        const StateVec x = vec({phi[0], phi[1], phi[2], k[0], k[1]});
        CHECK(endi_clf(x, cfg).value == doctest::Approx(ni_clf_reduced(phi)).epsilon(1e-8).scale(1.0));

        const StateVec y = random_in_ball(eng, 5, 2.0);
        double brute = std::numeric_limits<double>::infinity();
        for (int j = 0; j < 10000; ++j) brute = std::min(brute, endi_clf_objective(y, 2 * std::numbers::pi * j / 10000));
        const auto v = endi_clf(y, cfg);
        CHECK(v.value <= brute + 1e-6);
        CHECK(v.value <= endi_clf_objective(y, v.lambda_star) + 1e-15);
    }
}

TEST_CASE("ENDI CLF is positive away from the origin") {
    const auto clf = make_clf("endi-clf");
    for (int i = 0; i < 1000; ++i) {
        auto eng = make_engine(derive_key(9, Stream::Sampling, static_cast<std::uint64_t>(i)));
        const double r = 1e-3 + (2 * 1.1446 - 1e-3) * std::uniform_real_distribution<double>(0, 1)(eng);
        CHECK(clf(random_unit_vector(eng, 5) * r) > 0.0);
    }
}

TEST_CASE("noise draws respect bounds and are deterministic") {
    NoiseModel m;
    m.dim = 5;
    m.seed = 4;
    CHECK(draw_measurement_error(m, 3) == StateVec::Zero(5));
    CHECK(draw_disturbance(m, 3) == StateVec::Zero(5));
    m.e_bar = 0.1;
    m.q_bar = 0.2;
    double emax = 0.0, emin = 1.0, qmax = 0.0;
    for (std::uint64_t k = 0; k < 100000; ++k) {
        const double e = draw_measurement_error(m, k).norm();
        emax = std::max(emax, e);
        emin = std::min(emin, e);
        qmax = std::max(qmax, draw_disturbance(m, k).norm());
    }
    CHECK(emax <= 0.1 + 1e-12);
    CHECK(emin == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(qmax <= 0.2 + 1e-12);
    CHECK(draw_measurement_error(m, 17) == draw_measurement_error(m, 17));
    CHECK(draw_measurement_error(m, 17) / 0.1 != draw_disturbance(m, 17) / 0.2);

    m.mode = NoiseMode::UniformBall;
    for (std::uint64_t k = 0; k < 10000; ++k) CHECK(draw_measurement_error(m, k).norm() <= 0.1 + 1e-12);
}

TEST_CASE("registry") {
    CHECK(make_system("endi").n == 5);
    CHECK(make_system("ni").n == 3);
    CHECK(make_clf("ni-clf").dim() == 3);
    CHECK_THROWS_AS(make_system("pendulum"), ConfigError);
    CHECK_THROWS_AS(make_clf("nope"), ConfigError);
}
