#include "stab/systems.hpp"

#include <cmath>
#include <numbers>

#include "stab/errors.hpp"
#include "stab/optim.hpp"
#include "stab/rng.hpp"

namespace stab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// F~(phi; lambda) + 1/2 |eta - kappa(phi; lambda)|^2 written in terms of
// (c, s) = (cos lambda, sin lambda).
inline double endi_objective(double p1, double p2, double p3, double e1, double e2, double c, double s) {
    const double lin = p1 * c + p2 * s;
    const double ft = p1 * p1 + p2 * p2 + 2.0 * p3 * p3 - 2.0 * p3 * lin;
    const double d3 = 4.0 * p3 - 2.0 * lin;
    const double k1 = -((2.0 * p1 - 2.0 * p3 * c) - p2 * d3);
    const double k2 = -((2.0 * p2 - 2.0 * p3 * s) + p1 * d3);
    const double r1 = e1 - k1;
    const double r2 = e2 - k2;
    return ft + 0.5 * (r1 * r1 + r2 * r2);
}

StateVec draw_bounded(const NoiseModel& model, double bound, Stream tag, std::uint64_t k, std::uint64_t sub) {
    if (bound == 0.0) return StateVec::Zero(model.dim);
    auto eng = make_engine(derive_key(model.seed, tag, model.run_index, k, sub));
    if (model.mode == NoiseMode::WorstCaseSphere) return random_unit_vector(eng, model.dim) * bound;
    return random_in_ball(eng, model.dim, bound);
}

}  // namespace

std::array<double, 3> ni_dynamics(const Phi& phi, const std::array<double, 2>& omega) {
    return {omega[0], omega[1], -phi[1] * omega[0] + phi[0] * omega[1]};
}

StateVec endi_dynamics(const StateVec& x, const ControlVec& u) {
    StateVec dx(5);
    dx << x[3], x[4], x[0] * x[4] - x[3] * x[1], u[0], u[1];
    return dx;
}

double f_tilde(const Phi& phi, double lambda) {
    const auto& [p1, p2, p3] = phi;
    return p1 * p1 + p2 * p2 + 2.0 * p3 * p3 - 2.0 * p3 * (p1 * std::cos(lambda) + p2 * std::sin(lambda));
}

std::array<double, 3> f_tilde_gradient(const Phi& phi, double lambda) {
    const auto& [p1, p2, p3] = phi;
    const double c = std::cos(lambda);
    const double s = std::sin(lambda);
    return {2.0 * p1 - 2.0 * p3 * c, 2.0 * p2 - 2.0 * p3 * s, 4.0 * p3 - 2.0 * (p1 * c + p2 * s)};
}

std::array<double, 2> kappa_lambda(const Phi& phi, double lambda) {
    const auto grad = f_tilde_gradient(phi, lambda);
    // <grad, g1> and <grad, g2> with g1 = (1, 0, -phi2), g2 = (0, 1, phi1).
    const double a1 = grad[0] - phi[1] * grad[2];
    const double a2 = grad[1] + phi[0] * grad[2];
    return {-a1, -a2};
}

double ni_clf_reduced(const Phi& phi) {
    const auto& [p1, p2, p3] = phi;
    return p1 * p1 + p2 * p2 + 2.0 * p3 * p3 - 2.0 * std::abs(p3) * std::sqrt(p1 * p1 + p2 * p2);
}

LambdaClf::LambdaClf(int grid_size, double refine_tol) : grid_size_(grid_size), refine_tol_(refine_tol) {
    if (grid_size < 64) throw ConfigError("lambda grid: grid_size must be at least 64");
    if (!(refine_tol > 0.0)) throw ConfigError("lambda grid: refine_tol must be positive");
    auto tab = std::make_shared<std::vector<std::pair<double, double>>>();
    tab->reserve(static_cast<std::size_t>(grid_size));
    for (int i = 0; i < grid_size; ++i) {
        const double lam = grid_angle(i);
        tab->emplace_back(std::cos(lam), std::sin(lam));
    }
    table_ = std::move(tab);
}

double LambdaClf::grid_angle(int i) const { return kTwoPi * i / grid_size_; }

LambdaClf::Minimum LambdaClf::refine(int best, double best_value, const std::function<double(double)>& obj) const {
    const double h = kTwoPi / grid_size_;
    const double center = grid_angle(best);
    const auto m = golden_section_minimize(obj, center - h, center + h, refine_tol_);
    if (!(m.value < best_value)) return {best_value, center};
    double lam = std::fmod(m.x, kTwoPi);
    if (lam < 0.0) lam += kTwoPi;
    return {m.value, lam};
}

EndiClfValue endi_clf(const StateVec& x, const LambdaClf& cfg) {
    const double p1 = x[0], p2 = x[1], p3 = x[2], e1 = x[3], e2 = x[4];
    const auto m = cfg.minimize([=](double c, double s) { return endi_objective(p1, p2, p3, e1, e2, c, s); });
    return {m.value, m.lambda};
}

double endi_clf_objective(const StateVec& x, double lambda) {
    const Phi phi{x[0], x[1], x[2]};
    const auto k = kappa_lambda(phi, lambda);
    const double r1 = x[3] - k[0];
    const double r2 = x[4] - k[1];
    return f_tilde(phi, lambda) + 0.5 * (r1 * r1 + r2 * r2);
}

LambdaClf::Minimum min_f_tilde(const Phi& phi, const LambdaClf& cfg) {
    const auto& [p1, p2, p3] = phi;
    const double a0 = p1 * p1 + p2 * p2 + 2.0 * p3 * p3;
    return cfg.minimize([=](double c, double s) { return a0 - 2.0 * p3 * (p1 * c + p2 * s); });
}

StateVec draw_measurement_error(const NoiseModel& model, std::uint64_t k) {
    return draw_bounded(model, model.e_bar, Stream::Measurement, k, 0);
}

StateVec draw_disturbance(const NoiseModel& model, std::uint64_t k, std::uint64_t substep) {
    return draw_bounded(model, model.q_bar, Stream::Disturbance, k, substep);
}

ControlledSystem make_system(std::string_view name, double input_bound) {
    if (name == "endi") {
        return ControlledSystem{"endi", 5, 2, &endi_dynamics, symmetric_box(2, input_bound)};
    }
    if (name == "ni") {
        auto f = [](const StateVec& x, const ControlVec& u) {
            const auto d = ni_dynamics({x[0], x[1], x[2]}, {u[0], u[1]});
            StateVec dx(3);
            dx << d[0], d[1], d[2];
            return dx;
        };
        return ControlledSystem{"ni", 3, 2, f, symmetric_box(2, input_bound)};
    }
    throw ConfigError("unknown system '" + std::string(name) + "'");
}

ClfModel make_clf(std::string_view name, const LambdaClf& cfg) {
    if (name == "endi-clf") {
        return ClfModel("endi-clf", 5, [cfg](const StateVec& x) { return endi_clf(x, cfg).value; });
    }
    if (name == "ni-clf") {
        return ClfModel("ni-clf", 3, [](const StateVec& x) { return ni_clf_reduced({x[0], x[1], x[2]}); });
    }
    throw ConfigError("unknown CLF '" + std::string(name) + "'");
}

}  // namespace stab
