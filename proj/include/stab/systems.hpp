#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string_view>
#include <utility>
#include <vector>

#include "stab/clf.hpp"
#include "stab/types.hpp"

namespace stab {

using Phi = std::array<double, 3>;

// Nonholonomic integrator: g1(phi) w1 + g2(phi) w2 with g1 = (1, 0, -phi2), g2 = (0, 1, phi1).
std::array<double, 3> ni_dynamics(const Phi& phi, const std::array<double, 2>& omega);

// Extended nonholonomic double integrator, x = (phi1, phi2, phi3, eta1, eta2).
StateVec endi_dynamics(const StateVec& x, const ControlVec& u);

double f_tilde(const Phi& phi, double lambda);
std::array<double, 3> f_tilde_gradient(const Phi& phi, double lambda);
std::array<double, 2> kappa_lambda(const Phi& phi, double lambda);

// Reduced NI Lyapunov function phi1^2 + phi2^2 + 2 phi3^2 - 2 |phi3| sqrt(phi1^2 + phi2^2).
double ni_clf_reduced(const Phi& phi);

/// Settings of the lambda-minimisation inside the ENDI CLF: a uniform grid
/// on [0, 2pi) followed by golden-section refinement of the best cell.
class LambdaClf {
public:
    explicit LambdaClf(int grid_size = 360, double refine_tol = 1e-10);

    int grid_size() const { return grid_size_; }
    double refine_tol() const { return refine_tol_; }
    double grid_angle(int i) const;

    struct Minimum {
        double value;
        double lambda;  // in [0, 2pi)
    };

    // Minimises an arbitrary 2pi-periodic objective given as a function of
    // (cos lambda, sin lambda).
    template <typename Objective>
    Minimum minimize(Objective&& obj) const;

private:
    Minimum refine(int best, double best_value, const std::function<double(double)>& obj) const;

    int grid_size_;
    double refine_tol_;
    std::shared_ptr<const std::vector<std::pair<double, double>>> table_;
};

struct EndiClfValue {
    double value;
    double lambda_star;
};

EndiClfValue endi_clf(const StateVec& x, const LambdaClf& cfg);
double endi_clf_objective(const StateVec& x, double lambda);
// min over lambda of f_tilde, using the same grid and refinement as endi_clf.
LambdaClf::Minimum min_f_tilde(const Phi& phi, const LambdaClf& cfg);

enum class NoiseMode { WorstCaseSphere, UniformBall };

struct NoiseModel {
    double e_bar = 0.0;
    double q_bar = 0.0;
    NoiseMode mode = NoiseMode::WorstCaseSphere;
    std::uint64_t seed = 0;
    std::uint64_t run_index = 0;
    int dim = 1;
};

// Deterministic in (seed, run_index, k); |e| <= e_bar.
StateVec draw_measurement_error(const NoiseModel& model, std::uint64_t k);
// Deterministic in (seed, run_index, k, substep); |q| <= q_bar. Independent of the measurement stream.
StateVec draw_disturbance(const NoiseModel& model, std::uint64_t k, std::uint64_t substep = 0);

// Registry lookups: systems "ni", "endi"; CLFs "endi-clf", "ni-clf". Unknown names throw ConfigError.
ControlledSystem make_system(std::string_view name, double input_bound = 1.0);
ClfModel make_clf(std::string_view name, const LambdaClf& cfg = LambdaClf{});

// ---------------------------------------------------------------------------

template <typename Objective>
LambdaClf::Minimum LambdaClf::minimize(Objective&& obj) const {
    const auto& tab = *table_;
    int best = 0;
    double best_value = obj(tab[0].first, tab[0].second);
    for (int i = 1; i < grid_size_; ++i) {
        const double v = obj(tab[static_cast<std::size_t>(i)].first, tab[static_cast<std::size_t>(i)].second);
        if (v < best_value) {
            best_value = v;
            best = i;
        }
    }
    return refine(best, best_value, [&obj](double lam) { return obj(std::cos(lam), std::sin(lam)); });
}

}  // namespace stab
