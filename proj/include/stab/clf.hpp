#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "stab/types.hpp"

namespace stab {

// A (possibly nonsmooth) Lyapunov candidate L: R^n -> R.
class ClfModel {
public:
    ClfModel(std::string name, int dim, std::function<double(const StateVec&)> eval)
        : name_(std::move(name)), dim_(dim), eval_(std::move(eval)) {}

    double operator()(const StateVec& x) const { return eval_(x); }
    int dim() const { return dim_; }
    const std::string& name() const { return name_; }

private:
    std::string name_;
    int dim_;
    std::function<double(const StateVec&)> eval_;
};

// Lower/upper class-K-infinity bounds alpha1(|x|) <= L(x) <= alpha2(|x|).
// Inverses are computed by monotone bisection.
class KInftyEnvelope {
public:
    using Map = std::function<double(double)>;

    KInftyEnvelope(Map alpha1, Map alpha2, bool repaired = false)
        : alpha1_(std::move(alpha1)), alpha2_(std::move(alpha2)), repaired_(repaired) {}

    double alpha1(double r) const { return alpha1_(r); }
    double alpha2(double r) const { return alpha2_(r); }
    double alpha1_inv(double v) const { return invert(alpha1_, v); }
    double alpha2_inv(double v) const { return invert(alpha2_, v); }

    // True when raw shell minima were non-monotone and had to be repaired.
    bool repaired() const { return repaired_; }

    static double invert(const Map& alpha, double v);

private:
    Map alpha1_;
    Map alpha2_;
    bool repaired_;
};

struct BallRadii {
    double s = 0.0;           // target ball
    double s_hat = 0.0;
    double ell_hat = 0.0;
    double s_star = 0.0;      // core ball
    double S = 0.0;           // starting ball
    double S_star = 0.0;      // overshoot ball
    double L_hat = 0.0;       // sup of L on B_S
    double L_hat_star = 0.0;  // sup of L on B_{S*}
    double e_hat = 0.0;
    double q_hat = 0.0;
};

struct RegularityConstants {
    double lip_L = 0.0;
    double lip_f = 0.0;
    double w_bar = 0.0;
    double M_dyn = 0.0;
};

// Flat key-value estimator report (constant name -> value).
using EstimatorReport = std::map<std::string, double>;

/// Geometric difference-quotient grid {1e-2, ..., 1e-6} * scale.
std::vector<double> default_mu_grid(double scale = 1.0, int count = 5);

/// Finite-sample proxy of the lower directional generalized derivative:
/// min over mu of (L(x + mu theta) - L(x)) / mu.
double ldgd_estimate(const ClfModel& L, const StateVec& x, const StateVec& theta, std::span<const double> mu_grid);

/// Sampled Lipschitz constant of L on the ball of `radius`, times `safety`.
///
/// Each pair is drawn from its own counter-derived stream, so a run with more
/// pairs re-uses every pair of a shorter run with the same seed. Even-indexed
/// pairs are global (two independent points); odd-indexed pairs are local
/// probes along a finite-difference gradient direction.
double estimate_lipschitz_L(const ClfModel& L, double radius, int n_pairs, std::uint64_t seed,
                            double safety = 1.1);

/// Sampled Lipschitz constant of f in x over the ball, uniform over the grid.
double estimate_lipschitz_f(const ControlledSystem& sys, double radius, const ControlGrid& grid, int n_pairs,
                            std::uint64_t seed, double safety = 1.1);

/// Sampled bound on |f(x, u)| over ball x grid.
double estimate_dynamics_bound(const ControlledSystem& sys, double radius, const ControlGrid& grid, int n_states,
                               std::uint64_t seed, double safety = 1.1);

struct EnvelopeOptions {
    double margin = 0.05;
};

/// Piecewise-linear envelopes through the per-shell minima and maxima of L.
KInftyEnvelope fit_kinfty_envelope(const ClfModel& L, std::span<const double> shell_radii, int samples_per_shell,
                                   std::uint64_t seed, const EnvelopeOptions& opts = {});

/// Sampled supremum of L over the closed ball (includes the +-axis points on the sphere).
double sampled_sup(const ClfModel& L, double radius, int n_samples, std::uint64_t seed);

BallRadii compute_ball_radii(const KInftyEnvelope& env, const ClfModel& L, double s, double S,
                             double apriori_fraction = 0.125, int sup_samples = 4000, std::uint64_t seed = 0);

/// Sampled minimum decay rate over the annulus s_star/2 <= |x| <= S_star:
/// min over states of (max over u of -ldgd(L, x, f(x, u))).
double estimate_min_decay(const ClfModel& L, const ControlledSystem& sys, const BallRadii& radii,
                          const ControlGrid& u_grid, int n_states, std::uint64_t seed);

struct RegularityOptions {
    int lipschitz_pairs = 4000;
    int decay_states = 400;
    int dynamics_states = 2000;
    std::uint64_t seed = 0;
};

RegularityConstants estimate_regularity(const ClfModel& L, const ControlledSystem& sys, const BallRadii& radii,
                                        const ControlGrid& u_grid, const RegularityOptions& opts = {});

EstimatorReport to_report(const BallRadii& radii);
EstimatorReport to_report(const RegularityConstants& c);

}  // namespace stab
