#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "stab/clf.hpp"
#include "stab/types.hpp"

namespace stab {

enum class Method { Dia, Obc, Infc };

std::string_view to_string(Method m);
Method parse_method(std::string_view name);

struct DiaParams {
    double r = 0.1;         // aiming radius
    int n_dirs = 512;       // low-discrepancy sphere directions
    int n_random = 64;      // extra seeded random directions
    int refine_rounds = 8;  // tangent-perturbation rounds around the best direction
};

struct InfcParams {
    double alpha = 0.1;
    int prox_max_iters = 4000;
    double prox_tol = 1e-9;
    int multistart = 2;
};

struct ProxResult {
    StateVec y_alpha;
    StateVec zeta_alpha;
    double L_alpha = 0.0;
    bool converged = true;
    int evaluations = 0;
};

struct DiaAimResult {
    StateVec z_star;
    double value = 0.0;
    int probes = 0;
    std::vector<StateVec> probe_points;  // filled only when requested
    std::vector<double> probe_values;
};

/// Deterministic, well-spread unit directions in R^n: +-e_i followed by
/// Halton points pushed through Box-Muller and normalised.
std::vector<StateVec> sphere_directions(int n, int count);

// Boundary minimiser of L on the sphere of radius p.r around x.
DiaAimResult dia_aim_search(const ClfModel& L, const StateVec& x, const DiaParams& p, std::uint64_t seed,
                            bool record_probes = false);
StateVec dia_aim_point(const ClfModel& L, const StateVec& x, const DiaParams& p, std::uint64_t seed);

// argmin over the grid of <f(x, u), x - z_star>.
ControlVec dia_control(const ControlledSystem& sys, const StateVec& x_meas, const StateVec& z_star,
                       const ControlGrid& grid);

// argmin over the grid of L(x + delta f(x, u)) (one forward-Euler step).
ControlVec obc_control(const ControlledSystem& sys, const ClfModel& L, const StateVec& x_meas, double delta,
                       const ControlGrid& grid);

/// Proximal point of L at x: approximately minimises
/// L(y) + |y - x|^2 / (2 alpha^2) by compass search from y = x plus
/// (multistart - 1) seeded starts within alpha sqrt(2 L(x)) of x.
ProxResult infc_prox(const ClfModel& L, const StateVec& x, const InfcParams& p, std::uint64_t seed);

// argmin over the grid of <zeta_alpha, f(y_alpha, u)>.
ControlVec infc_control(const ControlledSystem& sys, const ProxResult& prox, const ControlGrid& grid);

struct StabilizerConfig {
    Method method = Method::Obc;
    double delta = 0.25;  // OBC prediction step (the sampling period)
    DiaParams dia;
    InfcParams infc;
    int points_per_axis = 21;
};

// Maps a measured state and a per-call seed to the held control.
using Controller = std::function<ControlVec(const StateVec& x_meas, std::uint64_t call_seed)>;

Controller make_controller(const StabilizerConfig& cfg, const ControlledSystem& sys, const ClfModel& L);

}  // namespace stab
