#pragma once

#include "stab/clf.hpp"
#include "stab/controllers.hpp"

namespace stab {

// Set geometry on which the Lipschitz constants and the decay condition hold.
struct BoundGeometry {
    double ell1 = 0.0;
    double ell2 = 0.0;
    double eps2 = 0.0;
    double eps3 = 0.0;
    double eps4 = 0.0;
};

struct BoundInputs {
    RegularityConstants constants;
    double delta = 0.25;
    double r = 0.1;      // Dini-aiming radius
    double alpha = 0.1;  // inf-convolution parameter
    double c1 = 1.0;     // symbolic InfC disturbance constants
    double c2 = 1.0;
    BoundGeometry geometry;
    double c = 0.0;  // minimal decay used by the DiA sampling bounds; w_bar / 2 by default
};

// ell1 = ell_hat / 2, ell2 = L_hat_star, eps2 = eps3 = eps4 = S_star, c = w_bar / 2.
BoundInputs default_bound_inputs(const RegularityConstants& constants, const BallRadii& radii, double delta,
                                 double r, double alpha);

struct DiaSamplingBounds {
    double delta_bar = 0.0;
    double r_bar = 0.0;
    double T1 = 0.0;
    double M = 0.0;
    double a1 = 0.0;
    double a2 = 0.0;
    double a3 = 0.0;
    double quadratic_term = 0.0;
};

/// Upper bounds on the sampling period and aiming radius for Dini aiming.
///
/// T1 is the largest T on (0, 4 LipL r / c] with
/// c T / (16 LipL) <= r - sqrt(r^2 - r c T / (4 LipL)), found by bisection on
/// the feasibility predicate.
DiaSamplingBounds dia_sampling_bounds(const BoundInputs& in);

// Residual r - sqrt(r^2 - r c T / (4 LipL)) - c T / (16 LipL); NaN outside the domain.
double dia_t1_residual(const BoundInputs& in, double T);

struct RobustnessEnvelope {
    Method method = Method::Obc;
    double e_max = 0.0;
    double q_max = 0.0;
    bool coupled = false;
    bool empty = false;       // DiA: coupled bound exhausted by q_bar
    bool structural = false;  // InfC q_max depends on uncertified c1, c2
};

RobustnessEnvelope table1_envelope(Method method, const BoundInputs& in, double q_bar);

// Upper bound on the per-step CLF change under OBC with both error sources.
double obc_decay_margin(const BoundInputs& in, double e_bar, double q_bar);

// e_bar bound minus e_bar; non-negative iff the DiA coupling inequality holds.
double dia_coupling_slack(const BoundInputs& in, double e_bar, double q_bar);
bool dia_coupling_check(const BoundInputs& in, double e_bar, double q_bar);
// Bound on the transformed disturbance d: LipF e_bar + 2 e_bar / delta + q_bar.
double dia_transformed_disturbance(const BoundInputs& in, double e_bar, double q_bar);

// q_bar for which OBC matches the InfC decay of 3/8 delta w_bar at the InfC e_bar; may be negative.
double obc_infc_matching_q(const BoundInputs& in);

}  // namespace stab
