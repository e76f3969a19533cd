#include "stab/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "stab/errors.hpp"

namespace stab {

BoundInputs default_bound_inputs(const RegularityConstants& constants, const BallRadii& radii, double delta,
                                 double r, double alpha) {
    BoundInputs in;
    in.constants = constants;
    in.delta = delta;
    in.r = r;
    in.alpha = alpha;
    in.geometry = {radii.ell_hat / 2.0, radii.L_hat_star, radii.S_star, radii.S_star, radii.S_star};
    in.c = constants.w_bar / 2.0;
    return in;
}

double dia_t1_residual(const BoundInputs& in, double T) {
    const double lip = in.constants.lip_L;
    double radicand = in.r * in.r - in.r * in.c * T / (4.0 * lip);
    if (radicand < 0.0 && radicand > -1e-12 * in.r * in.r) radicand = 0.0;
    if (radicand < 0.0) return std::numeric_limits<double>::quiet_NaN();
    return in.r - std::sqrt(radicand) - in.c * T / (16.0 * lip);
}

DiaSamplingBounds dia_sampling_bounds(const BoundInputs& in) {
    const auto& k = in.constants;
    const auto& g = in.geometry;
    if (!(k.lip_L > 0.0 && k.lip_f > 0.0 && k.M_dyn > 0.0 && in.r > 0.0))
        throw BoundInfeasibleError("dia bounds: Lipschitz constants, dynamics bound and r must be positive");
    if (!(in.c > 0.0)) throw BoundInfeasibleError("dia bounds: minimal decay c must be positive");
    if (!(g.ell2 > g.ell1 && g.eps2 > 0.0 && g.eps3 > 0.0 && g.eps4 > 0.0))
        throw BoundInfeasibleError("dia bounds: geometry terms must be positive with ell2 > ell1");

    DiaSamplingBounds b;
    b.M = k.M_dyn + in.c / (2.0 * k.lip_L);
    b.a1 = b.M * b.M * k.lip_L;
    b.a2 = b.M * (b.M + in.r * k.lip_f);
    b.a3 = in.c * in.r / (4.0 * k.lip_L);
    b.quadratic_term = (std::sqrt(b.a2 * b.a2 + 4.0 * b.a1 * b.a3) - b.a2) / (2.0 * b.a1);

    // Largest feasible T on (0, T_max]; T_max is where the radicand vanishes.
    auto feasible = [&](double T) {
        const double res = dia_t1_residual(in, T);
        return !std::isnan(res) && res >= 0.0;
    };
    const double t_max = 4.0 * k.lip_L * in.r / in.c;
    if (feasible(t_max)) {
        b.T1 = t_max;
    } else {
        double lo = t_max * 1e-12;
        if (!feasible(lo)) throw BoundInfeasibleError("dia bounds: T1 bisection bracket is empty");
        double hi = t_max;
        for (int i = 0; i < 200 && hi - lo > 1e-15 * t_max; ++i) {
            const double mid = 0.5 * (lo + hi);
            (feasible(mid) ? lo : hi) = mid;
        }
        b.T1 = lo;
    }

    b.delta_bar = std::min({b.T1, (g.ell2 - g.ell1) / (k.lip_L * b.M), g.eps3 / b.M, b.quadratic_term});
    b.r_bar = std::min({g.eps2 / k.lip_L, g.eps3, g.eps4, in.c / (k.lip_f * k.lip_L)});
    return b;
}

RobustnessEnvelope table1_envelope(Method method, const BoundInputs& in, double q_bar) {
    if (q_bar < 0.0) throw ConfigError("table1: q_bar must be non-negative");
    const double d = in.delta;
    const double w = in.constants.w_bar;
    const double lip_L = in.constants.lip_L;
    const double lip_f = in.constants.lip_f;
    RobustnessEnvelope env;
    env.method = method;
    switch (method) {
        case Method::Dia:
            env.e_max = d * w / (4.0 * lip_L * (2.0 + d * lip_f)) - d * q_bar / (2.0 + d * lip_f);
            env.q_max = w / (4.0 * lip_L);  // where the coupled e_max reaches zero
            env.coupled = true;
            env.empty = env.e_max < 0.0;
            break;
        case Method::Obc:
            env.e_max = d * w / (4.0 * lip_L * (1.0 + d * lip_f));
            env.q_max = w / (4.0 * lip_L);
            break;
        case Method::Infc:
            env.e_max = d * w / (16.0 * lip_L);
            env.q_max = in.c1 * w * in.alpha + in.c2 * lip_f;
            env.structural = true;
            break;
    }
    return env;
}

double obc_decay_margin(const BoundInputs& in, double e_bar, double q_bar) {
    const auto& k = in.constants;
    return -in.delta * k.w_bar / 2.0 + k.lip_L * (1.0 + in.delta * k.lip_f) * e_bar + in.delta * k.lip_L * q_bar;
}

double dia_coupling_slack(const BoundInputs& in, double e_bar, double q_bar) {
    const auto& k = in.constants;
    const double denom = 2.0 + in.delta * k.lip_f;
    return in.delta * k.w_bar / (4.0 * k.lip_L * denom) - in.delta * q_bar / denom - e_bar;
}

bool dia_coupling_check(const BoundInputs& in, double e_bar, double q_bar) {
    return dia_coupling_slack(in, e_bar, q_bar) >= 0.0;
}

double dia_transformed_disturbance(const BoundInputs& in, double e_bar, double q_bar) {
    return in.constants.lip_f * e_bar + 2.0 * e_bar / in.delta + q_bar;
}

double obc_infc_matching_q(const BoundInputs& in) {
    const auto& k = in.constants;
    return k.w_bar / (in.delta * k.lip_L) * (in.delta / 8.0 - (1.0 + in.delta * k.lip_f) / 16.0);
}

}  // namespace stab
