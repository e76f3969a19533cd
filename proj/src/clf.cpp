#include "stab/clf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "stab/errors.hpp"
#include "stab/rng.hpp"

namespace stab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Point in the ball; half of the draws land exactly on the bounding sphere
// since suprema of radially growing functions sit there.
StateVec sample_ball_or_sphere(std::mt19937_64& eng, int n, double radius) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    if (unif(eng) < 0.5) return random_unit_vector(eng, n) * radius;
    return random_in_ball(eng, n, radius);
}

StateVec fd_gradient(const ClfModel& L, const StateVec& x, double h) {
    StateVec g(x.size());
    StateVec xp = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        xp[i] = x[i] + h;
        const double fp = L(xp);
        xp[i] = x[i] - h;
        const double fm = L(xp);
        xp[i] = x[i];
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

// Piecewise-linear interpolant through (0, 0) and the knots, extended
// linearly with the last slope beyond the final knot.
KInftyEnvelope::Map piecewise_linear(std::vector<double> r, std::vector<double> v) {
    r.insert(r.begin(), 0.0);
    v.insert(v.begin(), 0.0);
    return [r = std::move(r), v = std::move(v)](double x) {
        if (x <= 0.0) return 0.0;
        const auto it = std::upper_bound(r.begin(), r.end(), x);
        std::size_t hi = static_cast<std::size_t>(it - r.begin());
        if (hi >= r.size()) hi = r.size() - 1;
        const std::size_t lo = hi - 1;
        const double t = (x - r[lo]) / (r[hi] - r[lo]);
        return v[lo] + t * (v[hi] - v[lo]);
    };
}

}  // namespace

double KInftyEnvelope::invert(const Map& alpha, double v) {
    if (!(v > 0.0)) return 0.0;
    double hi = 1.0;
    for (int i = 0; i < 2000 && alpha(hi) < v; ++i) hi *= 2.0;
    if (alpha(hi) < v) throw NumericDomainError("envelope inverse: value outside the range of alpha");
    double lo = 0.0;
    for (int i = 0; i < 400; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (alpha(mid) < v)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

std::vector<double> default_mu_grid(double scale, int count) {
    std::vector<double> grid;
    grid.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) grid.push_back(scale * std::pow(10.0, -2.0 - i));
    return grid;
}

double ldgd_estimate(const ClfModel& L, const StateVec& x, const StateVec& theta, std::span<const double> mu_grid) {
    if (mu_grid.empty()) throw NumericDomainError("ldgd: empty mu grid");
    const double base = L(x);
    if (!std::isfinite(base)) throw NumericDomainError("ldgd: non-finite L(x)");
    double best = kInf;
    for (double mu : mu_grid) {
        if (!(mu > 0.0)) throw NumericDomainError("ldgd: mu grid must be strictly positive");
        const double v = L(x + mu * theta);
        if (!std::isfinite(v)) throw NumericDomainError("ldgd: non-finite L(x + mu theta)");
        best = std::min(best, (v - base) / mu);
    }
    return best;
}

double estimate_lipschitz_L(const ClfModel& L, double radius, int n_pairs, std::uint64_t seed, double safety) {
    if (!(radius > 0.0)) throw SamplingError("lipschitz: radius must be positive");
    const int n = L.dim();
    const double h_fd = 1e-6 * radius;
    const double h_pair = 1e-4 * radius;
    double best = 0.0;
    int used = 0;
    for (int i = 0; i < n_pairs; ++i) {
        auto eng = make_engine(derive_key(seed, Stream::Sampling, static_cast<std::uint64_t>(i)));
        StateVec x = sample_ball_or_sphere(eng, n, radius);
        StateVec y;
        if (i % 2 == 0) {
            y = sample_ball_or_sphere(eng, n, radius);
        } else {
            StateVec d = fd_gradient(L, x, h_fd);
            const double gn = d.norm();
            d = gn > 0.0 && std::isfinite(gn) ? StateVec(d / gn) : random_unit_vector(eng, n);
            y = x + h_pair * d;
            if (y.norm() > radius) y = x - h_pair * d;
        }
        const double dist = (x - y).norm();
        if (!(dist > 0.0)) continue;
        const double lx = L(x);
        const double ly = L(y);
        if (!std::isfinite(lx) || !std::isfinite(ly)) throw NumericDomainError("lipschitz: non-finite L sample");
        best = std::max(best, std::abs(lx - ly) / dist);
        ++used;
    }
    if (used == 0) throw SamplingError("lipschitz: every sampled pair was degenerate");
    return safety * best;
}

double estimate_lipschitz_f(const ControlledSystem& sys, double radius, const ControlGrid& grid, int n_pairs,
                            std::uint64_t seed, double safety) {
    if (!(radius > 0.0)) throw SamplingError("lipschitz_f: radius must be positive");
    std::uniform_int_distribution<std::size_t> pick(0, grid.size() - 1);
    double best = 0.0;
    int used = 0;
    for (int i = 0; i < n_pairs; ++i) {
        auto eng = make_engine(derive_key(seed, Stream::Sampling, static_cast<std::uint64_t>(i), 1));
        const StateVec x = sample_ball_or_sphere(eng, sys.n, radius);
        StateVec y;
        if (i % 2 == 0) {
            y = sample_ball_or_sphere(eng, sys.n, radius);
        } else {
            y = x + 1e-4 * radius * random_unit_vector(eng, sys.n);
            if (y.norm() > radius) y = x - (y - x);
        }
        const ControlVec& u = grid[pick(eng)];
        const double dist = (x - y).norm();
        if (!(dist > 0.0)) continue;
        best = std::max(best, (sys(x, u) - sys(y, u)).norm() / dist);
        ++used;
    }
    if (used == 0) throw SamplingError("lipschitz_f: every sampled pair was degenerate");
    return safety * best;
}

double estimate_dynamics_bound(const ControlledSystem& sys, double radius, const ControlGrid& grid, int n_states,
                               std::uint64_t seed, double safety) {
    double best = 0.0;
    for (int i = 0; i < n_states; ++i) {
        auto eng = make_engine(derive_key(seed, Stream::Sampling, static_cast<std::uint64_t>(i), 2));
        const StateVec x = sample_ball_or_sphere(eng, sys.n, radius);
        for (const auto& u : grid.points()) best = std::max(best, sys(x, u).norm());
    }
    return safety * best;
}

KInftyEnvelope fit_kinfty_envelope(const ClfModel& L, std::span<const double> shell_radii, int samples_per_shell,
                                   std::uint64_t seed, const EnvelopeOptions& opts) {
    if (shell_radii.empty()) throw SamplingError("envelope: no shell radii");
    for (std::size_t j = 0; j < shell_radii.size(); ++j) {
        if (!(shell_radii[j] > 0.0) || (j > 0 && !(shell_radii[j] > shell_radii[j - 1])))
            throw SamplingError("envelope: shell radii must be positive and strictly increasing");
    }
    const int n = L.dim();
    const std::size_t k = shell_radii.size();
    std::vector<double> lo(k, kInf), hi(k, -kInf);
    for (std::size_t j = 0; j < k; ++j) {
        const double r = shell_radii[j];
        auto eng = make_engine(derive_key(seed, Stream::Sampling, j, 3));
        auto visit = [&](const StateVec& x) {
            const double v = L(x);
            if (!std::isfinite(v)) throw NumericDomainError("envelope: non-finite L sample");
            lo[j] = std::min(lo[j], v);
            hi[j] = std::max(hi[j], v);
        };
        for (int i = 0; i < n; ++i) {
            StateVec e = StateVec::Zero(n);
            e[i] = r;
            visit(e);
            visit(-e);
        }
        for (int i = 0; i < samples_per_shell; ++i) visit(random_unit_vector(eng, n) * r);
    }

    // Running minimum from the outside in and running maximum from the inside
    // out make both curves monotone; ties are broken to keep them strict.
    bool repaired = false;
    for (std::size_t j = k - 1; j-- > 0;) {
        if (lo[j] >= lo[j + 1]) {
            lo[j] = lo[j + 1] * (1.0 - 1e-9);
            repaired = true;
        }
    }
    for (std::size_t j = 1; j < k; ++j) {
        if (hi[j] <= hi[j - 1]) {
            hi[j] = hi[j - 1] * (1.0 + 1e-9) + 1e-300;
            repaired = true;
        }
    }
    if (!(lo.front() > 0.0)) throw NumericDomainError("envelope: L is not positive on the innermost shell");
    for (auto& v : lo) v *= (1.0 - opts.margin);
    for (auto& v : hi) v *= (1.0 + opts.margin);

    std::vector<double> r(shell_radii.begin(), shell_radii.end());
    return KInftyEnvelope(piecewise_linear(r, lo), piecewise_linear(r, hi), repaired);
}

double sampled_sup(const ClfModel& L, double radius, int n_samples, std::uint64_t seed) {
    const int n = L.dim();
    double best = L(StateVec::Zero(n));
    for (int i = 0; i < n; ++i) {
        StateVec e = StateVec::Zero(n);
        e[i] = radius;
        best = std::max({best, L(e), L(-e)});
    }
    for (int i = 0; i < n_samples; ++i) {
        auto eng = make_engine(derive_key(seed, Stream::Sampling, static_cast<std::uint64_t>(i), 4));
        best = std::max(best, L(sample_ball_or_sphere(eng, n, radius)));
    }
    if (!std::isfinite(best)) throw NumericDomainError("sampled_sup: non-finite L sample");
    return best;
}

BallRadii compute_ball_radii(const KInftyEnvelope& env, const ClfModel& L, double s, double S,
                             double apriori_fraction, int sup_samples, std::uint64_t seed) {
    if (!(s > 0.0 && s < S)) throw ConfigError("ball radii: need 0 < s < S");
    BallRadii b;
    b.s = s;
    b.S = S;
    b.e_hat = apriori_fraction * s;
    b.q_hat = apriori_fraction * s;
    b.s_hat = s - b.e_hat - b.q_hat;
    if (!(b.s_hat > 0.0)) throw ConfigError("ball radii: a-priori noise bounds exceed target ball");
    b.ell_hat = env.alpha1(b.s_hat);
    b.s_star = env.alpha2_inv(b.ell_hat / 4.0);
    b.L_hat = sampled_sup(L, S, sup_samples, seed);
    b.S_star = env.alpha1_inv(b.L_hat);
    b.L_hat_star = sampled_sup(L, b.S_star, sup_samples, seed + 1);
    if (!(b.s_star < s && s <= S && S <= b.S_star + 1e-12 * S)) {
        std::ostringstream os;
        os << "ball radii: chain s* < s <= S <= S* violated (s*=" << b.s_star << ", S*=" << b.S_star << ")";
        throw NumericDomainError(os.str());
    }
    return b;
}

double estimate_min_decay(const ClfModel& L, const ControlledSystem& sys, const BallRadii& radii,
                          const ControlGrid& u_grid, int n_states, std::uint64_t seed) {
    const double r_min = 0.5 * radii.s_star;
    const double r_max = radii.S_star;
    if (!(r_min > 0.0 && r_min <= r_max)) throw SamplingError("min decay: empty annulus");
    if (n_states < 1) throw SamplingError("min decay: need at least one state");
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double w_bar = kInf;
    StateVec witness;
    for (int i = 0; i < n_states; ++i) {
        auto eng = make_engine(derive_key(seed, Stream::Sampling, static_cast<std::uint64_t>(i), 5));
        // The first two states pin the inner and outer annulus boundaries.
        const double rad = i == 0 ? r_min : i == 1 ? r_max : r_min + (r_max - r_min) * unif(eng);
        const StateVec x = random_unit_vector(eng, sys.n) * rad;
        const auto mu = default_mu_grid(std::max(x.norm(), 1e-12));
        double best = -kInf;
        for (const auto& u : u_grid.points()) best = std::max(best, -ldgd_estimate(L, x, sys(x, u), mu));
        if (best < w_bar) {
            w_bar = best;
            witness = x;
        }
    }
    if (!(w_bar > 0.0)) {
        std::ostringstream os;
        os << "decay condition fails on sample: best decay " << w_bar << " at |x| = " << witness.norm();
        throw DecayConditionError(os.str(), witness);
    }
    return w_bar;
}

RegularityConstants estimate_regularity(const ClfModel& L, const ControlledSystem& sys, const BallRadii& radii,
                                        const ControlGrid& u_grid, const RegularityOptions& opts) {
    RegularityConstants c;
    c.lip_L = estimate_lipschitz_L(L, radii.S_star, opts.lipschitz_pairs, opts.seed);
    c.lip_f = estimate_lipschitz_f(sys, radii.S_star, u_grid, opts.lipschitz_pairs, opts.seed);
    c.w_bar = estimate_min_decay(L, sys, radii, u_grid, opts.decay_states, opts.seed);
    c.M_dyn = estimate_dynamics_bound(sys, radii.S_star, u_grid, opts.dynamics_states, opts.seed);
    return c;
}

EstimatorReport to_report(const BallRadii& b) {
    return {{"s", b.s},         {"s_hat", b.s_hat}, {"ell_hat", b.ell_hat},       {"s_star", b.s_star},
            {"S", b.S},         {"S_star", b.S_star}, {"L_hat", b.L_hat},         {"L_hat_star", b.L_hat_star},
            {"e_hat", b.e_hat}, {"q_hat", b.q_hat}};
}

EstimatorReport to_report(const RegularityConstants& c) {
    return {{"lip_L", c.lip_L}, {"lip_f", c.lip_f}, {"w_bar", c.w_bar}, {"M_dyn", c.M_dyn}};
}

}  // namespace stab
