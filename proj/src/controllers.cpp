#include "stab/controllers.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include "stab/errors.hpp"
#include "stab/optim.hpp"
#include "stab/rng.hpp"

namespace stab {

namespace {

constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71};

double radical_inverse(std::uint64_t i, int base) {
    double inv = 1.0 / base;
    double f = inv;
    double r = 0.0;
    while (i > 0) {
        r += f * static_cast<double>(i % static_cast<std::uint64_t>(base));
        i /= static_cast<std::uint64_t>(base);
        f *= inv;
    }
    return r;
}

const std::vector<StateVec>& cached_directions(int n, int count) {
    static std::mutex mu;
    static std::map<std::pair<int, int>, std::unique_ptr<const std::vector<StateVec>>> cache;
    std::lock_guard lock(mu);
    auto& slot = cache[{n, count}];
    if (!slot) slot = std::make_unique<const std::vector<StateVec>>(sphere_directions(n, count));
    return *slot;
}

// Orthonormal basis of the complement of the unit vector d.
std::vector<StateVec> tangent_basis(const StateVec& d) {
    const int n = static_cast<int>(d.size());
    std::vector<StateVec> basis;
    for (int i = 0; i < n && static_cast<int>(basis.size()) < n - 1; ++i) {
        StateVec v = StateVec::Unit(n, i);
        v -= v.dot(d) * d;
        for (const auto& b : basis) v -= v.dot(b) * b;
        const double nv = v.norm();
        if (nv > 1e-6) basis.push_back(v / nv);
    }
    return basis;
}

}  // namespace

std::string_view to_string(Method m) {
    switch (m) {
        case Method::Dia: return "dia";
        case Method::Obc: return "obc";
        case Method::Infc: return "infc";
    }
    return "?";
}

Method parse_method(std::string_view name) {
    if (name == "dia") return Method::Dia;
    if (name == "obc") return Method::Obc;
    if (name == "infc") return Method::Infc;
    throw ConfigError("unknown method '" + std::string(name) + "' (expected dia, obc or infc)");
}

std::vector<StateVec> sphere_directions(int n, int count) {
    if (n < 1) throw ConfigError("sphere directions: dimension must be positive");
    if (2 * ((n + 1) / 2) > static_cast<int>(std::size(kPrimes)))
        throw ConfigError("sphere directions: dimension too large");
    std::vector<StateVec> dirs;
    dirs.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < n && static_cast<int>(dirs.size()) < count; ++i) {
        dirs.push_back(StateVec::Unit(n, i));
        if (static_cast<int>(dirs.size()) < count) dirs.push_back(-StateVec::Unit(n, i));
    }
    const int pairs = (n + 1) / 2;
    for (std::uint64_t idx = 1; static_cast<int>(dirs.size()) < count; ++idx) {
        StateVec g(2 * pairs);
        for (int p = 0; p < pairs; ++p) {
            const double u1 = radical_inverse(idx, kPrimes[2 * p]);
            const double u2 = radical_inverse(idx, kPrimes[2 * p + 1]);
            const double rad = std::sqrt(-2.0 * std::log(std::max(u1, 1e-300)));
            g[2 * p] = rad * std::cos(2.0 * std::numbers::pi * u2);
            g[2 * p + 1] = rad * std::sin(2.0 * std::numbers::pi * u2);
        }
        StateVec d = g.head(n);
        const double nd = d.norm();
        if (nd > 1e-12) dirs.push_back(d / nd);
    }
    return dirs;
}

DiaAimResult dia_aim_search(const ClfModel& L, const StateVec& x, const DiaParams& p, std::uint64_t seed,
                            bool record_probes) {
    if (!(p.r > 0.0)) throw ConfigError("dini aiming: r must be positive");
    const int n = static_cast<int>(x.size());
    DiaAimResult res;
    res.value = std::numeric_limits<double>::infinity();
    StateVec best_dir;

    auto probe = [&](const StateVec& d) {
        const StateVec z = x + p.r * d;
        const double v = L(z);
        ++res.probes;
        if (record_probes) {
            res.probe_points.push_back(z);
            res.probe_values.push_back(v);
        }
        if (v < res.value) {
            res.value = v;
            res.z_star = z;
            best_dir = d;
            return true;
        }
        return false;
    };

    for (const auto& d : cached_directions(n, p.n_dirs)) probe(d);
    auto eng = make_engine(seed);
    for (int i = 0; i < p.n_random; ++i) probe(random_unit_vector(eng, n));

    double step = 0.5 * std::sqrt(4.0 * std::numbers::pi / std::max(p.n_dirs, 1));
    for (int round = 0; round < p.refine_rounds && n > 1; ++round) {
        const StateVec center = best_dir;
        bool improved = false;
        for (const auto& t : tangent_basis(center)) {
            for (double sign : {1.0, -1.0}) {
                StateVec d = center + sign * step * t;
                d.normalize();
                improved = probe(d) || improved;
            }
        }
        if (!improved) step *= 0.5;
    }
    return res;
}

StateVec dia_aim_point(const ClfModel& L, const StateVec& x, const DiaParams& p, std::uint64_t seed) {
    return dia_aim_search(L, x, p, seed).z_star;
}

ControlVec dia_control(const ControlledSystem& sys, const StateVec& x_meas, const StateVec& z_star,
                       const ControlGrid& grid) {
    const StateVec dir = x_meas - z_star;
    return grid[grid_argmin(grid, [&](const ControlVec& u) { return sys(x_meas, u).dot(dir); }).index];
}

ControlVec obc_control(const ControlledSystem& sys, const ClfModel& L, const StateVec& x_meas, double delta,
                       const ControlGrid& grid) {
    if (!(delta > 0.0)) throw ConfigError("obc: delta must be positive");
    return grid[grid_argmin(grid, [&](const ControlVec& u) { return L(x_meas + delta * sys(x_meas, u)); }).index];
}

ProxResult infc_prox(const ClfModel& L, const StateVec& x, const InfcParams& p, std::uint64_t seed) {
    if (!(p.alpha > 0.0 && p.alpha < 1.0)) throw ConfigError("inf-convolution: alpha must lie in (0, 1)");
    const double inv2a2 = 1.0 / (2.0 * p.alpha * p.alpha);
    auto objective = [&](const StateVec& y) { return L(y) + (y - x).squaredNorm() * inv2a2; };

    const double Lx = L(x);
    if (!std::isfinite(Lx)) throw NumericDomainError("inf-convolution: non-finite L(x)");
    // Any minimiser satisfies |y - x| <= alpha sqrt(2 L(x)) because y = x is feasible.
    const double reach = p.alpha * std::sqrt(2.0 * std::max(Lx, 0.0));

    PatternSearchOptions opts;
    opts.initial_step = std::max(reach, 10.0 * p.prox_tol);
    opts.tol = p.prox_tol;
    opts.max_iters = p.prox_max_iters;

    ProxResult out;
    auto eng = make_engine(seed);
    bool have = false;
    for (int start = 0; start < std::max(p.multistart, 1); ++start) {
        StateVec y0 = start == 0 ? x : StateVec(x + random_in_ball(eng, static_cast<int>(x.size()), reach));
        auto r = compass_search(objective, std::move(y0), opts);
        out.evaluations += r.evaluations;
        if (!have || r.value < out.L_alpha) {
            out.y_alpha = std::move(r.x);
            out.L_alpha = r.value;
            out.converged = r.converged;
            have = true;
        }
        if (reach == 0.0) break;
    }
    out.zeta_alpha = (x - out.y_alpha) / (p.alpha * p.alpha);
    out.L_alpha = L(out.y_alpha) + (out.y_alpha - x).squaredNorm() / (2.0 * p.alpha * p.alpha);
    return out;
}

ControlVec infc_control(const ControlledSystem& sys, const ProxResult& prox, const ControlGrid& grid) {
    return grid[grid_argmin(grid, [&](const ControlVec& u) { return prox.zeta_alpha.dot(sys(prox.y_alpha, u)); })
                    .index];
}

Controller make_controller(const StabilizerConfig& cfg, const ControlledSystem& sys, const ClfModel& L) {
    auto grid = std::make_shared<const ControlGrid>(sys.input_box, cfg.points_per_axis);
    switch (cfg.method) {
        case Method::Dia:
            if (!(cfg.dia.r > 0.0)) throw ConfigError("dia.r must be positive");
            return [=](const StateVec& x, std::uint64_t seed) {
                const StateVec z = dia_aim_point(L, x, cfg.dia, seed);
                return dia_control(sys, x, z, *grid);
            };
        case Method::Obc:
            if (!(cfg.delta > 0.0)) throw ConfigError("delta must be positive");
            return [=](const StateVec& x, std::uint64_t) { return obc_control(sys, L, x, cfg.delta, *grid); };
        case Method::Infc:
            if (!(cfg.infc.alpha > 0.0 && cfg.infc.alpha < 1.0)) throw ConfigError("infc.alpha must lie in (0, 1)");
            return [=](const StateVec& x, std::uint64_t seed) {
                return infc_control(sys, infc_prox(L, x, cfg.infc, seed), *grid);
            };
    }
    throw ConfigError("unknown method");
}

}  // namespace stab
