#include "stab/sim.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "stab/errors.hpp"
#include "stab/format.hpp"
#include "stab/rng.hpp"

namespace stab {

StateVec integrate_interval(const ControlledSystem& sys, const StateVec& x0, const ControlVec& u, const StateVec& q,
                            double delta, int substeps) {
    if (substeps < 1) throw ConfigError("integrate: substeps must be at least 1");
    const double h = delta / substeps;
    StateVec x = x0;
    for (int i = 0; i < substeps; ++i) {
        const StateVec k1 = sys(x, u) + q;
        const StateVec k2 = sys(x + 0.5 * h * k1, u) + q;
        const StateVec k3 = sys(x + 0.5 * h * k2, u) + q;
        const StateVec k4 = sys(x + h * k3, u) + q;
        x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!x.allFinite()) throw IntegrationError("integrate: non-finite state at substep " + std::to_string(i), i);
    }
    return x;
}

ConvergenceReport assess_convergence(const TrajectoryRecord& rec, const BallRadii& radii) {
    ConvergenceReport rep;
    if (rec.states.empty()) return rep;
    rep.min_norm = std::numeric_limits<double>::infinity();
    std::optional<std::size_t> last_outside;
    for (std::size_t k = 0; k < rec.states.size(); ++k) {
        const double nx = rec.states[k].norm();
        rep.min_norm = std::min(rep.min_norm, nx);
        if (nx <= radii.s) {
            if (!rep.T_reach) rep.T_reach = rec.times[k];
        } else {
            last_outside = k;
        }
    }
    rep.entered_target = rep.T_reach.has_value();
    rep.stayed = rep.entered_target && (!last_outside || rec.times[*last_outside] < *rep.T_reach);
    rep.final_norm = rec.states.back().norm();
    rep.max_norm = rec.max_norm;
    rep.overshoot_ok = rec.max_norm <= radii.S_star;
    return rep;
}

SimResult run_closed_loop(const ControlledSystem& sys, const ClfModel& L, const Controller& controller,
                          const StateVec& x0, const SimConfig& cfg, const BallRadii& radii) {
    if (!(cfg.delta > 0.0) || !(cfg.t_end >= cfg.delta)) throw ConfigError("sim: need delta > 0 and t_end >= delta");
    if (cfg.substeps < 4) throw ConfigError("sim: substeps must be at least 4");
    NoiseModel noise = cfg.noise;
    noise.seed = cfg.seed;
    noise.run_index = cfg.run_index;
    noise.dim = sys.n;

    const long steps = static_cast<long>(std::floor(cfg.t_end / cfg.delta + 1e-9));
    SimResult out;
    auto& rec = out.record;
    rec.delta = cfg.delta;
    rec.max_norm = x0.norm();

    StateVec x = x0;
    for (long k = 0; k <= steps; ++k) {
        const auto uk = static_cast<std::uint64_t>(k);
        rec.times.push_back(static_cast<double>(k) * cfg.delta);
        rec.states.push_back(x);
        rec.clf_values.push_back(L(x));
        const StateVec x_meas = x + draw_measurement_error(noise, uk);
        rec.measured.push_back(x_meas);
        ControlVec u;
        try {
            u = controller(x_meas, derive_key(cfg.seed, Stream::Controller, cfg.run_index, uk));
        } catch (const std::exception& ex) {
            out.failure = "controller failed at step " + std::to_string(k) + ": " + ex.what();
            rec.states.pop_back();
            rec.times.pop_back();
            rec.clf_values.pop_back();
            rec.measured.pop_back();
            break;
        }
        rec.controls.push_back(u);
        if (k == steps) break;

        const double h = cfg.delta / cfg.substeps;
        try {
            if (cfg.disturbance_per_substep) {
                for (int j = 0; j < cfg.substeps; ++j) {
                    x = integrate_interval(sys, x, u, draw_disturbance(noise, uk, static_cast<std::uint64_t>(j)), h, 1);
                    rec.max_norm = std::max(rec.max_norm, x.norm());
                }
            } else {
                const StateVec q = draw_disturbance(noise, uk);
                for (int j = 0; j < cfg.substeps; ++j) {
                    x = integrate_interval(sys, x, u, q, h, 1);
                    rec.max_norm = std::max(rec.max_norm, x.norm());
                }
            }
        } catch (const IntegrationError& ex) {
            throw IntegrationError(std::string("sim: blow-up in sampling interval ") + std::to_string(k) + " (" +
                                       ex.what() + ")",
                                   k);
        }
    }
    // The final state is recorded but no interval follows it.
    for (std::size_t k = 0; k + 1 < rec.clf_values.size(); ++k)
        rec.decay_flags.push_back(rec.clf_values[k + 1] < rec.clf_values[k]);
    if (!rec.clf_values.empty()) rec.decay_flags.push_back(false);
    out.report = assess_convergence(rec, radii);
    return out;
}

double check_decay(const TrajectoryRecord& rec, const BallRadii& radii, double w_bar, double beta) {
    if (!(beta > 0.0 && beta < 1.0)) throw ConfigError("check_decay: beta must lie in (0, 1)");
    const double required = beta * rec.delta * w_bar;
    int eligible = 0;
    int ok = 0;
    for (std::size_t k = 0; k + 1 < rec.states.size(); ++k) {
        if (rec.states[k].norm() <= radii.s_star) continue;
        ++eligible;
        if (rec.clf_values[k + 1] - rec.clf_values[k] <= -required) ++ok;
    }
    return eligible == 0 ? 1.0 : static_cast<double>(ok) / eligible;
}

void write_trajectory_csv(const TrajectoryRecord& rec, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw StabError("cannot write trajectory file '" + path + "'");
    const std::size_t n = rec.states.empty() ? 0 : static_cast<std::size_t>(rec.states.front().size());
    const std::size_t m = rec.controls.empty() ? 0 : static_cast<std::size_t>(rec.controls.front().size());
    os << "t";
    for (std::size_t i = 1; i <= n; ++i) os << ",x" << i;
    for (std::size_t i = 1; i <= m; ++i) os << ",u" << i;
    os << ",L,decay_flag\n";
    for (std::size_t k = 0; k < rec.size(); ++k) {
        os << fixed6(rec.times[k]);
        for (std::size_t i = 0; i < n; ++i) os << ',' << fixed6(rec.states[k][static_cast<Eigen::Index>(i)]);
        for (std::size_t i = 0; i < m; ++i) os << ',' << fixed6(rec.controls[k][static_cast<Eigen::Index>(i)]);
        os << ',' << fixed6(rec.clf_values[k]) << ',' << (rec.decay_flags[k] ? 1 : 0) << '\n';
    }
}

std::string trajectory_filename(Method m, double delta, double e_bar, double q_bar, std::uint64_t index) {
    std::ostringstream os;
    os << "run_" << to_string(m) << '_' << compact(delta) << '_' << compact(e_bar) << '_' << compact(q_bar) << '_'
       << index << ".csv";
    return os.str();
}

}  // namespace stab
