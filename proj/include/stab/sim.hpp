#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stab/clf.hpp"
#include "stab/controllers.hpp"
#include "stab/systems.hpp"
#include "stab/types.hpp"

namespace stab {

struct SimConfig {
    double delta = 0.25;
    double t_end = 20.0;
    int substeps = 20;
    NoiseModel noise;  // seed and run_index are taken from this config
    std::uint64_t seed = 0;
    std::uint64_t run_index = 0;
    // Draw a fresh disturbance per RK4 substep instead of one per sampling interval.
    bool disturbance_per_substep = false;
};

struct TrajectoryRecord {
    double delta = 0.0;
    std::vector<double> times;
    std::vector<StateVec> states;
    std::vector<StateVec> measured;
    std::vector<ControlVec> controls;  // controls[k] is held on [k delta, (k+1) delta)
    std::vector<double> clf_values;
    std::vector<bool> decay_flags;  // decay_flags[k]: L(x_{k+1}) < L(x_k)
    double max_norm = 0.0;          // over every RK4 substep

    std::size_t size() const { return times.size(); }
};

struct ConvergenceReport {
    bool entered_target = false;
    std::optional<double> T_reach;
    bool stayed = false;
    bool overshoot_ok = false;
    double min_norm = 0.0;
    double max_norm = 0.0;
    double final_norm = 0.0;
};

struct SimResult {
    TrajectoryRecord record;
    ConvergenceReport report;
    std::optional<std::string> failure;  // controller error; the record is partial
};

// Classical RK4 for x' = f(x, u) + q with u and q held constant.
StateVec integrate_interval(const ControlledSystem& sys, const StateVec& x0, const ControlVec& u, const StateVec& q,
                            double delta, int substeps);

/// Sample-and-hold closed loop. At every sampling instant k: measure
/// x_k + e_k, compute u_k from the measurement, draw q_k and integrate one
/// interval. Integration blow-up throws IntegrationError.
SimResult run_closed_loop(const ControlledSystem& sys, const ClfModel& L, const Controller& controller,
                          const StateVec& x0, const SimConfig& cfg, const BallRadii& radii);

// Evaluates the target-ball predicates on a (possibly partial) record.
ConvergenceReport assess_convergence(const TrajectoryRecord& rec, const BallRadii& radii);

/// Fraction of steps with x_k outside the core ball whose CLF drop is at
/// least beta * delta * w_bar. Returns 1 when no step qualifies.
double check_decay(const TrajectoryRecord& rec, const BallRadii& radii, double w_bar, double beta);

// CSV: t, x1..xn, u1..um, L, decay_flag.
void write_trajectory_csv(const TrajectoryRecord& rec, const std::string& path);
std::string trajectory_filename(Method m, double delta, double e_bar, double q_bar, std::uint64_t index);

}  // namespace stab
