#pragma once

#include <functional>

#include <Eigen/Core>

namespace stab {

struct ScalarMinimum {
    double x = 0.0;
    double value = 0.0;
};

// Golden-section search for a unimodal function on [a, b]; stops once the
// bracket is narrower than tol.
ScalarMinimum golden_section_minimize(const std::function<double(double)>& f, double a, double b, double tol,
                                      int max_iters = 200);

struct PatternSearchOptions {
    double initial_step = 0.1;
    double tol = 1e-9;   // terminate when the poll step falls below this
    int max_iters = 4000;
};

struct PatternSearchResult {
    Eigen::VectorXd x;
    double value = 0.0;
    int iterations = 0;
    int evaluations = 0;
    bool converged = false;
};

/// Derivative-free compass search over the coordinate directions.
///
/// Polls +-e_i opportunistically, retrying the last successful direction
/// first. A successful poll doubles the step (capped at the initial step); a
/// failed poll halves it. Only strict improvements are accepted, so the
/// returned value never exceeds f(x0).
PatternSearchResult compass_search(const std::function<double(const Eigen::VectorXd&)>& f, Eigen::VectorXd x0,
                                   const PatternSearchOptions& opts);

}  // namespace stab
