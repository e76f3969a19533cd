#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace stab {

using StateVec = Eigen::VectorXd;
using ControlVec = Eigen::VectorXd;

// Per-channel interval constraints on the input.
struct InputBox {
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;

    int dim() const { return static_cast<int>(lower.size()); }
};

InputBox symmetric_box(int m, double bound);

// Plant x' = f(x, u) with a compact input box.
struct ControlledSystem {
    std::string name;
    int n = 0;
    int m = 0;
    std::function<StateVec(const StateVec&, const ControlVec&)> f;
    InputBox input_box;

    StateVec operator()(const StateVec& x, const ControlVec& u) const { return f(x, u); }
};

// Tensor grid over the input box. Points are enumerated with the first axis
// varying slowest; index order is the tie-break order of every grid argmin.
class ControlGrid {
public:
    ControlGrid(const InputBox& box, int points_per_axis);
    ControlGrid(const InputBox& box, std::vector<int> counts);

    std::size_t size() const { return points_.size(); }
    const ControlVec& operator[](std::size_t i) const { return points_[i]; }
    const std::vector<ControlVec>& points() const { return points_; }
    const std::vector<int>& counts() const { return counts_; }

private:
    std::vector<int> counts_;
    std::vector<ControlVec> points_;
};

struct GridChoice {
    std::size_t index = 0;
    double objective = std::numeric_limits<double>::infinity();
};

// First grid point attaining the minimum of `objective` (strict comparison).
template <typename Objective>
GridChoice grid_argmin(const ControlGrid& grid, Objective&& objective) {
    GridChoice best;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double v = objective(grid[i]);
        if (v < best.objective) {
            best.index = i;
            best.objective = v;
        }
    }
    return best;
}

}  // namespace stab
