#include "stab/types.hpp"

#include "stab/errors.hpp"

namespace stab {

InputBox symmetric_box(int m, double bound) {
    return InputBox{Eigen::VectorXd::Constant(m, -bound), Eigen::VectorXd::Constant(m, bound)};
}

ControlGrid::ControlGrid(const InputBox& box, int points_per_axis)
    : ControlGrid(box, std::vector<int>(static_cast<std::size_t>(box.dim()), points_per_axis)) {}

ControlGrid::ControlGrid(const InputBox& box, std::vector<int> counts) : counts_(std::move(counts)) {
    const int m = box.dim();
    if (m < 1 || static_cast<int>(counts_.size()) != m || box.upper.size() != m)
        throw ConfigError("control grid: axis count does not match input box");
    std::size_t total = 1;
    for (int i = 0; i < m; ++i) {
        if (counts_[i] < 2) throw ConfigError("control grid: need at least 2 points per axis");
        if (!(box.lower[i] <= box.upper[i])) throw ConfigError("control grid: empty input interval");
        total *= static_cast<std::size_t>(counts_[i]);
    }
    points_.reserve(total);
    std::vector<int> idx(static_cast<std::size_t>(m), 0);
    for (std::size_t p = 0; p < total; ++p) {
        ControlVec u(m);
        for (int i = 0; i < m; ++i) {
            // Endpoints are assigned exactly so the grid covers the box corners.
            const double t = static_cast<double>(idx[i]) / (counts_[i] - 1);
            u[i] = idx[i] == counts_[i] - 1 ? box.upper[i] : box.lower[i] + t * (box.upper[i] - box.lower[i]);
        }
        points_.push_back(std::move(u));
        for (int i = m - 1; i >= 0; --i) {
            if (++idx[i] < counts_[i]) break;
            idx[i] = 0;
        }
    }
}

}  // namespace stab
