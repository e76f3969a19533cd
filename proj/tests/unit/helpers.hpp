#pragma once

#include <cmath>

#include "stab/clf.hpp"
#include "stab/types.hpp"

namespace testutil {

inline stab::StateVec vec(std::initializer_list<double> v) {
    stab::StateVec x(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double e : v) x[i++] = e;
    return x;
}

// x' = u on R^n with a symmetric input box.
inline stab::ControlledSystem integrator(int n = 1, double bound = 1.0) {
    return {"integrator", n, n, [](const stab::StateVec&, const stab::ControlVec& u) { return stab::StateVec(u); },
            stab::symmetric_box(n, bound)};
}

inline stab::ClfModel squared_norm(int n) {
    return stab::ClfModel("sq", n, [](const stab::StateVec& x) { return x.squaredNorm(); });
}

inline stab::ClfModel abs_norm(int n) {
    return stab::ClfModel("abs", n, [](const stab::StateVec& x) { return x.norm(); });
}

}  // namespace testutil
