#include "stab/optim.hpp"

#include <algorithm>
#include <cmath>

namespace stab {

ScalarMinimum golden_section_minimize(const std::function<double(double)>& f, double a, double b, double tol,
                                      int max_iters) {
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - invphi * (b - a);
    double d = a + invphi * (b - a);
    double fc = f(c);
    double fd = f(d);
    for (int it = 0; it < max_iters && (b - a) > tol; ++it) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = f(d);
        }
    }
    return fc < fd ? ScalarMinimum{c, fc} : ScalarMinimum{d, fd};
}

PatternSearchResult compass_search(const std::function<double(const Eigen::VectorXd&)>& f, Eigen::VectorXd x0,
                                   const PatternSearchOptions& opts) {
    PatternSearchResult res;
    const int n = static_cast<int>(x0.size());
    res.x = std::move(x0);
    res.value = f(res.x);
    res.evaluations = 1;

    double step = opts.initial_step;
    int last_dir = 0;
    Eigen::VectorXd trial(n);
    while (step >= opts.tol) {
        if (res.iterations >= opts.max_iters) return res;
        ++res.iterations;
        bool improved = false;
        for (int j = 0; j < 2 * n; ++j) {
            const int dir = (last_dir + j) % (2 * n);
            const int axis = dir / 2;
            const double sign = (dir % 2 == 0) ? 1.0 : -1.0;
            trial = res.x;
            trial[axis] += sign * step;
            const double v = f(trial);
            ++res.evaluations;
            if (v < res.value) {
                res.x = trial;
                res.value = v;
                last_dir = dir;
                improved = true;
                break;
            }
        }
        step = improved ? std::min(2.0 * step, opts.initial_step) : 0.5 * step;
    }
    res.converged = true;
    return res;
}

}  // namespace stab
