#include "stab/rng.hpp"

#include <cmath>

namespace stab {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_key(std::uint64_t seed, Stream tag, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ static_cast<std::uint64_t>(tag));
    h = splitmix64(h ^ a);
    h = splitmix64(h ^ b);
    return splitmix64(h ^ c);
}

std::mt19937_64 make_engine(std::uint64_t key) { return std::mt19937_64{key}; }

Eigen::VectorXd random_unit_vector(std::mt19937_64& eng, int n) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::VectorXd v(n);
    double norm = 0.0;
    do {
        for (int i = 0; i < n; ++i) v[i] = gauss(eng);
        norm = v.norm();
    } while (norm < 1e-12);
    return v / norm;
}

Eigen::VectorXd random_in_ball(std::mt19937_64& eng, int n, double radius) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const Eigen::VectorXd d = random_unit_vector(eng, n);
    return d * (radius * std::pow(unif(eng), 1.0 / n));
}

}  // namespace stab
