#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace stab {

// Stream tags separating the independent random streams of a run.
enum class Stream : std::uint64_t {
    Measurement = 0x6d656173,
    Disturbance = 0x64697374,
    Controller = 0x6374726c,
    Initials = 0x696e6974,
    Sampling = 0x73616d70,
};

// Counter-based key derivation: the key depends only on its arguments, so
// draws are independent of evaluation order and thread schedule.
std::uint64_t derive_key(std::uint64_t seed, Stream tag, std::uint64_t a = 0, std::uint64_t b = 0,
                         std::uint64_t c = 0);

std::mt19937_64 make_engine(std::uint64_t key);

// Direction uniform on the unit sphere in R^n.
Eigen::VectorXd random_unit_vector(std::mt19937_64& eng, int n);

// Point uniform in the closed ball of the given radius.
Eigen::VectorXd random_in_ball(std::mt19937_64& eng, int n, double radius);

}  // namespace stab
