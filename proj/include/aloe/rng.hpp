#pragma once

#include <cstdint>
#include <random>

#include "aloe/common.hpp"

namespace aloe {

using Rng = std::mt19937_64;

/// Purpose tag of an independent random stream inside one trial.
enum class StreamPurpose : std::uint32_t {
  gradient = 0,
  f_curr = 1,
  f_plus = 2,
  eps_estimate = 3,
  fixture = 4,
  probe = 5,
};

/// Fresh generator keyed by (seed, iteration, purpose). Streams with any
/// differing key component are statistically independent.
Rng make_stream(std::uint64_t seed, std::uint64_t index, StreamPurpose purpose);

/// Standard Gaussian vector of length n.
Vector gaussian_vector(Eigen::Index n, Rng& rng);

/// Uniformly distributed unit vector in R^n.
Vector random_unit_vector(Eigen::Index n, Rng& rng);

}  // namespace aloe
