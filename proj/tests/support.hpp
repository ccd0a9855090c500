#pragma once

#include <gtest/gtest.h>

#include <cmath>
#include <cstdint>
#include <random>
#include <string>

#include "aloe/common.hpp"
#include "aloe/rng.hpp"

namespace aloe::testing {

// Small hand-rolled generator for property tests. Each case gets its own
// seed so a failure can be replayed from the trace message.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(make_stream(seed, 0xfeed, StreamPurpose::probe)) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  double log_uniform(double lo, double hi) {
    return std::exp(uniform(std::log(lo), std::log(hi)));
  }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(rng_); }
  Vector vector(int n, double scale) { return scale * gaussian_vector(n, rng_); }
  Rng& rng() { return rng_; }

 private:
  Rng rng_;
};

// Runs `body(gen, case_index)` for `cases` independent generators.
template <class F>
void for_all(int cases, std::uint64_t seed, F&& body) {
  for (int c = 0; c < cases; ++c) {
    SCOPED_TRACE("property case " + std::to_string(c) + " (seed " + std::to_string(seed) + ")");
    Gen gen(seed * 1000003ULL + static_cast<std::uint64_t>(c));
    body(gen, c);
    if (::testing::Test::HasFatalFailure()) return;
  }
}

}  // namespace aloe::testing
