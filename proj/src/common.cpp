#include "aloe/common.hpp"
#include "aloe/rng.hpp"

namespace aloe {

std::string_view to_string(FunctionClass c) {
  switch (c) {
    case FunctionClass::nonconvex:
      return "nonconvex";
    case FunctionClass::convex:
      return "convex";
    case FunctionClass::strongly_convex:
      return "strongly_convex";
  }
  return "unknown";
}

FunctionClass parse_function_class(std::string_view name) {
  if (name == "nonconvex") return FunctionClass::nonconvex;
  if (name == "convex") return FunctionClass::convex;
  if (name == "strongly_convex") return FunctionClass::strongly_convex;
  throw std::invalid_argument("unknown function class '" + std::string(name) + "'");
}

bool class_admits(FunctionClass actual, FunctionClass requested) {
  auto rank = [](FunctionClass c) {
    switch (c) {
      case FunctionClass::nonconvex:
        return 0;
      case FunctionClass::convex:
        return 1;
      case FunctionClass::strongly_convex:
        return 2;
    }
    return 0;
  };
  return rank(actual) >= rank(requested);
}

namespace {

// splitmix64 finalizer; spreads nearby keys over the whole 64-bit range.
std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

Rng make_stream(std::uint64_t seed, std::uint64_t index, StreamPurpose purpose) {
  std::uint64_t key = mix64(seed);
  key = mix64(key ^ index);
  key = mix64(key ^ (static_cast<std::uint64_t>(purpose) + 0x5a1e0bULL));
  return Rng(key);
}

Vector gaussian_vector(Eigen::Index n, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = normal(rng);
  return v;
}

Vector random_unit_vector(Eigen::Index n, Rng& rng) {
  Vector v = gaussian_vector(n, rng);
  double norm = v.norm();
  while (norm == 0.0) {
    v = gaussian_vector(n, rng);
    norm = v.norm();
  }
  return v / norm;
}

}  // namespace aloe
