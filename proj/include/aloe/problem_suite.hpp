#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aloe/common.hpp"

namespace aloe {

/// A smooth objective with exact value/gradient access and its analytic
/// constants. Immutable after construction.
struct ProblemInstance {
  std::string name;
  int dim = 0;
  std::function<double(const Vector&)> value_fn;
  std::function<Vector(const Vector&)> grad_fn;
  double lipschitz_L = 1.0;
  double strong_convexity_beta = 0.0;   // 0 if not strongly convex
  std::optional<double> diameter_D;     // required for the convex class
  double phi_star = 0.0;
  FunctionClass class_tag = FunctionClass::nonconvex;
  Vector x0;
  std::optional<Vector> x_star;
};

/// Exact objective value. Throws std::invalid_argument on dimension mismatch.
double eval_value(const ProblemInstance& problem, const Vector& x);

/// Exact gradient. Throws std::invalid_argument on dimension mismatch.
Vector eval_gradient(const ProblemInstance& problem, const Vector& x);

/// 0.5 x'Ax with A = Q diag(lambda) Q', Q a seeded random rotation and the
/// spectrum spread linearly over [lambda_min, lambda_max]. x0 is the all-ones
/// vector.
ProblemInstance make_strongly_convex_quadratic(int dim, double lambda_min, double lambda_max,
                                               std::uint64_t seed);

/// Nonconvex sum of rotated Cauchy terms, sum_i c_i ln(1 + (Qx)_i^2).
/// Global minimum 0 at the origin; curvature ranges over [-max c / 4, 2 max c].
ProblemInstance make_rotated_cauchy(int dim, std::uint64_t seed);

/// Convex, not strongly convex: sum_i c_i (sqrt(1 + (Qx)_i^2) - 1).
/// D is set to 2 ||x0 - x*|| with x* obtained by a high-accuracy inner solve.
ProblemInstance make_pseudo_huber(int dim, std::uint64_t seed);

/// Finite-sum data for mini-batch oracles: l2-regularized binary logistic loss
///   l(x, i) = ln(1 + exp(-y_i a_i'x)) + (reg / 2) ||x||^2.
struct ErmDataset {
  Matrix features;  // one sample per row
  Vector labels;    // +-1
  double reg = 0.0;
  double M_c = 0.0;  // growth-condition constants, estimated on a probe grid
  double M_v = 0.0;

  int size() const { return static_cast<int>(features.rows()); }
  int dim() const { return static_cast<int>(features.cols()); }
  double loss(const Vector& x, int i) const;
  Vector loss_grad(const Vector& x, int i) const;
};

/// Mean loss over `batch`, summed as an index-order left fold.
double minibatch_value(const ErmDataset& data, const Vector& x, std::span<const int> batch);
Vector minibatch_gradient(const ErmDataset& data, const Vector& x, std::span<const int> batch);

/// Mean over samples of ||grad l(x, d) - grad phi(x)||^2.
double gradient_variance(const ErmDataset& data, const Vector& x);

struct LogisticProblem {
  ProblemInstance problem;
  std::shared_ptr<const ErmDataset> dataset;
};

/// Seeded synthetic logistic-regression problem. The induced objective is the
/// full-data mean loss; phi* and x* come from an inner solve, and (M_c, M_v)
/// are estimated from 100 probe points in a radius-3 ball around x0.
LogisticProblem make_synthetic_logistic(int n_samples, int dim, std::uint64_t seed);

struct GrowthConstants {
  double M_c = 0.0;
  double M_v = 0.0;
};

/// M_c is the gradient variance at x*, M_v the largest ratio
/// (V(x) - M_c) / ||grad phi(x)||^2 over the probes.
GrowthConstants estimate_growth_constants(const ErmDataset& data, const Vector& x_star,
                                          std::span<const Vector> probes);

/// Points drawn uniformly from the ball of the given radius around center.
std::vector<Vector> probe_ball(const Vector& center, double radius, int count, std::uint64_t seed);

/// Accelerated gradient descent with adaptive restart, step 1/L, run until the
/// gradient norm is below grad_tol. Deterministic.
Vector solve_minimizer(const ProblemInstance& problem, const Vector& start, double grad_tol = 1e-11,
                       int max_iters = 200000);

}  // namespace aloe
