#include "aloe/problem_suite.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "aloe/rng.hpp"

namespace aloe {

namespace {

void check_dim(const ProblemInstance& problem, const Vector& x) {
  if (x.size() != problem.dim) {
    throw std::invalid_argument("dimension mismatch: problem '" + problem.name + "' has dim " +
                                std::to_string(problem.dim) + ", got " +
                                std::to_string(x.size()));
  }
}

Matrix random_rotation(int dim, Rng& rng) {
  Matrix g(dim, dim);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int j = 0; j < dim; ++j)
    for (int i = 0; i < dim; ++i) g(i, j) = normal(rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  // Sign fix so the rotation is Haar distributed.
  for (int j = 0; j < dim; ++j)
    if (r(j, j) < 0) q.col(j) *= -1.0;
  return q;
}

Vector uniform_weights(int dim, double lo, double hi, Rng& rng) {
  std::uniform_real_distribution<double> u(lo, hi);
  Vector c(dim);
  for (int i = 0; i < dim; ++i) c[i] = u(rng);
  return c;
}

double log1p_exp(double z) {
  // ln(1 + e^z) without overflow.
  return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

double eval_value(const ProblemInstance& problem, const Vector& x) {
  check_dim(problem, x);
  return problem.value_fn(x);
}

Vector eval_gradient(const ProblemInstance& problem, const Vector& x) {
  check_dim(problem, x);
  return problem.grad_fn(x);
}

ProblemInstance make_strongly_convex_quadratic(int dim, double lambda_min, double lambda_max,
                                               std::uint64_t seed) {
  if (dim < 1) throw std::invalid_argument("quadratic: dim must be >= 1");
  if (!(lambda_min > 0.0) || !(lambda_min <= lambda_max) || !std::isfinite(lambda_max)) {
    throw std::invalid_argument("quadratic: require 0 < lambda_min <= lambda_max");
  }
  Rng rng = make_stream(seed, 0, StreamPurpose::fixture);
  Vector spectrum(dim);
  for (int i = 0; i < dim; ++i) {
    spectrum[i] = dim == 1 ? lambda_min
                           : lambda_min + (lambda_max - lambda_min) * i / static_cast<double>(dim - 1);
  }
  const Matrix q = random_rotation(dim, rng);
  auto a = std::make_shared<const Matrix>(q * spectrum.asDiagonal() * q.transpose());

  ProblemInstance p;
  p.name = "quadratic";
  p.dim = dim;
  p.value_fn = [a](const Vector& x) { return 0.5 * x.dot(*a * x); };
  p.grad_fn = [a](const Vector& x) -> Vector { return *a * x; };
  p.lipschitz_L = lambda_max;
  p.strong_convexity_beta = lambda_min;
  p.phi_star = 0.0;
  p.class_tag = FunctionClass::strongly_convex;
  p.x0 = Vector::Ones(dim);
  p.x_star = Vector::Zero(dim);
  p.diameter_D = 2.0 * p.x0.norm();
  return p;
}

ProblemInstance make_rotated_cauchy(int dim, std::uint64_t seed) {
  if (dim < 1) throw std::invalid_argument("cauchy: dim must be >= 1");
  Rng rng = make_stream(seed, 0, StreamPurpose::fixture);
  auto q = std::make_shared<const Matrix>(random_rotation(dim, rng));
  auto c = std::make_shared<const Vector>(uniform_weights(dim, 0.5, 1.5, rng));

  ProblemInstance p;
  p.name = "cauchy";
  p.dim = dim;
  p.value_fn = [q, c](const Vector& x) {
    const Vector z = q->transpose() * x;
    double s = 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i) s += (*c)[i] * std::log1p(z[i] * z[i]);
    return s;
  };
  p.grad_fn = [q, c](const Vector& x) -> Vector {
    Vector z = q->transpose() * x;
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = 2.0 * (*c)[i] * z[i] / (1.0 + z[i] * z[i]);
    return *q * z;
  };
  p.lipschitz_L = 2.0 * c->maxCoeff();
  p.phi_star = 0.0;
  p.class_tag = FunctionClass::nonconvex;
  p.x0 = 2.0 * Vector::Ones(dim);
  p.x_star = Vector::Zero(dim);
  return p;
}

ProblemInstance make_pseudo_huber(int dim, std::uint64_t seed) {
  if (dim < 1) throw std::invalid_argument("pseudo_huber: dim must be >= 1");
  Rng rng = make_stream(seed, 0, StreamPurpose::fixture);
  auto q = std::make_shared<const Matrix>(random_rotation(dim, rng));
  auto c = std::make_shared<const Vector>(uniform_weights(dim, 0.5, 1.5, rng));

  ProblemInstance p;
  p.name = "pseudo_huber";
  p.dim = dim;
  p.value_fn = [q, c](const Vector& x) {
    const Vector z = q->transpose() * x;
    double s = 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i) s += (*c)[i] * (std::sqrt(1.0 + z[i] * z[i]) - 1.0);
    return s;
  };
  p.grad_fn = [q, c](const Vector& x) -> Vector {
    Vector z = q->transpose() * x;
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = (*c)[i] * z[i] / std::sqrt(1.0 + z[i] * z[i]);
    return *q * z;
  };
  p.lipschitz_L = c->maxCoeff();
  p.phi_star = 0.0;
  p.class_tag = FunctionClass::convex;
  p.x0 = 2.0 * Vector::Ones(dim);
  const Vector x_star = solve_minimizer(p, p.x0, 1e-12);
  p.x_star = x_star;
  p.diameter_D = 2.0 * (p.x0 - x_star).norm();
  return p;
}

double ErmDataset::loss(const Vector& x, int i) const {
  const double margin = labels[i] * features.row(i).dot(x);
  return log1p_exp(-margin) + 0.5 * reg * x.squaredNorm();
}

Vector ErmDataset::loss_grad(const Vector& x, int i) const {
  const double margin = labels[i] * features.row(i).dot(x);
  Vector g = (-labels[i] * sigmoid(-margin)) * features.row(i).transpose();
  g += reg * x;
  return g;
}

double minibatch_value(const ErmDataset& data, const Vector& x, std::span<const int> batch) {
  if (batch.empty()) throw std::invalid_argument("minibatch_value: empty batch");
  double sum = 0.0;
  for (int i : batch) sum += data.loss(x, i);
  return sum / static_cast<double>(batch.size());
}

Vector minibatch_gradient(const ErmDataset& data, const Vector& x, std::span<const int> batch) {
  if (batch.empty()) throw std::invalid_argument("minibatch_gradient: empty batch");
  Vector sum = Vector::Zero(x.size());
  for (int i : batch) {
    const double margin = data.labels[i] * data.features.row(i).dot(x);
    sum.noalias() += (-data.labels[i] * sigmoid(-margin)) * data.features.row(i).transpose();
  }
  sum /= static_cast<double>(batch.size());
  sum += data.reg * x;
  return sum;
}

double gradient_variance(const ErmDataset& data, const Vector& x) {
  std::vector<int> all(data.size());
  std::iota(all.begin(), all.end(), 0);
  const Vector mean = minibatch_gradient(data, x, all);
  double acc = 0.0;
  for (int i = 0; i < data.size(); ++i) acc += (data.loss_grad(x, i) - mean).squaredNorm();
  return acc / data.size();
}

std::vector<Vector> probe_ball(const Vector& center, double radius, int count, std::uint64_t seed) {
  Rng rng = make_stream(seed, 0, StreamPurpose::probe);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<Vector> out;
  out.reserve(count);
  const double n = static_cast<double>(center.size());
  for (int j = 0; j < count; ++j) {
    const Vector dir = random_unit_vector(center.size(), rng);
    const double r = radius * std::pow(unif(rng), 1.0 / n);
    out.push_back(center + r * dir);
  }
  return out;
}

GrowthConstants estimate_growth_constants(const ErmDataset& data, const Vector& x_star,
                                          std::span<const Vector> probes) {
  std::vector<int> all(data.size());
  std::iota(all.begin(), all.end(), 0);
  GrowthConstants gc;
  gc.M_c = gradient_variance(data, x_star);
  for (const Vector& x : probes) {
    const double v = gradient_variance(data, x);
    const double g2 = minibatch_gradient(data, x, all).squaredNorm();
    if (g2 > 0.0) gc.M_v = std::max(gc.M_v, std::max(0.0, v - gc.M_c) / g2);
  }
  return gc;
}

LogisticProblem make_synthetic_logistic(int n_samples, int dim, std::uint64_t seed) {
  if (n_samples < 1) throw std::invalid_argument("logistic: n_samples must be >= 1");
  if (dim < 1) throw std::invalid_argument("logistic: dim must be >= 1");
  Rng rng = make_stream(seed, 0, StreamPurpose::fixture);
  std::normal_distribution<double> normal(0.0, 1.0);

  auto data = std::make_shared<ErmDataset>();
  data->features.resize(n_samples, dim);
  data->labels.resize(n_samples);
  data->reg = 1e-3;
  const Vector w_true = gaussian_vector(dim, rng);
  for (int i = 0; i < n_samples; ++i) {
    for (int j = 0; j < dim; ++j) data->features(i, j) = normal(rng);
    const double score = data->features.row(i).dot(w_true) / std::sqrt(static_cast<double>(dim)) +
                         0.5 * normal(rng);
    data->labels[i] = score >= 0.0 ? 1.0 : -1.0;
  }

  const Eigen::SelfAdjointEigenSolver<Matrix> eig(data->features.transpose() * data->features /
                                                  static_cast<double>(n_samples),
                                                  Eigen::EigenvaluesOnly);
  const double curvature = 0.25 * eig.eigenvalues().maxCoeff() + data->reg;

  auto indices = std::make_shared<std::vector<int>>(n_samples);
  std::iota(indices->begin(), indices->end(), 0);

  LogisticProblem out;
  ProblemInstance& p = out.problem;
  p.name = "logistic";
  p.dim = dim;
  std::shared_ptr<const ErmDataset> cdata = data;
  p.value_fn = [cdata, indices](const Vector& x) { return minibatch_value(*cdata, x, *indices); };
  p.grad_fn = [cdata, indices](const Vector& x) { return minibatch_gradient(*cdata, x, *indices); };
  p.lipschitz_L = curvature;
  p.strong_convexity_beta = data->reg;
  p.class_tag = FunctionClass::strongly_convex;
  p.x0 = gaussian_vector(dim, rng);

  const Vector x_star = solve_minimizer(p, Vector::Zero(dim), 1e-12);
  p.x_star = x_star;
  p.phi_star = p.value_fn(x_star);
  p.diameter_D = 2.0 * (p.x0 - x_star).norm();

  const std::vector<Vector> probes = probe_ball(p.x0, 3.0, 100, seed);
  const GrowthConstants gc = estimate_growth_constants(*data, x_star, probes);
  data->M_c = gc.M_c;
  data->M_v = gc.M_v;
  out.dataset = std::move(cdata);
  return out;
}

Vector solve_minimizer(const ProblemInstance& problem, const Vector& start, double grad_tol,
                       int max_iters) {
  const double step = 1.0 / problem.lipschitz_L;
  Vector x = start;
  Vector y = start;
  double t = 1.0;
  for (int it = 0; it < max_iters; ++it) {
    const Vector gy = problem.grad_fn(y);
    Vector x_next = y - step * gy;
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    if (gy.dot(x_next - x) > 0.0) {
      // Gradient restart: momentum points uphill.
      t = 1.0;
      y = x_next;
    } else {
      y = x_next + ((t - 1.0) / t_next) * (x_next - x);
      t = t_next;
    }
    x = std::move(x_next);
    if (problem.grad_fn(x).norm() <= grad_tol) break;
  }
  return x;
}

}  // namespace aloe
