#include "aloe/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace aloe {

std::string_view to_string(NoiseMode m) {
  switch (m) {
    case NoiseMode::exact:
      return "exact";
    case NoiseMode::bounded:
      return "bounded";
    case NoiseMode::subexponential:
      return "subexponential";
  }
  return "unknown";
}

NoiseMode parse_noise_mode(std::string_view name) {
  if (name == "exact") return NoiseMode::exact;
  if (name == "bounded") return NoiseMode::bounded;
  if (name == "subexponential" || name == "subexp") return NoiseMode::subexponential;
  throw std::invalid_argument("unknown noise mode '" + std::string(name) + "'");
}

void ZerothOracleSpec::validate() const {
  if (!(eps_f >= 0.0) || !(nu >= 0.0) || !(b >= 0.0) || !(mean_slack >= 0.0))
    throw std::invalid_argument("zeroth oracle: eps_f, nu, b and mean_slack must be >= 0");
  if (mode == NoiseMode::exact && (eps_f != 0.0 || nu != 0.0 || b != 0.0))
    throw std::invalid_argument("zeroth oracle: exact mode requires eps_f = nu = b = 0");
  if (mode == NoiseMode::subexponential && mean_slack > eps_f)
    throw std::invalid_argument("zeroth oracle: mean_slack exceeds eps_f");
}

void FirstOracleSpec::validate() const {
  if (!(eps_g >= 0.0) || !(kappa >= 0.0))
    throw std::invalid_argument("first-order oracle: eps_g and kappa must be >= 0");
  if (!(delta >= 0.0 && delta < 1.0))
    throw std::invalid_argument("first-order oracle: delta must lie in [0, 1)");
}

bool accuracy_event(const Vector& g, const Vector& grad, double eps_g, double kappa, double alpha) {
  return (g - grad).norm() <= std::max(eps_g, kappa * alpha * g.norm());
}

OracleQueryLog make_zeroth_log(const Vector& x, double estimate, double true_value) {
  OracleQueryLog log;
  log.x = x;
  log.estimate = estimate;
  log.true_value = true_value;
  log.error_magnitude = std::abs(estimate - true_value);
  return log;
}

OracleQueryLog make_first_log(const Vector& x, double alpha, const Vector& g, const Vector& grad,
                              const FirstOracleSpec& spec) {
  OracleQueryLog log;
  log.x = x;
  log.alpha_input = alpha;
  log.estimate = g;
  log.true_value = grad;
  log.error_magnitude = (g - grad).norm();
  log.accuracy_event = accuracy_event(g, grad, spec.eps_g, spec.kappa, alpha);
  return log;
}

namespace {

double subexp_scale(double nu, double b, double target_mean) {
  return std::min({b / 2.0, nu / std::sqrt(2.0), target_mean});
}

}  // namespace

double sample_one_sided_subexp(double nu, double b, double target_mean, Rng& rng) {
  if (nu < 0.0 || b < 0.0 || target_mean < 0.0)
    throw std::invalid_argument("sample_one_sided_subexp: parameters must be >= 0");
  const double s = subexp_scale(nu, b, target_mean);
  const double shift = target_mean - s;
  if (s <= 0.0) return target_mean;
  std::exponential_distribution<double> expo(1.0 / s);
  return shift + expo(rng);
}

double sample_error_magnitude(const ZerothOracleSpec& spec, Rng& rng) {
  switch (spec.mode) {
    case NoiseMode::exact:
      return 0.0;
    case NoiseMode::bounded: {
      std::uniform_real_distribution<double> unif(0.0, spec.eps_f);
      return std::min(unif(rng), spec.eps_f);
    }
    case NoiseMode::subexponential:
      return sample_one_sided_subexp(spec.nu, spec.b, spec.eps_f - spec.mean_slack, rng);
  }
  return 0.0;
}

double synthetic_pair_exceedance(const ZerothOracleSpec& spec) {
  if (spec.mode != NoiseMode::subexponential) return 0.0;
  const double target = spec.eps_f - spec.mean_slack;
  const double s = subexp_scale(spec.nu, spec.b, target);
  if (s <= 0.0) return 0.0;
  const double c = 2.0 * spec.eps_f - 2.0 * (target - s);
  if (c <= 0.0) return 1.0;
  return std::exp(-c / s) * (1.0 + c / s);
}

namespace {

double signed_noise(const ZerothOracleSpec& spec, Rng& rng) {
  const double e = sample_error_magnitude(spec, rng);
  std::bernoulli_distribution coin(0.5);
  return coin(rng) ? e : -e;
}

}  // namespace

std::pair<double, OracleQueryLog> zeroth_query(const ProblemInstance& problem,
                                               const ZerothOracleSpec& spec, const Vector& x,
                                               Rng& rng) {
  const double phi = eval_value(problem, x);
  const double f = phi + signed_noise(spec, rng);
  return {f, make_zeroth_log(x, f, phi)};
}

SyntheticZerothOracle::SyntheticZerothOracle(std::shared_ptr<const ProblemInstance> problem,
                                             ZerothOracleSpec spec)
    : problem_(std::move(problem)), spec_(spec) {
  spec_.validate();
}

double SyntheticZerothOracle::query(const Vector& x, Rng& rng) const {
  return eval_value(*problem_, x) + signed_noise(spec_, rng);
}

SyntheticFirstOracle::SyntheticFirstOracle(std::shared_ptr<const ProblemInstance> problem,
                                           FirstOracleSpec spec, double failure_scale,
                                           double failure_offset)
    : problem_(std::move(problem)),
      spec_(spec),
      failure_scale_(failure_scale),
      failure_offset_(failure_offset) {
  spec_.validate();
}

Vector SyntheticFirstOracle::query(const Vector& x, double alpha, Rng& rng) const {
  const Vector grad = eval_gradient(*problem_, x);
  const double gnorm = grad.norm();
  std::bernoulli_distribution fail(spec_.delta);
  const bool failed = fail(rng);
  const Vector dir = random_unit_vector(grad.size(), rng);
  if (failed) return grad + (failure_scale_ * gnorm + failure_offset_) * dir;
  // ||v|| <= ka/(1+ka) ||grad|| gives ||v|| <= ka (||grad|| - ||v||) <= ka ||g||.
  const double ka = spec_.kappa * alpha;
  const double radius = std::max(spec_.eps_g, ka / (1.0 + ka) * gnorm);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  return grad + (unif(rng) * radius) * dir;
}

std::vector<int> sample_batch(int dataset_size, int size, Rng& rng) {
  if (dataset_size <= 0 || size <= 0) throw std::invalid_argument("sample_batch: empty batch");
  std::uniform_int_distribution<int> pick(0, dataset_size - 1);
  std::vector<int> batch(static_cast<std::size_t>(size));
  for (auto& i : batch) i = pick(rng);
  return batch;
}

namespace {

std::vector<int> all_indices(int n) {
  std::vector<int> idx(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
  return idx;
}

}  // namespace

MinibatchZerothOracle::MinibatchZerothOracle(std::shared_ptr<const ErmDataset> data,
                                             int batch_size)
    : data_(std::move(data)), batch_size_(batch_size) {}

double MinibatchZerothOracle::query(const Vector& x, Rng& rng) const {
  const auto batch =
      batch_size_ > 0 ? sample_batch(data_->size(), batch_size_, rng) : all_indices(data_->size());
  return minibatch_value(*data_, x, batch);
}

MinibatchFirstOracle::MinibatchFirstOracle(std::shared_ptr<const ErmDataset> data, int batch_size)
    : data_(std::move(data)), batch_size_(batch_size) {}

Vector MinibatchFirstOracle::query(const Vector& x, double /*alpha*/, Rng& rng) const {
  const auto batch =
      batch_size_ > 0 ? sample_batch(data_->size(), batch_size_, rng) : all_indices(data_->size());
  return minibatch_gradient(*data_, x, batch);
}

Vector gsg_gradient(const ZerothOracle& zeroth, const Vector& x, double sigma, int num_directions,
                    Rng& rng) {
  if (!(sigma > 0.0)) throw std::invalid_argument("gsg_gradient: sigma must be > 0");
  if (num_directions <= 0) throw std::invalid_argument("gsg_gradient: need at least one direction");
  const double f0 = zeroth.query(x, rng);
  Vector g = Vector::Zero(x.size());
  for (int i = 0; i < num_directions; ++i) {
    const Vector u = gaussian_vector(x.size(), rng);
    const double fu = zeroth.query(x + sigma * u, rng);
    g += (fu - f0) * u;
  }
  return g / (sigma * num_directions);
}

GsgFirstOracle::GsgFirstOracle(std::shared_ptr<const ZerothOracle> zeroth, double sigma,
                               int num_directions)
    : zeroth_(std::move(zeroth)), sigma_(sigma), num_directions_(num_directions) {}

Vector GsgFirstOracle::query(const Vector& x, double /*alpha*/, Rng& rng) const {
  return gsg_gradient(*zeroth_, x, sigma_, num_directions_, rng);
}

SubexpParams prop1_subexp_params(double nu_hat, double b_hat, double eps_hat, long long N) {
  if (N < 1) throw std::invalid_argument("prop1_subexp_params: N must be positive");
  const double rootN = std::sqrt(static_cast<double>(N));
  const double e2 = std::exp(2.0);
  SubexpParams out;
  out.eps_f = eps_hat / rootN;
  out.nu = 8.0 * e2 * std::max(nu_hat / rootN, b_hat);
  out.b = out.nu;
  return out;
}

namespace {

std::optional<long long> ceil_count(double value) {
  if (!std::isfinite(value)) return std::nullopt;
  if (value > static_cast<double>(std::numeric_limits<long long>::max())) return std::nullopt;
  return std::max<long long>(1, static_cast<long long>(std::ceil(value)));
}

// a / b^2 with the conventions 0 / 0 = 0 and a / 0 = inf for a > 0.
double ratio_sq(double a, double b) {
  if (a == 0.0) return 0.0;
  if (b == 0.0) return std::numeric_limits<double>::infinity();
  return a / (b * b);
}

}  // namespace

std::optional<long long> prop2_sample_size(double M_c, double M_v, double delta, double eps_g,
                                           double kappa, double alpha, SampleSizeForm form,
                                           double grad_norm) {
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("prop2_sample_size: delta must lie in (0, 1)");
  if (M_c < 0.0 || M_v < 0.0) throw std::invalid_argument("prop2_sample_size: M_c, M_v >= 0");
  const double ka = kappa * alpha;
  // Relative-accuracy factor (1 + ka)^2 / (ka)^2, infinite when ka = 0.
  const double rel = ka > 0.0 ? (1.0 + ka) * (1.0 + ka) / (ka * ka)
                              : std::numeric_limits<double>::infinity();
  if (form == SampleSizeForm::max_form) {
    const double a = 2.0 * ratio_sq(M_c, eps_g) / delta;
    const double c = M_v == 0.0 ? 0.0 : 2.0 * M_v * rel / delta;
    return ceil_count(std::max(a, c));
  }
  const double V = M_c + M_v * grad_norm * grad_norm;
  if (V == 0.0) return 1;
  const double abs_term = ratio_sq(1.0, eps_g);
  const double rel_term = grad_norm > 0.0 ? rel / (grad_norm * grad_norm)
                                          : std::numeric_limits<double>::infinity();
  return ceil_count(V / delta * std::min(abs_term, rel_term));
}

Prop3Result prop3_params(int n, double L, double sigma, double eps_f, double delta, double kappa,
                         double alpha, double grad_norm) {
  if (!(sigma > 0.0)) throw std::invalid_argument("prop3_params: sigma must be > 0");
  if (n < 1) throw std::invalid_argument("prop3_params: dimension must be positive");
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("prop3_params: delta must lie in (0, 1)");
  const double dn = static_cast<double>(n);
  const double rn = std::sqrt(dn);
  Prop3Result out;
  out.eps_g = 2.0 * (rn * L * sigma + rn * eps_f / sigma);
  out.sigma_star = L > 0.0 ? std::sqrt(eps_f / L) : 0.0;

  const double V = 0.75 * L * L * sigma * sigma * dn * (dn + 2.0) * (dn + 4.0) +
                   12.0 * eps_f * eps_f * dn / (sigma * sigma) + 18.0 * dn * grad_norm * grad_norm;
  const double first = out.eps_g > 0.0 ? 4.0 / (out.eps_g * out.eps_g)
                                        : std::numeric_limits<double>::infinity();
  const double ka = kappa * alpha;
  const double margin = ka / (1.0 + ka) * grad_norm - out.eps_g / 2.0;
  out.second_regime_available = margin > 0.0;
  const double second = out.second_regime_available ? 1.0 / (margin * margin)
                                                    : std::numeric_limits<double>::infinity();
  const double best = std::min(first, second);
  if (V == 0.0) {
    out.N = 1;
  } else {
    out.N = ceil_count(V / delta * best);
  }
  return out;
}

}  // namespace aloe
