#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <utility>
#include <variant>

#include "aloe/problem_suite.hpp"
#include "aloe/rng.hpp"

namespace aloe {

// ---------------------------------------------------------------------------
// Oracle contracts
// ---------------------------------------------------------------------------

enum class NoiseMode { exact, bounded, subexponential };

std::string_view to_string(NoiseMode m);
NoiseMode parse_noise_mode(std::string_view name);

/// Constants of a zeroth-order oracle: E[e(x)] <= eps_f and the centered
/// one-sided MGF of e(x) is bounded by exp(lambda^2 nu^2 / 2) on [0, 1/b].
struct ZerothOracleSpec {
  double eps_f = 0.0;
  double nu = 0.0;
  double b = 0.0;
  NoiseMode mode = NoiseMode::exact;
  /// Synthetic noise only: the error law has mean eps_f - mean_slack, so
  /// mean_slack is the u = inf_x {eps_f - E e(x)} of the success probability.
  double mean_slack = 0.0;

  void validate() const;
};

/// Constants of a first-order oracle:
///   P(||g - grad phi(x)|| <= max{eps_g, kappa alpha ||g||}) >= 1 - delta.
struct FirstOracleSpec {
  double eps_g = 0.0;
  double kappa = 0.0;
  double delta = 0.0;

  void validate() const;
};

/// One instrumented oracle query. error_magnitude is recomputed from
/// estimate and true_value, never taken from the oracle.
struct OracleQueryLog {
  Vector x;
  double alpha_input = 0.0;
  std::variant<double, Vector> estimate;
  std::variant<double, Vector> true_value;
  double error_magnitude = 0.0;
  std::optional<bool> accuracy_event;
};

OracleQueryLog make_zeroth_log(const Vector& x, double estimate, double true_value);
OracleQueryLog make_first_log(const Vector& x, double alpha, const Vector& g, const Vector& grad,
                              const FirstOracleSpec& spec);

/// ||g - grad|| <= max{eps_g, kappa alpha ||g||}, ties accepted.
bool accuracy_event(const Vector& g, const Vector& grad, double eps_g, double kappa, double alpha);

// ---------------------------------------------------------------------------
// Synthetic noise
// ---------------------------------------------------------------------------

/// Shifted exponential e = m + X with X ~ Exp(scale s), s = min{b/2, nu/sqrt(2),
/// target_mean} and m = target_mean - s. Mean equals target_mean; for
/// lambda in [0, 1/b] the centered MGF is at most exp(lambda^2 nu^2 / 2).
/// nu = b = 0 degenerates to the constant target_mean.
double sample_one_sided_subexp(double nu, double b, double target_mean, Rng& rng);

/// Error magnitude e >= 0 for a synthetic zeroth query (0 in exact mode,
/// Uniform[0, eps_f] in bounded mode, the shifted exponential otherwise).
double sample_error_magnitude(const ZerothOracleSpec& spec, Rng& rng);

/// P(e + e' > 2 eps_f) for two independent synthetic error draws. Zero for the
/// exact and bounded modes, a Gamma(2, s) tail for the shifted exponential.
double synthetic_pair_exceedance(const ZerothOracleSpec& spec);

/// f = phi(x) + sign * e with a fair-coin sign.
std::pair<double, OracleQueryLog> zeroth_query(const ProblemInstance& problem,
                                               const ZerothOracleSpec& spec, const Vector& x,
                                               Rng& rng);

// ---------------------------------------------------------------------------
// Oracle interfaces and implementations
// ---------------------------------------------------------------------------

class ZerothOracle {
 public:
  virtual ~ZerothOracle() = default;
  virtual double query(const Vector& x, Rng& rng) const = 0;
};

class FirstOracle {
 public:
  virtual ~FirstOracle() = default;
  virtual Vector query(const Vector& x, double alpha, Rng& rng) const = 0;
};

class SyntheticZerothOracle final : public ZerothOracle {
 public:
  SyntheticZerothOracle(std::shared_ptr<const ProblemInstance> problem, ZerothOracleSpec spec);
  double query(const Vector& x, Rng& rng) const override;
  const ZerothOracleSpec& spec() const { return spec_; }

 private:
  std::shared_ptr<const ProblemInstance> problem_;
  ZerothOracleSpec spec_;
};

/// Gradient oracle meeting the accuracy event with probability exactly
/// 1 - delta. On the accurate branch the error radius is drawn uniformly in
/// [0, max{eps_g, kappa alpha / (1 + kappa alpha) ||grad||}], which implies the
/// event. On the failure branch it returns grad + A u with u a random unit
/// vector and A = failure_scale ||grad|| + failure_offset.
class SyntheticFirstOracle final : public FirstOracle {
 public:
  SyntheticFirstOracle(std::shared_ptr<const ProblemInstance> problem, FirstOracleSpec spec,
                       double failure_scale = 10.0, double failure_offset = 10.0);
  Vector query(const Vector& x, double alpha, Rng& rng) const override;

 private:
  std::shared_ptr<const ProblemInstance> problem_;
  FirstOracleSpec spec_;
  double failure_scale_;
  double failure_offset_;
};

/// Draws `size` sample indices uniformly with replacement.
std::vector<int> sample_batch(int dataset_size, int size, Rng& rng);

/// Mini-batch loss oracle. batch_size <= 0 means the whole dataset in index
/// order, which reproduces the exact objective bit-for-bit.
class MinibatchZerothOracle final : public ZerothOracle {
 public:
  MinibatchZerothOracle(std::shared_ptr<const ErmDataset> data, int batch_size);
  double query(const Vector& x, Rng& rng) const override;

 private:
  std::shared_ptr<const ErmDataset> data_;
  int batch_size_;
};

class MinibatchFirstOracle final : public FirstOracle {
 public:
  MinibatchFirstOracle(std::shared_ptr<const ErmDataset> data, int batch_size);
  Vector query(const Vector& x, double alpha, Rng& rng) const override;

 private:
  std::shared_ptr<const ErmDataset> data_;
  int batch_size_;
};

/// Gaussian-smoothed forward differences over the given zeroth oracle:
///   g = sum_i [f(x + sigma u_i) - f(x)] u_i / (sigma |U|),
/// with one realized f(x) shared by all directions of a query.
Vector gsg_gradient(const ZerothOracle& zeroth, const Vector& x, double sigma, int num_directions,
                    Rng& rng);

class GsgFirstOracle final : public FirstOracle {
 public:
  GsgFirstOracle(std::shared_ptr<const ZerothOracle> zeroth, double sigma, int num_directions);
  Vector query(const Vector& x, double alpha, Rng& rng) const override;

 private:
  std::shared_ptr<const ZerothOracle> zeroth_;
  double sigma_;
  int num_directions_;
};

// ---------------------------------------------------------------------------
// Sample-size and parameter formulas for the oracle constructions
// ---------------------------------------------------------------------------

struct SubexpParams {
  double eps_f = 0.0;
  double nu = 0.0;
  double b = 0.0;
};

/// Mini-batch zeroth oracle of size N built from per-sample deviations that
/// are (nu_hat, b_hat)-subexponential with standard deviation eps_hat:
/// eps_f = eps_hat / sqrt(N), nu = b = 8 e^2 max{nu_hat / sqrt(N), b_hat}.
SubexpParams prop1_subexp_params(double nu_hat, double b_hat, double eps_hat, long long N);

enum class SampleSizeForm { max_form, tight };

/// Mini-batch size for a first-order oracle under the growth condition.
/// max_form: ceil(max{2 M_c / (delta eps_g^2), 2 M_v (1 + k a)^2 / (delta k^2 a^2)});
/// tight:    ceil((M_c + M_v G^2) / delta * min{1 / eps_g^2, (1 + k a)^2 / (k^2 a^2 G^2)})
/// with G = ||grad phi(x)||. Returns nullopt when the bound is infinite.
std::optional<long long> prop2_sample_size(double M_c, double M_v, double delta, double eps_g,
                                           double kappa, double alpha,
                                           SampleSizeForm form = SampleSizeForm::max_form,
                                           double grad_norm = 0.0);

struct Prop3Result {
  double eps_g = 0.0;
  std::optional<long long> N;     // nullopt if both regimes are unavailable
  bool second_regime_available = false;
  double sigma_star = 0.0;        // sqrt(eps_f / L), minimizes the bias term
};

/// Gaussian-smoothing first-order oracle constants:
/// eps_g = 2 (sqrt(n) L sigma + sqrt(n) eps_f / sigma) and the direction count
/// N = ceil(V / delta * min{4 / eps_g^2, 1 / (k a / (1 + k a) G - eps_g / 2)^2}),
/// V = 3/4 L^2 sigma^2 n (n+2)(n+4) + 12 eps_f^2 n / sigma^2 + 18 n G^2.
Prop3Result prop3_params(int n, double L, double sigma, double eps_f, double delta, double kappa,
                         double alpha, double grad_norm);

}  // namespace aloe
