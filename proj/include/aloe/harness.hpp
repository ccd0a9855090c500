#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "aloe/aloe.hpp"
#include "aloe/eps_estimator.hpp"
#include "aloe/instrumentation.hpp"
#include "aloe/oracles.hpp"
#include "aloe/problem_suite.hpp"
#include "aloe/theory.hpp"

namespace aloe {

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

enum class ProblemKind { quadratic, cauchy, pseudo_huber, logistic };
std::string_view to_string(ProblemKind k);
ProblemKind parse_problem_kind(std::string_view name);

struct ProblemConfig {
  ProblemKind kind = ProblemKind::quadratic;
  int dim = 10;
  double lambda_min = 0.1;  // quadratic spectrum
  double lambda_max = 1.0;
  int samples = 2048;       // logistic
  double x0_scale = 1.0;    // multiplies the fixture's default starting point
  std::uint64_t seed = 1;
};

enum class ZerothKind { synthetic, minibatch };
enum class FirstKind { synthetic, minibatch, gsg };

struct ZerothConfig {
  ZerothKind kind = ZerothKind::synthetic;
  /// Declared constants. For the synthetic kind they also define the law;
  /// for mini-batches they are what the theory is told.
  ZerothOracleSpec spec;
  int batch_size = 0;  // minibatch; 0 means the full dataset
};

struct FirstConfig {
  FirstKind kind = FirstKind::synthetic;
  FirstOracleSpec spec;
  double failure_scale = 10.0;
  double failure_offset = 10.0;
  int batch_size = 0;      // minibatch
  double sigma = 1e-3;     // gsg
  int directions = 10;     // gsg
};

struct TheoryConfig {
  double s = 0.0;
  std::optional<double> p_hat;
  std::optional<double> eta;
  PSource p_source = PSource::prop;
  bool strongly_convex_augmented = true;
  bool require_admissible = true;
};

struct CertifyConfig {
  bool enabled = false;
  bool required = false;
  int probes = 5;
  int queries = 10000;
  double probe_radius = 1.0;
};

struct ExperimentConfig {
  ProblemConfig problem;
  ZerothConfig zeroth;
  FirstConfig first;
  AloeParams aloe;                    // max_iters is replaced by budget
  std::optional<double> eps_f_input;  // defaults to zeroth.spec.eps_f
  StoppingSpec stopping;
  std::optional<EstimatorConfig> estimator;
  int n_trials = 100;
  int budget = 1000;
  std::uint64_t base_seed = 1;
  std::vector<long long> checkpoints;  // empty: t_min, 2 t_min, 4 t_min and budget
  TheoryConfig theory;
  CertifyConfig certify;
  int jobs = 0;  // 0: hardware concurrency
  bool write_traces = false;

  /// Every violated constraint, in a stable order. Empty when valid.
  std::vector<std::string> validate() const;
};

// ---------------------------------------------------------------------------
// Fixtures
// ---------------------------------------------------------------------------

struct Fixture {
  std::shared_ptr<const ProblemInstance> problem;
  std::shared_ptr<const ErmDataset> dataset;  // logistic only
  std::shared_ptr<const ZerothOracle> zeroth;
  std::shared_ptr<const FirstOracle> first;
};

Fixture build_fixture(const ExperimentConfig& config);

/// Theory inputs implied by a configuration and its fixture.
TheoryInputs theory_inputs(const ExperimentConfig& config, const Fixture& fixture);

// ---------------------------------------------------------------------------
// Statistics
// ---------------------------------------------------------------------------

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

/// Wilson score interval for k successes in n trials at normal quantile z.
Interval wilson_interval(long long k, long long n, double z);

inline constexpr double kZ99TwoSided = 2.5758293035489004;
inline constexpr double kZ99OneSided = 2.3263478740408408;

/// Fraction of samples with T <= t; censored samples never count.
double empirical_tail(const std::vector<std::optional<int>>& samples, long long t);

// ---------------------------------------------------------------------------
// Trials
// ---------------------------------------------------------------------------

struct TrialResult {
  std::uint64_t seed = 0;
  std::optional<int> T_eps;
  double frac_true = 0.0;
  double frac_success = 0.0;
  long long true_count = 0;
  long long iterations = 0;
  LemmaVerdicts verdicts;
  std::vector<EpochEstimator::Entry> eps_history;
  std::optional<Trace> trace;  // kept only when write_traces is set
};

struct CheckpointRow {
  long long t = 0;
  double empirical_tail = 0.0;
  double theory_bound = 0.0;
  Interval wilson;
  bool dominates = true;  // wilson.hi >= theory_bound
};

struct ProbeCertification {
  int probe = 0;
  double alpha = 0.0;
  long long queries = 0;
  long long accurate = 0;
  double accuracy_upper = 1.0;  // one-sided 99% Wilson upper bound
  bool accuracy_pass = true;
  double mean_error = 0.0;
  double mean_error_se = 0.0;
  bool mean_pass = true;
  double mgf_worst_excess = 0.0;  // max over the lambda grid of (MC - 3 se) - envelope
  bool mgf_pass = true;
};

struct CertificationReport {
  std::vector<ProbeCertification> probes;
  bool pass = true;
};

struct TrialSummary {
  TheoryConstants theory;
  std::vector<TrialResult> trials;
  std::vector<CheckpointRow> checkpoints;
  long long lemma2_pass = 0;
  long long corollary1_pass = 0;
  long long lemma3_pass = 0;
  long long lemma4_pass = 0;
  long long pooled_true = 0;
  long long pooled_iterations = 0;
  Interval pooled_true_wilson;
  bool true_fraction_ok = true;
  bool lemmas_ok = true;
  bool tails_ok = true;
  std::optional<CertificationReport> certification;

  /// Human-readable descriptions of every failed hard check.
  std::vector<std::string> failures() const;
};

/// Runs one trial with seed base_seed + index.
TrialResult run_single_trial(const ExperimentConfig& config, const Fixture& fixture,
                             const TheoryConstants& theory, int index);

/// Runs all trials on a worker pool and folds results in seed order.
/// Throws InadmissibleError when the theory gate fails and
/// config.theory.require_admissible is set, and std::invalid_argument for an
/// invalid config.
TrialSummary run_trials(const ExperimentConfig& config);

// ---------------------------------------------------------------------------
// Oracle certification
// ---------------------------------------------------------------------------

struct ProbePoint {
  Vector x;
  double alpha = 1.0;
};

/// x0, x* when known, then points drawn from a ball around x0; step sizes
/// alpha0 gamma^{i - 1}.
std::vector<ProbePoint> default_probes(const ProblemInstance& problem, const AloeParams& aloe,
                                       int count, double radius, std::uint64_t seed);

/// One-sided binomial test of the gradient accuracy event, the mean-error
/// bound, and the MGF envelope on 20 values of lambda in (0, 1/b].
CertificationReport certify_oracles(const ProblemInstance& problem, const ZerothOracle& zeroth,
                                    const ZerothOracleSpec& zspec, const FirstOracle& first,
                                    const FirstOracleSpec& fspec,
                                    const std::vector<ProbePoint>& probes, int queries,
                                    std::uint64_t seed);

}  // namespace aloe
