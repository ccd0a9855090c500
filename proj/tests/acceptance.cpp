// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "aloe/csv.hpp"
#include "aloe/harness.hpp"

using namespace aloe;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v) { return format_double(v); }

// Ill-conditioned quadratic shared by several criteria: spectrum [0.1, 10],
// x0 = ones.
ExperimentConfig quadratic_base() {
  ExperimentConfig c;
  c.problem.kind = ProblemKind::quadratic;
  c.problem.dim = 10;
  c.problem.lambda_min = 0.1;
  c.problem.lambda_max = 10.0;
  return c;
}

// ---------------------------------------------------------------------------

Outcome exact_oracle_reduction() {
  const auto t0 = Clock::now();
  ExperimentConfig c = quadratic_base();
  c.stopping = {FunctionClass::nonconvex, 1e-6, std::nullopt};
  const Fixture fx = build_fixture(c);
  const TheoryConstants th = compute_theory(theory_inputs(c, fx));
  if (!th.admissible) return {false, "theory inadmissible"};
  if (th.p != 1.0) return {false, "p = " + fmt(th.p) + " for exact oracles"};

  // 2R is far beyond int range at eps = 1e-6. Streams are keyed per
  // iteration, so a longer budget only extends the same path; double until
  // the tolerance is reached.
  const double cap = std::min(std::ceil(2.0 * th.R) + 2.0, 1e6);
  AloeParams params = c.aloe;
  std::optional<int> T;
  Trace tr;
  for (double budget = 1024.0; !T; budget *= 2.0) {
    params.max_iters = static_cast<int>(std::min(budget, cap));
    tr = aloe_run(*fx.problem, *fx.zeroth, *fx.first, params, 1);
    T = stopping_time(tr, *fx.problem, c.stopping);
    if (params.max_iters == static_cast<int>(cap)) break;
  }
  const double secs = seconds_since(t0);
  if (!T) return {false, "did not reach the gradient tolerance within the budget"};
  const Vector xT = *T < static_cast<int>(tr.records.size()) ? tr.records[*T].x : tr.x_final;
  const double gnorm = eval_gradient(*fx.problem, xT).norm();
  const bool ok = gnorm <= 1e-6 && *T <= 2.0 * th.R + 1.0 && secs < 1.0;
  return {ok, "T = " + std::to_string(*T) + ", 2R + 1 = " + fmt(2.0 * th.R + 1.0) +
                  ", |grad| = " + fmt(gnorm) + ", " + fmt(secs) + " s"};
}

// ---------------------------------------------------------------------------

Outcome path_lemma_suite() {
  const auto t0 = Clock::now();
  struct ClassCase {
    ProblemKind kind;
    FunctionClass cls;
    double eps;
  };
  const ClassCase classes[] = {{ProblemKind::cauchy, FunctionClass::nonconvex, 1e-3},
                               {ProblemKind::pseudo_huber, FunctionClass::convex, 1e-3},
                               {ProblemKind::quadratic, FunctionClass::strongly_convex, 1e-4}};
  const ZerothOracleSpec noises[] = {{0.0, 0.0, 0.0, NoiseMode::exact, 0.0},
                                     {1e-4, 0.0, 0.0, NoiseMode::bounded, 0.0},
                                     {1e-4, 1e-4, 1e-4, NoiseMode::subexponential, 5e-5}};
  long long paths = 0, l2 = 0, c1 = 0, l3 = 0, l4 = 0;
  std::uint64_t seed = 1;
  for (const auto& cc : classes) {
    for (const auto& z : noises) {
      ExperimentConfig c = quadratic_base();
      c.problem.kind = cc.kind;
      c.problem.dim = 8;
      c.zeroth.spec = z;
      c.first.spec = {0.0, 0.5, 0.2};
      c.stopping = {cc.cls, cc.eps, std::nullopt};
      c.theory.require_admissible = false;
      c.n_trials = 112;
      c.budget = 300;
      c.base_seed = seed;
      seed += 1000;
      const TrialSummary s = run_trials(c);
      paths += static_cast<long long>(s.trials.size());
      l2 += s.lemma2_pass;
      c1 += s.corollary1_pass;
      l3 += s.lemma3_pass;
      l4 += s.lemma4_pass;
    }
  }
  const bool ok = paths >= 1000 && l2 == paths && c1 == paths && l3 == paths && l4 == paths;
  std::ostringstream o;
  o << paths << " paths; large-step " << l2 << ", corollary " << c1 << ", small-step " << l3
    << ", good-iteration " << l4 << ", " << fmt(seconds_since(t0)) << " s";
  return {ok, o.str()};
}

// ---------------------------------------------------------------------------

// Noisy quadratic for the tail checks. The step cap 1.25 keeps the step-size
// factor (1 + kappa alpha_max) small enough for an admissible eps.
ExperimentConfig tail_fixture() {
  ExperimentConfig c = quadratic_base();
  c.aloe.alpha_max = 1.25;
  c.first.spec = {0.0, 1.0, 0.1};
  c.n_trials = 1000;
  return c;
}

Outcome check_tails(ExperimentConfig c, double time_limit) {
  const auto t0 = Clock::now();
  const Fixture fx = build_fixture(c);
  const TheoryConstants th = compute_theory(theory_inputs(c, fx));
  if (!th.admissible) return {false, "theory inadmissible: " + th.violations.front()};
  c.budget = static_cast<int>(4 * th.t_min);
  c.checkpoints = {th.t_min, 2 * th.t_min, 4 * th.t_min};
  const TrialSummary s = run_trials(c);
  const double secs = seconds_since(t0);
  bool ok = secs < time_limit && s.checkpoints.size() == 3;
  std::ostringstream o;
  o << "eps " << fmt(c.stopping.eps) << ", p " << fmt(th.p) << ", t_min " << th.t_min;
  for (const auto& r : s.checkpoints) {
    ok = ok && r.dominates;
    o << "; t=" << r.t << " emp " << fmt(r.empirical_tail) << " (hi " << fmt(r.wilson.hi)
      << ") vs bound " << fmt(r.theory_bound);
  }
  o << "; " << fmt(secs) << " s";
  return {ok, o.str()};
}

Outcome bounded_noise_tails() {
  ExperimentConfig c = tail_fixture();
  c.zeroth.spec = {1e-3, 0.0, 0.0, NoiseMode::bounded, 0.0};
  c.stopping = {FunctionClass::nonconvex, 4.0, std::nullopt};
  return check_tails(c, 120.0);
}

Outcome subexponential_noise_tails() {
  ExperimentConfig c = tail_fixture();
  c.zeroth.spec = {1e-3, 1e-3, 1e-3, NoiseMode::subexponential, 5e-4};
  c.stopping = {FunctionClass::nonconvex, 8.0, std::nullopt};
  c.theory.s = 0.01;
  c.theory.p_source = PSource::noise_law;
  return check_tails(c, 300.0);
}

// ---------------------------------------------------------------------------

Outcome strongly_convex_scaling() {
  const auto t0 = Clock::now();
  double median[2], R[2];
  const double eps[2] = {1e-2, 1e-4};
  for (int i = 0; i < 2; ++i) {
    ExperimentConfig c = quadratic_base();
    c.zeroth.spec = {1e-9, 0.0, 0.0, NoiseMode::bounded, 0.0};
    c.first.spec = {0.0, 0.1, 0.1};
    c.stopping = {FunctionClass::strongly_convex, eps[i], std::nullopt};
    c.n_trials = 200;
    c.budget = 3000;
    c.base_seed = 500;
    const TrialSummary s = run_trials(c);
    std::vector<double> T;
    for (const auto& t : s.trials) T.push_back(t.T_eps ? *t.T_eps : INFINITY);
    std::sort(T.begin(), T.end());
    median[i] = 0.5 * (T[99] + T[100]);
    R[i] = s.theory.R;
  }
  if (!std::isfinite(median[1])) return {false, "median stopping time censored"};
  const double ratio = (median[1] / median[0]) / (R[1] / R[0]);
  const bool ok = ratio >= 1.0 / 3.0 && ratio <= 3.0;
  std::ostringstream o;
  o << "median T " << fmt(median[0]) << " -> " << fmt(median[1]) << ", R " << fmt(R[0]) << " -> "
    << fmt(R[1]) << ", ratio of ratios " << fmt(ratio) << ", " << fmt(seconds_since(t0)) << " s";
  return {ok, o.str()};
}

// ---------------------------------------------------------------------------

struct SubOutcome {
  bool pass;
  std::string text;
};

SubOutcome minibatch_gradient_size() {
  const double delta = 0.1, eps_g = 0.1, kappa = 1.0;
  const auto lp = make_synthetic_logistic(2048, 10, 1);
  const auto& d = *lp.dataset;
  const auto probes = default_probes(lp.problem, AloeParams{}, 5, 1.0, 11);
  long long N = 1;
  for (const auto& p : probes)
    N = std::max(N, prop2_sample_size(d.M_c, d.M_v, delta, eps_g, kappa, p.alpha).value());
  const MinibatchFirstOracle first(lp.dataset, static_cast<int>(N));
  const MinibatchZerothOracle zeroth(lp.dataset, 0);
  const auto rep = certify_oracles(lp.problem, zeroth, ZerothOracleSpec{}, first,
                                   FirstOracleSpec{eps_g, kappa, delta}, probes, 10000, 21);
  bool ok = true;
  double worst = 1.0;
  for (const auto& p : rep.probes) {
    ok = ok && p.accuracy_pass;
    worst = std::min(worst, static_cast<double>(p.accurate) / static_cast<double>(p.queries));
  }
  return {ok, "(a) N " + std::to_string(N) + ", min accuracy freq " + fmt(worst)};
}

SubOutcome minibatch_value_envelope() {
  const int N = 64;
  const auto lp = make_synthetic_logistic(2048, 10, 1);
  const auto& d = *lp.dataset;
  const auto probes = default_probes(lp.problem, AloeParams{}, 5, 1.0, 12);
  // Per-sample loss deviations are bounded, hence sub-Gaussian with half the
  // range as parameter; take the worst probe for each constant.
  double nu_hat = 0.0, eps_hat = 0.0;
  for (const auto& p : probes) {
    double lo = INFINITY, hi = -INFINITY, m = 0.0, ss = 0.0;
    for (int i = 0; i < d.size(); ++i) {
      const double l = d.loss(p.x, i);
      lo = std::min(lo, l);
      hi = std::max(hi, l);
      m += l;
    }
    m /= d.size();
    for (int i = 0; i < d.size(); ++i) ss += (d.loss(p.x, i) - m) * (d.loss(p.x, i) - m);
    nu_hat = std::max(nu_hat, 0.5 * (hi - lo));
    eps_hat = std::max(eps_hat, std::sqrt(ss / d.size()));
  }
  const SubexpParams sp = prop1_subexp_params(nu_hat, 0.0, eps_hat, N);
  const ZerothOracleSpec zspec{sp.eps_f, sp.nu, sp.b, NoiseMode::subexponential, 0.0};
  const MinibatchZerothOracle zeroth(lp.dataset, N);
  const MinibatchFirstOracle first(lp.dataset, 0);
  const auto rep = certify_oracles(lp.problem, zeroth, zspec, first, FirstOracleSpec{}, probes,
                                   10000, 22);
  bool ok = true;
  double worst = -INFINITY;
  for (const auto& p : rep.probes) {
    ok = ok && p.mgf_pass && p.mean_pass;
    worst = std::max(worst, p.mgf_worst_excess);
  }
  return {ok, "(b) N " + std::to_string(N) + ", nu = b = " + fmt(sp.nu) + ", worst MGF excess " +
                  fmt(worst)};
}

SubOutcome smoothing_oracle() {
  const double delta = 0.1, kappa = 1.0, eps_f = 1e-4;
  const int queries = 2000;
  auto problem = std::make_shared<ProblemInstance>(make_strongly_convex_quadratic(10, 0.1, 10.0, 1));
  const double L = problem->lipschitz_L;
  const double sigma = std::sqrt(eps_f / L);
  auto zeroth = std::make_shared<SyntheticZerothOracle>(
      problem, ZerothOracleSpec{eps_f, 0.0, 0.0, NoiseMode::bounded, 0.0});
  const auto probes = default_probes(*problem, AloeParams{}, 5, 1.0, 13);
  bool ok = true;
  double worst_freq = 1.0, worst_bias = 0.0, eps_g = 0.0;
  long long max_N = 0;
  for (std::size_t i = 0; i < probes.size(); ++i) {
    const auto& p = probes[i];
    const Vector grad = eval_gradient(*problem, p.x);
    const Prop3Result r = prop3_params(10, L, sigma, eps_f, delta, kappa, p.alpha, grad.norm());
    eps_g = r.eps_g;
    if (!r.N) return {false, "(c) no finite direction count"};
    max_N = std::max(max_N, *r.N);
    const GsgFirstOracle first(zeroth, sigma, static_cast<int>(*r.N));
    Rng rng = make_stream(23, i, StreamPurpose::probe);
    long long hits = 0;
    Vector mean = Vector::Zero(10);
    for (int q = 0; q < queries; ++q) {
      const Vector g = first.query(p.x, p.alpha, rng);
      hits += accuracy_event(g, grad, r.eps_g, kappa, p.alpha);
      mean += g / queries;
    }
    const double upper = wilson_interval(hits, queries, kZ99OneSided).hi;
    const double bias = (mean - grad).norm();
    ok = ok && upper >= 1.0 - delta && bias <= r.eps_g / 2.0;
    worst_freq = std::min(worst_freq, static_cast<double>(hits) / queries);
    worst_bias = std::max(worst_bias, bias);
  }
  return {ok, "(c) eps_g " + fmt(eps_g) + ", N up to " + std::to_string(max_N) +
                  ", min accuracy freq " + fmt(worst_freq) + ", max bias " + fmt(worst_bias)};
}

Outcome oracle_certifications() {
  const auto t0 = Clock::now();
  const SubOutcome parts[] = {minibatch_gradient_size(), minibatch_value_envelope(),
                              smoothing_oracle()};
  Outcome out{true, ""};
  for (const auto& p : parts) {
    out.pass = out.pass && p.pass;
    out.detail += p.text + (p.pass ? "" : " [fail]") + "; ";
  }
  out.detail += fmt(seconds_since(t0)) + " s";
  return out;
}

// ---------------------------------------------------------------------------

double binomial_cdf(int t, double p, int k) {
  double total = 0.0;
  for (int j = 0; j <= k; ++j)
    total += std::exp(std::lgamma(t + 1.0) - std::lgamma(j + 1.0) - std::lgamma(t - j + 1.0) +
                      j * std::log(p) + (t - j) * std::log1p(-p));
  return total;
}

Outcome bound_formula_cross_check() {
  const auto t0 = Clock::now();
  int checked = 0, held = 0;
  double tightest = INFINITY;
  for (double p : {0.7, 0.8, 0.9}) {
    for (double gap : {0.3, 0.2, 0.1}) {
      const double ph = p - gap;
      for (int t : {5, 10, 20}) {
        const double exact = binomial_cdf(t, p, static_cast<int>(std::floor(ph * t + 1e-12)));
        const double bound = azuma_tail(p, ph, t);
        ++checked;
        held += exact <= bound;
        tightest = std::min(tightest, bound - exact);
      }
    }
  }
  // Exp(1) - 1 is sub-exponential with nu = b = 2. The mean of t draws is
  // Gamma(t, 1) / t, sampled directly.
  const int samples = 1000000;
  const double t = 1e4;
  Rng rng = make_stream(31, 0, StreamPurpose::probe);
  std::gamma_distribution<double> gamma(t, 1.0);
  std::vector<double> means(samples);
  for (auto& m : means) m = gamma(rng) / t;
  bool bern_ok = true;
  std::ostringstream o;
  for (double s : {0.05, 0.1}) {
    long long exceed = 0;
    for (double m : means) exceed += m > 1.0 + s;
    const double emp = static_cast<double>(exceed) / samples;
    const double bound = bernstein_tail(s, t, 2.0, 2.0);
    bern_ok = bern_ok && emp <= bound;
    o << "; s=" << s << " emp " << fmt(emp) << " vs " << fmt(bound);
  }
  const bool ok = held == checked && bern_ok;
  return {ok, "azuma " + std::to_string(held) + "/" + std::to_string(checked) +
                  " (min slack " + fmt(tightest) + ")" + o.str() + ", " +
                  fmt(seconds_since(t0)) + " s"};
}

// ---------------------------------------------------------------------------

double best_loss(const Trace& t) {
  double m = t.phi_final;
  for (const auto& r : t.records) m = std::min(m, r.phi_curr);
  return m;
}

Outcome estimator_robustness() {
  const auto t0 = Clock::now();
  const int epochs = 50, batch = 128, samples = 2048;
  ExperimentConfig c;
  c.problem.kind = ProblemKind::logistic;
  c.problem.dim = 10;
  c.problem.samples = samples;
  c.zeroth.kind = ZerothKind::minibatch;
  c.first.kind = FirstKind::minibatch;
  const Fixture full = build_fixture(c);
  AloeParams det_params;
  det_params.max_iters = epochs;  // one full pass per iteration
  const double phi_det =
      best_loss(aloe_run(*full.problem, *full.zeroth, *full.first, det_params, 7));

  c.zeroth.batch_size = batch;
  c.first.batch_size = batch;
  const Fixture mb = build_fixture(c);
  EstimatorConfig est;
  est.refresh_period = default_refresh_period(samples, batch);
  AloeParams params;
  params.max_iters = epochs * est.refresh_period;

  const char* names[] = {"estimated", "0.5x", "1x", "2x"};
  const double mult[] = {0.0, 0.5, 1.0, 2.0};
  int wins[4] = {0, 0, 0, 0};
  double worst[4] = {0, 0, 0, 0};
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng = make_stream(seed, 0, StreamPurpose::eps_estimate);
    const double at_x0 = estimate_eps_f(*mb.zeroth, mb.problem->x0, est, rng);
    for (int v = 0; v < 4; ++v) {
      AloeParams p = params;
      std::optional<EpochEstimator> schedule;
      if (v == 0) schedule.emplace(*mb.zeroth, est, seed);
      else p.eps_f_input = mult[v] * at_x0;
      const Trace tr = aloe_run(*mb.problem, *mb.zeroth, *mb.first, p, seed,
                                schedule ? &*schedule : nullptr);
      const double gap = (best_loss(tr) - phi_det) / phi_det;
      wins[v] += gap <= 0.05;
      worst[v] = std::max(worst[v], gap);
    }
  }
  bool ok = true;
  std::ostringstream o;
  o << "full-batch loss " << fmt(phi_det);
  for (int v = 0; v < 4; ++v) {
    ok = ok && wins[v] >= 18;
    o << "; " << names[v] << " " << wins[v] << "/20 (worst gap " << fmt(worst[v]) << ")";
  }
  o << "; " << fmt(seconds_since(t0)) << " s";
  return {ok, o.str()};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"1 exact-oracle reduction", exact_oracle_reduction},
      {"2 path-lemma suite", path_lemma_suite},
      {"3 bounded-noise tail", bounded_noise_tails},
      {"4 sub-exponential-noise tail", subexponential_noise_tails},
      {"5 strongly convex scaling", strongly_convex_scaling},
      {"6 oracle certifications", oracle_certifications},
      {"7 bound-formula cross-check", bound_formula_cross_check},
      {"8 eps_f estimator robustness", estimator_robustness},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
  }
  std::cout << (8 - failed) << "/8 criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
