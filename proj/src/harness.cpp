#include "aloe/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <set>
#include <stdexcept>
#include <thread>

#include "aloe/csv.hpp"

namespace aloe {

std::string_view to_string(ProblemKind k) {
  switch (k) {
    case ProblemKind::quadratic:
      return "quadratic";
    case ProblemKind::cauchy:
      return "cauchy";
    case ProblemKind::pseudo_huber:
      return "pseudo_huber";
    case ProblemKind::logistic:
      return "logistic";
  }
  return "unknown";
}

ProblemKind parse_problem_kind(std::string_view name) {
  if (name == "quadratic") return ProblemKind::quadratic;
  if (name == "cauchy") return ProblemKind::cauchy;
  if (name == "pseudo_huber") return ProblemKind::pseudo_huber;
  if (name == "logistic") return ProblemKind::logistic;
  throw std::invalid_argument("unknown problem kind '" + std::string(name) + "'");
}

namespace {

FunctionClass natural_class(ProblemKind k) {
  switch (k) {
    case ProblemKind::quadratic:
    case ProblemKind::logistic:
      return FunctionClass::strongly_convex;
    case ProblemKind::pseudo_huber:
      return FunctionClass::convex;
    case ProblemKind::cauchy:
      return FunctionClass::nonconvex;
  }
  return FunctionClass::nonconvex;
}

}  // namespace

std::vector<std::string> ExperimentConfig::validate() const {
  std::vector<std::string> err;
  auto need = [&err](bool ok, const char* msg) {
    if (!ok) err.emplace_back(msg);
  };
  // Problem.
  need(problem.dim >= 1, "problem.dim must be >= 1");
  need(problem.x0_scale > 0.0, "problem.x0_scale must be > 0");
  if (problem.kind == ProblemKind::quadratic)
    need(problem.lambda_min > 0.0 && problem.lambda_min <= problem.lambda_max,
         "problem.lambda_min must satisfy 0 < lambda_min <= lambda_max");
  if (problem.kind == ProblemKind::logistic)
    need(problem.samples >= 1, "problem.samples must be >= 1");

  // Algorithm.
  need(aloe.alpha0 > 0.0, "aloe.alpha0 must be > 0");
  need(aloe.alpha0 < aloe.alpha_max, "aloe.alpha0 must be < aloe.alpha_max");
  need(aloe.theta > 0.0 && aloe.theta < 1.0, "theta must lie in (0,1)");
  need(aloe.gamma > 0.0 && aloe.gamma < 1.0, "gamma must lie in (0,1)");
  if (eps_f_input) need(*eps_f_input >= 0.0, "aloe.eps_f must be >= 0");

  // Oracles.
  const auto& z = zeroth.spec;
  need(z.eps_f >= 0.0 && z.nu >= 0.0 && z.b >= 0.0, "zeroth eps_f, nu, b must be >= 0");
  need(z.mean_slack >= 0.0, "zeroth.u must be >= 0");
  if (z.mode == NoiseMode::exact)
    need(z.eps_f == 0.0 && z.nu == 0.0 && z.b == 0.0,
         "zeroth.mode = exact requires eps_f = nu = b = 0");
  if (z.mode == NoiseMode::subexponential && zeroth.kind == ZerothKind::synthetic)
    need(z.mean_slack <= z.eps_f, "zeroth.u must not exceed zeroth.eps_f");
  if (zeroth.kind == ZerothKind::minibatch) {
    need(problem.kind == ProblemKind::logistic, "minibatch zeroth oracle needs the logistic problem");
    need(zeroth.batch_size >= 0, "zeroth.batch_size must be >= 0");
  }
  const auto& f = first.spec;
  need(f.eps_g >= 0.0 && f.kappa >= 0.0, "first eps_g and kappa must be >= 0");
  need(f.delta >= 0.0 && f.delta < 1.0, "first.delta must lie in [0,1)");
  if (first.kind == FirstKind::minibatch) {
    need(problem.kind == ProblemKind::logistic, "minibatch first oracle needs the logistic problem");
    need(first.batch_size >= 0, "first.batch_size must be >= 0");
  }
  if (first.kind == FirstKind::gsg) {
    need(first.sigma > 0.0, "first.sigma must be > 0");
    need(first.directions >= 1, "first.directions must be >= 1");
  }
  if (first.kind == FirstKind::synthetic)
    need(first.failure_scale >= 0.0 && first.failure_offset >= 0.0,
         "first.failure_scale and first.failure_offset must be >= 0");

  // Stopping and theory.
  need(stopping.eps > 0.0, "stopping.eps must be > 0");
  if (stopping.eps1) need(*stopping.eps1 > 0.0, "stopping.eps1 must be > 0");
  need(class_admits(natural_class(problem.kind), stopping.cls),
       "stopping.class is not implied by the problem's function class");
  need(theory.s >= 0.0, "theory.s must be >= 0");
  if (theory.p_hat) need(*theory.p_hat > 0.5 && *theory.p_hat < 1.0, "theory.p_hat must lie in (1/2,1)");
  if (theory.eta)
    need(*theory.eta > 0.0 && *theory.eta < eta_upper(aloe.theta),
         "theory.eta must lie in (0, (1 - theta) / (2 - theta))");
  if (theory.p_source == PSource::noise_law)
    need(zeroth.kind == ZerothKind::synthetic, "theory.p_source = noise_law needs a synthetic zeroth oracle");

  if (estimator) {
    need(estimator->n_calls >= 2, "estimator.n_calls must be >= 2");
    need(estimator->scale_factor > 0.0, "estimator.scale_factor must be > 0");
    need(estimator->refresh_period >= 1, "estimator.refresh_period must be >= 1");
  }

  // Experiment.
  need(n_trials >= 1, "experiment.trials must be >= 1");
  need(budget >= 1, "experiment.budget must be >= 1");
  for (long long t : checkpoints) {
    if (t < 1 || t > budget) {
      err.push_back("experiment.checkpoints must lie in [1, budget]");
      break;
    }
  }
  need(jobs >= 0, "experiment.jobs must be >= 0");
  if (certify.enabled) {
    need(certify.probes >= 1, "certify.probes must be >= 1");
    need(certify.queries >= 2, "certify.queries must be >= 2");
    need(certify.probe_radius >= 0.0, "certify.probe_radius must be >= 0");
  }
  return err;
}

Fixture build_fixture(const ExperimentConfig& config) {
  Fixture fx;
  const auto& pc = config.problem;
  switch (pc.kind) {
    case ProblemKind::quadratic:
      fx.problem = std::make_shared<ProblemInstance>(
          make_strongly_convex_quadratic(pc.dim, pc.lambda_min, pc.lambda_max, pc.seed));
      break;
    case ProblemKind::cauchy:
      fx.problem = std::make_shared<ProblemInstance>(make_rotated_cauchy(pc.dim, pc.seed));
      break;
    case ProblemKind::pseudo_huber:
      fx.problem = std::make_shared<ProblemInstance>(make_pseudo_huber(pc.dim, pc.seed));
      break;
    case ProblemKind::logistic: {
      LogisticProblem lp = make_synthetic_logistic(pc.samples, pc.dim, pc.seed);
      fx.problem = std::make_shared<ProblemInstance>(std::move(lp.problem));
      fx.dataset = lp.dataset;
      break;
    }
  }
  if (pc.x0_scale != 1.0) {
    auto scaled = std::make_shared<ProblemInstance>(*fx.problem);
    scaled->x0 *= pc.x0_scale;
    if (scaled->diameter_D && scaled->x_star)
      scaled->diameter_D = 2.0 * (scaled->x0 - *scaled->x_star).norm();
    fx.problem = scaled;
  }
  std::shared_ptr<const ZerothOracle> zeroth;
  if (config.zeroth.kind == ZerothKind::synthetic)
    zeroth = std::make_shared<SyntheticZerothOracle>(fx.problem, config.zeroth.spec);
  else
    zeroth = std::make_shared<MinibatchZerothOracle>(fx.dataset, config.zeroth.batch_size);
  fx.zeroth = zeroth;

  switch (config.first.kind) {
    case FirstKind::synthetic:
      fx.first = std::make_shared<SyntheticFirstOracle>(fx.problem, config.first.spec,
                                                        config.first.failure_scale,
                                                        config.first.failure_offset);
      break;
    case FirstKind::minibatch:
      fx.first = std::make_shared<MinibatchFirstOracle>(fx.dataset, config.first.batch_size);
      break;
    case FirstKind::gsg:
      fx.first = std::make_shared<GsgFirstOracle>(zeroth, config.first.sigma,
                                                  config.first.directions);
      break;
  }
  return fx;
}

TheoryInputs theory_inputs(const ExperimentConfig& config, const Fixture& fixture) {
  const auto& prob = *fixture.problem;
  const auto& z = config.zeroth.spec;
  const auto& f = config.first.spec;
  TheoryInputs in;
  in.cls = config.stopping.cls;
  in.theta = config.aloe.theta;
  in.gamma = config.aloe.gamma;
  in.alpha0 = config.aloe.alpha0;
  in.alpha_max = config.aloe.alpha_max;
  in.L = prob.lipschitz_L;
  in.kappa = f.kappa;
  in.beta = prob.strong_convexity_beta;
  in.D = prob.diameter_D;
  in.eps_f = z.eps_f;
  in.eps_g = f.eps_g;
  in.delta = f.delta;
  in.nu = z.nu;
  in.b = z.b;
  in.subexp_noise = z.mode == NoiseMode::subexponential;
  in.u = in.subexp_noise ? z.mean_slack : z.eps_f / 2.0;
  in.eps = config.stopping.eps;
  in.eps1 = config.stopping.eps1;
  in.phi_gap0 = eval_value(prob, prob.x0) - prob.phi_star;
  in.s = config.theory.s;
  in.p_hat = config.theory.p_hat;
  in.eta = config.theory.eta;
  in.strongly_convex_augmented = config.theory.strongly_convex_augmented;
  in.p_source = config.theory.p_source;
  if (config.theory.p_source == PSource::noise_law)
    in.p_override = 1.0 - f.delta - synthetic_pair_exceedance(z);
  return in;
}

Interval wilson_interval(long long k, long long n, double z) {
  if (n <= 0) return {0.0, 1.0};
  const double nn = static_cast<double>(n);
  const double ph = static_cast<double>(k) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double centre = (ph + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(ph * (1.0 - ph) / nn + z2 / (4.0 * nn * nn)) / denom;
  // Pin the degenerate ends exactly; rounding would otherwise leave hi < 1.
  const double lo = k == 0 ? 0.0 : std::max(0.0, centre - half);
  const double hi = k == n ? 1.0 : std::min(1.0, centre + half);
  return {lo, hi};
}

double empirical_tail(const std::vector<std::optional<int>>& samples, long long t) {
  if (samples.empty()) throw std::invalid_argument("empirical_tail: no samples");
  long long hit = 0;
  for (const auto& s : samples)
    if (s && *s <= t) ++hit;
  return static_cast<double>(hit) / static_cast<double>(samples.size());
}

TrialResult run_single_trial(const ExperimentConfig& config, const Fixture& fixture,
                             const TheoryConstants& theory, int index) {
  TrialResult res;
  res.seed = config.base_seed + static_cast<std::uint64_t>(index);
  AloeParams params = config.aloe;
  params.max_iters = config.budget;
  params.eps_f_input = config.eps_f_input.value_or(config.zeroth.spec.eps_f);

  std::optional<EpochEstimator> estimator;
  if (config.estimator) estimator.emplace(*fixture.zeroth, *config.estimator, res.seed);
  Trace trace = aloe_run(*fixture.problem, *fixture.zeroth, *fixture.first, params, res.seed,
                         estimator ? &*estimator : nullptr);

  PathContext ctx;
  ctx.stopping = config.stopping;
  if (!ctx.stopping.eps1) ctx.stopping.eps1 = theory.eps1;
  ctx.eps_g = config.first.spec.eps_g;
  ctx.kappa = config.first.spec.kappa;
  ctx.bar_alpha_grid = theory.bar_alpha_grid;
  ctx.d = theory.d;
  const PathReport rep = analyse_path(trace, *fixture.problem, ctx);

  res.T_eps = rep.T_eps;
  res.frac_true = rep.frac_true;
  res.frac_success = rep.frac_success;
  res.iterations = static_cast<long long>(rep.I.size());
  for (auto v : rep.I) res.true_count += v;
  res.verdicts = rep.verdicts;
  if (estimator) res.eps_history = estimator->history();
  if (config.write_traces) res.trace = std::move(trace);
  return res;
}

std::vector<std::string> TrialSummary::failures() const {
  std::vector<std::string> out;
  const auto n = static_cast<long long>(trials.size());
  if (lemma2_pass < n)
    out.push_back("large-step count: " + std::to_string(n - lemma2_pass) + " path(s) violate it");
  if (corollary1_pass < n)
    out.push_back("large-step corollary: " + std::to_string(n - corollary1_pass) + " path(s) violate it");
  if (lemma3_pass < n)
    out.push_back("small-step count: " + std::to_string(n - lemma3_pass) + " path(s) violate it");
  if (lemma4_pass < n)
    out.push_back("good-iteration count: " + std::to_string(n - lemma4_pass) + " path(s) violate it");
  for (const auto& row : checkpoints)
    if (!row.dominates)
      out.push_back("tail at t=" + std::to_string(row.t) + ": wilson_hi " +
                    format_double(row.wilson.hi) + " < bound " + format_double(row.theory_bound));
  if (!true_fraction_ok)
    out.push_back("pooled true fraction upper bound " + format_double(pooled_true_wilson.hi) +
                  " < p = " + format_double(theory.p));
  if (certification && !certification->pass) out.push_back("oracle certification failed");
  return out;
}

TrialSummary run_trials(const ExperimentConfig& config_in) {
  const auto errors = config_in.validate();
  if (!errors.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& e : errors) msg += "\n  - " + e;
    throw std::invalid_argument(msg);
  }
  ExperimentConfig config = config_in;
  const Fixture fixture = build_fixture(config);

  TrialSummary summary;
  summary.theory = compute_theory(theory_inputs(config, fixture));
  if (config.theory.require_admissible) require_admissible(summary.theory);
  if (!config.stopping.eps1) config.stopping.eps1 = summary.theory.eps1;

  const int n = config.n_trials;
  summary.trials.resize(static_cast<std::size_t>(n));
  std::vector<std::exception_ptr> errs(static_cast<std::size_t>(n));
  std::atomic<int> next{0};
  unsigned workers = config.jobs > 0 ? static_cast<unsigned>(config.jobs)
                                     : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(n));
  auto work = [&]() {
    for (int i = next++; i < n; i = next++) {
      try {
        summary.trials[static_cast<std::size_t>(i)] =
            run_single_trial(config, fixture, summary.theory, i);
      } catch (...) {
        errs[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);

  std::vector<std::optional<int>> samples;
  samples.reserve(summary.trials.size());
  for (const auto& tr : summary.trials) {
    samples.push_back(tr.T_eps);
    summary.lemma2_pass += tr.verdicts.lemma2;
    summary.corollary1_pass += tr.verdicts.corollary1;
    summary.lemma3_pass += tr.verdicts.lemma3;
    summary.lemma4_pass += tr.verdicts.lemma4;
    summary.pooled_true += tr.true_count;
    summary.pooled_iterations += tr.iterations;
  }
  summary.lemmas_ok = summary.lemma2_pass == n && summary.corollary1_pass == n &&
                      summary.lemma3_pass == n && summary.lemma4_pass == n;

  const bool theory_applies = summary.theory.admissible && !config.estimator;
  std::vector<long long> ts = config.checkpoints;
  if (ts.empty()) {
    const long long t0 = summary.theory.t_min;
    if (summary.theory.admissible && t0 > 0)
      for (long long m : {1LL, 2LL, 4LL})
        if (m * t0 <= config.budget) ts.push_back(m * t0);
    ts.push_back(config.budget);
  }
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  for (long long t : ts) {
    CheckpointRow row;
    row.t = t;
    row.empirical_tail = empirical_tail(samples, t);
    long long hits = 0;
    for (const auto& s : samples)
      if (s && *s <= t) ++hits;
    row.wilson = wilson_interval(hits, n, kZ99TwoSided);
    row.theory_bound = summary.theory.admissible ? tail_bound(summary.theory, t) : 0.0;
    row.dominates = !theory_applies || row.wilson.hi >= row.theory_bound;
    summary.tails_ok = summary.tails_ok && row.dominates;
    summary.checkpoints.push_back(row);
  }

  summary.pooled_true_wilson =
      wilson_interval(summary.pooled_true, summary.pooled_iterations, kZ99TwoSided);
  summary.true_fraction_ok = !theory_applies || summary.pooled_true_wilson.hi >= summary.theory.p;

  if (config.certify.enabled) {
    const auto probes =
        default_probes(*fixture.problem, config.aloe, config.certify.probes,
                       config.certify.probe_radius, config.base_seed ^ 0x9e3779b97f4a7c15ULL);
    CertificationReport rep =
        certify_oracles(*fixture.problem, *fixture.zeroth, config.zeroth.spec, *fixture.first,
                        config.first.spec, probes, config.certify.queries, config.base_seed);
    if (!config.certify.required) rep.pass = true;
    summary.certification = std::move(rep);
  }
  return summary;
}

std::vector<ProbePoint> default_probes(const ProblemInstance& problem, const AloeParams& aloe,
                                       int count, double radius, std::uint64_t seed) {
  std::vector<Vector> xs;
  xs.push_back(problem.x0);
  if (problem.x_star && static_cast<int>(xs.size()) < count) xs.push_back(*problem.x_star);
  const int extra = count - static_cast<int>(xs.size());
  if (extra > 0) {
    auto ball = probe_ball(problem.x0, radius, extra, seed);
    xs.insert(xs.end(), ball.begin(), ball.end());
  }
  xs.resize(static_cast<std::size_t>(count));
  std::vector<ProbePoint> out;
  for (int i = 0; i < count; ++i)
    out.push_back({xs[static_cast<std::size_t>(i)], lattice_step(aloe.alpha0, aloe.gamma, i - 1)});
  return out;
}

CertificationReport certify_oracles(const ProblemInstance& problem, const ZerothOracle& zeroth,
                                    const ZerothOracleSpec& zspec, const FirstOracle& first,
                                    const FirstOracleSpec& fspec,
                                    const std::vector<ProbePoint>& probes, int queries,
                                    std::uint64_t seed) {
  CertificationReport report;
  for (std::size_t i = 0; i < probes.size(); ++i) {
    const auto& pp = probes[i];
    ProbeCertification pc;
    pc.probe = static_cast<int>(i);
    pc.alpha = pp.alpha;
    pc.queries = queries;

    const Vector grad = eval_gradient(problem, pp.x);
    Rng grng = make_stream(seed, i, StreamPurpose::probe);
    for (int q = 0; q < queries; ++q) {
      const Vector g = first.query(pp.x, pp.alpha, grng);
      pc.accurate += accuracy_event(g, grad, fspec.eps_g, fspec.kappa, pp.alpha);
    }
    pc.accuracy_upper = wilson_interval(pc.accurate, queries, kZ99OneSided).hi;
    pc.accuracy_pass = pc.accuracy_upper >= 1.0 - fspec.delta;

    const double phi = eval_value(problem, pp.x);
    Rng zrng = make_stream(seed, i + probes.size(), StreamPurpose::probe);
    std::vector<double> e(static_cast<std::size_t>(queries));
    for (auto& v : e) v = std::abs(zeroth.query(pp.x, zrng) - phi);
    double mean = 0.0;
    for (double v : e) mean += v;
    mean /= queries;
    double ss = 0.0;
    for (double v : e) ss += (v - mean) * (v - mean);
    pc.mean_error = mean;
    pc.mean_error_se = std::sqrt(ss / (queries - 1) / queries);
    pc.mean_pass = mean <= zspec.eps_f + 3.0 * pc.mean_error_se;

    if (zspec.nu > 0.0 || zspec.b > 0.0) {
      const double lam_max = zspec.b > 0.0 ? 1.0 / zspec.b : 1.0 / zspec.nu;
      pc.mgf_worst_excess = -INFINITY;
      for (int j = 1; j <= 20; ++j) {
        const double lam = lam_max * j / 20.0;
        double m = 0.0, m2 = 0.0;
        for (double v : e) {
          const double y = std::exp(lam * (v - mean));
          m += y;
          m2 += y * y;
        }
        m /= queries;
        const double var = std::max(0.0, m2 / queries - m * m) * queries / (queries - 1);
        const double se = std::sqrt(var / queries);
        const double excess = (m - 3.0 * se) - std::exp(lam * lam * zspec.nu * zspec.nu / 2.0);
        pc.mgf_worst_excess = std::max(pc.mgf_worst_excess, excess);
      }
      pc.mgf_pass = pc.mgf_worst_excess <= 0.0;
    }
    report.pass = report.pass && pc.accuracy_pass && pc.mean_pass && pc.mgf_pass;
    report.probes.push_back(pc);
  }
  return report;
}

}  // namespace aloe
