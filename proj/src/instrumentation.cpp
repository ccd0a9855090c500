#include "aloe/instrumentation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "aloe/csv.hpp"

namespace aloe {

bool classify_true(const IterationRecord& rec, double eps_g, double kappa, double eps_f) {
  const bool grad_ok =
      rec.grad_err_norm <= std::max(eps_g, kappa * rec.alpha * std::sqrt(rec.g_norm_sq));
  return grad_ok && rec.e_curr + rec.e_plus <= 2.0 * eps_f;
}

StepClass classify_large(double alpha_k, double alpha_next, double bar_alpha_grid) {
  if (std::min(alpha_k, alpha_next) >= bar_alpha_grid) return StepClass::large;
  if (std::max(alpha_k, alpha_next) <= bar_alpha_grid) return StepClass::small;
  throw std::logic_error("step sizes " + format_double(alpha_k) + " -> " +
                         format_double(alpha_next) + " straddle the grid point " +
                         format_double(bar_alpha_grid));
}

double progress_Z(FunctionClass cls, double phi_x, double phi_star, double eps) {
  const double gap = phi_x - phi_star;
  switch (cls) {
    case FunctionClass::nonconvex:
      return gap;
    case FunctionClass::strongly_convex:
      return gap > 0.0 ? std::log(gap / eps) : -std::numeric_limits<double>::infinity();
    case FunctionClass::convex:
      return gap > 0.0 ? 1.0 / eps - 1.0 / gap : -std::numeric_limits<double>::infinity();
  }
  return gap;
}

namespace {

bool stopped(const StoppingSpec& spec, double gap, double grad_norm) {
  switch (spec.cls) {
    case FunctionClass::nonconvex:
      return grad_norm <= spec.eps;
    case FunctionClass::strongly_convex:
      return gap <= spec.eps;
    case FunctionClass::convex:
      return gap <= spec.eps || grad_norm <= spec.eps1.value_or(0.0);
  }
  return false;
}

}  // namespace

std::optional<int> stopping_time(const Trace& trace, const ProblemInstance& problem,
                                 const StoppingSpec& spec) {
  for (const auto& r : trace.records) {
    if (stopped(spec, r.phi_curr - problem.phi_star, r.grad_true_norm)) return r.k;
  }
  if (stopped(spec, trace.phi_final - problem.phi_star, trace.grad_final_norm))
    return static_cast<int>(trace.records.size());
  return std::nullopt;
}

namespace {
constexpr int kGridLo = 11;  // p_hat = 0.55
constexpr int kGridHi = 19;  // p_hat = 0.95
}  // namespace

std::vector<double> good_count_grid() {
  std::vector<double> grid;
  for (int i = kGridLo; i <= kGridHi; ++i) grid.push_back(i / 20.0);
  return grid;
}

LemmaVerdicts verify_path_lemmas(const std::vector<std::uint8_t>& I,
                                 const std::vector<std::uint8_t>& Theta,
                                 const std::vector<std::uint8_t>& U, std::optional<int> T_eps,
                                 double d) {
  LemmaVerdicts v;
  const int n = static_cast<int>(I.size());
  long long large_succ = 0, large_fail = 0, large = 0;
  long long small_true = 0, small_false = 0;
  long long trues = 0, good = 0;
  auto flag = [&v](bool& verdict, int t) {
    if (verdict && v.first_violation_t < 0) v.first_violation_t = t;
    verdict = false;
  };
  for (int k = 0; k < n; ++k) {
    const int t = k + 1;
    if (U[k]) {
      ++large;
      Theta[k] ? ++large_succ : ++large_fail;
      if (Theta[k] && I[k]) ++good;
    } else {
      I[k] ? ++small_true : ++small_false;
    }
    if (I[k]) ++trues;

    if (static_cast<double>(large_succ) < static_cast<double>(large_fail) - d) flag(v.lemma2, t);
    if (static_cast<double>(large_succ) < 0.5 * (static_cast<double>(large) - d))
      flag(v.corollary1, t);

    const bool before_stop = !T_eps || t < *T_eps;
    if (before_stop && small_true > small_false) flag(v.lemma3, t);
    if (before_stop) {
      // p_hat = i / 20, compared in scaled integers: (i/20 - 1/2) t rounds
      // above an integer at exact ties when evaluated in floating point.
      for (int i = kGridLo; i <= kGridHi; ++i) {
        if (20 * trues >= static_cast<long long>(i) * t &&
            40.0 * static_cast<double>(good) < 2.0 * (i - 10) * t - 20.0 * d) {
          flag(v.lemma4, t);
          break;
        }
      }
    }
  }
  return v;
}

PathReport analyse_path(const Trace& trace, const ProblemInstance& problem,
                        const PathContext& ctx) {
  PathReport rep;
  const std::size_t n = trace.records.size();
  rep.I.resize(n);
  rep.Theta.resize(n);
  rep.U.resize(n);
  rep.Z.reserve(n + 1);
  long long trues = 0, succ = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const auto& r = trace.records[k];
    rep.I[k] = classify_true(r, ctx.eps_g, ctx.kappa, r.eps_f_used) ? 1 : 0;
    rep.Theta[k] = r.success ? 1 : 0;
    rep.U[k] = classify_large(r.alpha, r.alpha_next, ctx.bar_alpha_grid) == StepClass::large;
    rep.Z.push_back(progress_Z(ctx.stopping.cls, r.phi_curr, problem.phi_star, ctx.stopping.eps));
    trues += rep.I[k];
    succ += rep.Theta[k];
  }
  rep.Z.push_back(
      progress_Z(ctx.stopping.cls, trace.phi_final, problem.phi_star, ctx.stopping.eps));
  rep.T_eps = stopping_time(trace, problem, ctx.stopping);
  if (n > 0) {
    rep.frac_true = static_cast<double>(trues) / static_cast<double>(n);
    rep.frac_success = static_cast<double>(succ) / static_cast<double>(n);
  }
  rep.verdicts = verify_path_lemmas(rep.I, rep.Theta, rep.U, rep.T_eps, ctx.d);
  return rep;
}

}  // namespace aloe
