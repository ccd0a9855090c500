#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "aloe/aloe.hpp"
#include "aloe/common.hpp"
#include "aloe/problem_suite.hpp"

namespace aloe {

struct StoppingSpec {
  FunctionClass cls = FunctionClass::nonconvex;
  double eps = 1e-6;
  std::optional<double> eps1;  // convex gradient clause; defaults to eps_g / eta upstream
};

/// Gradient event ||g - grad|| <= max{eps_g, kappa alpha ||g||} together with
/// e_curr + e_plus <= 2 eps_f; both boundaries count as true.
bool classify_true(const IterationRecord& rec, double eps_g, double kappa, double eps_f);

enum class StepClass { large, small };

/// large iff min{alpha_k, alpha_next} >= bar_alpha_grid, else small iff
/// max{...} <= bar_alpha_grid. A straddling pair throws std::logic_error.
StepClass classify_large(double alpha_k, double alpha_next, double bar_alpha_grid);

/// phi - phi*, ln((phi - phi*) / eps) or 1/eps - 1/(phi - phi*). The log and
/// reciprocal forms return -infinity when phi <= phi*.
double progress_Z(FunctionClass cls, double phi_x, double phi_star, double eps);

/// First k in [0, budget] whose iterate meets the class stopping rule, where
/// k = budget refers to the final iterate. nullopt when censored.
std::optional<int> stopping_time(const Trace& trace, const ProblemInstance& problem,
                                 const StoppingSpec& spec);

struct LemmaVerdicts {
  bool lemma2 = true;      // large successes vs large failures, every prefix
  bool corollary1 = true;  // large successes vs half the large steps
  bool lemma3 = true;      // small true vs small false, prefixes before T_eps
  bool lemma4 = true;      // good-iteration count on the p_hat grid
  int first_violation_t = -1;
};

struct PathReport {
  std::vector<std::uint8_t> I;
  std::vector<std::uint8_t> Theta;
  std::vector<std::uint8_t> U;
  std::optional<int> T_eps;
  std::vector<double> Z;  // Z_0 .. Z_budget
  LemmaVerdicts verdicts;
  double frac_true = 0.0;
  double frac_success = 0.0;
};

struct PathContext {
  StoppingSpec stopping;
  double eps_g = 0.0;
  double kappa = 0.0;
  double bar_alpha_grid = 0.0;
  double d = 0.0;
};

/// Classifies every iteration (the true-iteration test uses each record's own
/// eps_f_used), computes Z, T_eps and the lemma verdicts.
PathReport analyse_path(const Trace& trace, const ProblemInstance& problem, const PathContext& ctx);

/// p_hat values 0.55, 0.60, ..., 0.95 used for the good-iteration check.
std::vector<double> good_count_grid();

/// Checks the four path properties on the flags of one path; T_eps = nullopt
/// means the path never stopped.
LemmaVerdicts verify_path_lemmas(const std::vector<std::uint8_t>& I,
                                 const std::vector<std::uint8_t>& Theta,
                                 const std::vector<std::uint8_t>& U, std::optional<int> T_eps,
                                 double d);

}  // namespace aloe
