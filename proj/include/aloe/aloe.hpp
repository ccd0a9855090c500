#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "aloe/oracles.hpp"
#include "aloe/problem_suite.hpp"

namespace aloe {

struct AloeParams {
  double eps_f_input = 0.0;  // slack constant of the relaxed Armijo test
  double alpha0 = 1.0;
  double alpha_max = 10.0;
  double theta = 0.2;
  double gamma = 0.8;
  int max_iters = 1000;
  /// When set, the gradient query and both function queries of an iteration
  /// start from copies of one stream, so mini-batch oracles see the same batch.
  /// Off by default: the analysis assumes fresh samples per query.
  bool shared_sample = false;

  /// Throws std::invalid_argument unless 0 < alpha0 < alpha_max, theta and
  /// gamma lie in (0, 1), eps_f_input >= 0 and max_iters > 0.
  void validate() const;
};

/// Largest exponent m with alpha0 * gamma^{-m} <= alpha_max. The loop only
/// visits the lattice {alpha0 gamma^i : i >= -m}.
int lattice_cap_exponent(double alpha0, double gamma, double alpha_max);

/// alpha0 * gamma^{-lattice_cap_exponent(...)}, the step-size cap actually hit.
double effective_alpha_max(double alpha0, double gamma, double alpha_max);

/// alpha0 * gamma^i evaluated as a single pow so equal exponents give equal
/// step sizes.
double lattice_step(double alpha0, double gamma, int exponent);

struct IterationRecord {
  int k = 0;
  Vector x;
  double alpha = 0.0;
  double alpha_next = 0.0;
  int step_index = 0;  // alpha = alpha0 * gamma^step_index
  Vector g;
  double g_norm_sq = 0.0;
  double f_curr = 0.0;
  double f_plus = 0.0;
  bool success = false;
  double e_curr = 0.0;
  double e_plus = 0.0;
  double grad_true_norm = 0.0;
  double grad_err_norm = 0.0;  // ||g - grad phi(x)||
  double phi_curr = 0.0;
  double phi_plus = 0.0;
  double eps_f_used = 0.0;  // slack constant in force at this iteration
};

struct Trace {
  std::vector<IterationRecord> records;
  AloeParams params;
  std::uint64_t seed = 0;
  Vector x_final;
  double phi_final = 0.0;
  double grad_final_norm = 0.0;
};

/// f_plus <= f_curr - alpha theta g_norm_sq + 2 eps_f_input, ties accepted.
bool armijo_check(double f_plus, double f_curr, double alpha, double theta, double g_norm_sq,
                  double eps_f_input);

/// min{alpha_max, alpha / gamma} after a success, gamma alpha otherwise.
double step_update(double alpha, bool success, double gamma, double alpha_max);

/// Supplies the slack constant for iteration k. The default keeps
/// params.eps_f_input for the whole run.
class SlackSchedule {
 public:
  virtual ~SlackSchedule() = default;
  virtual double eps_f_at(int k, const Vector& x) = 0;
};

/// Runs the loop for exactly params.max_iters iterations with fixed
/// per-iteration streams derived from `seed`. Ground-truth fields are taken
/// from exact evaluations of `problem`. Step sizes are tracked as lattice
/// exponents with the cap snapped to effective_alpha_max. Throws
/// std::runtime_error if an oracle returns a non-finite value.
Trace aloe_run(const ProblemInstance& problem, const ZerothOracle& zeroth, const FirstOracle& first,
               const AloeParams& params, std::uint64_t seed, SlackSchedule* schedule = nullptr);

/// Header k,alpha,f_curr,f_plus,success,e_curr,e_plus,grad_true_norm,phi_curr,
/// one row per iteration, shortest round-trip decimal formatting.
void write_trace_csv(const Trace& trace, std::ostream& out);

struct TraceCsvRow {
  int k = 0;
  double alpha = 0.0;
  double f_curr = 0.0;
  double f_plus = 0.0;
  bool success = false;
  double e_curr = 0.0;
  double e_plus = 0.0;
  double grad_true_norm = 0.0;
  double phi_curr = 0.0;
};

std::vector<TraceCsvRow> read_trace_csv(std::istream& in);

}  // namespace aloe
