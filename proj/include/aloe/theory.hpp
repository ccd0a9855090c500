#pragma once

#include <optional>
#include <string>
#include <vector>

#include "aloe/common.hpp"

namespace aloe {

/// Number of eta values scanned when minimizing the epsilon lower bound.
inline constexpr int kEtaGridSize = 256;

/// Upper end (1 - theta) / (2 - theta) of the admissible eta range.
double eta_upper(double theta);

/// min{(1 - theta) / (0.5 L + kappa), 2 (1 - 2 eta - theta (1 - eta)) / (L (1 - eta))}.
/// Throws std::invalid_argument if eta is outside (0, eta_upper(theta)).
double bar_alpha(double theta, double L, double kappa, double eta);

/// Largest alpha0 * gamma^j (integer j) not exceeding alpha_bar, capped at the
/// effective maximum step. Returns the step and its exponent j.
struct GridPoint {
  double alpha = 0.0;
  int exponent = 0;
};
GridPoint snap_to_grid(double alpha_bar, double alpha0, double gamma, double alpha_max);

/// bounded: 1 - delta; otherwise 1 - delta - exp(-min{u^2 / (2 nu^2), u / (2 b)}).
double success_prob_p(double delta, double nu, double b, double u, bool bounded);

struct ClassConstants {
  double theta = 0.2;
  double kappa = 0.0;
  double alpha_max = 10.0;
  double eta = 0.1;
  double beta = 0.0;  // strongly convex class
  double D = 0.0;     // convex class
};

/// Progress function of the class. For the strongly convex class a log
/// argument <= 0 throws InadmissibleError.
double h_of_alpha(FunctionClass cls, double alpha, double eps, const ClassConstants& c);

/// Damage function r(eps_f, e_sum).
double r_damage(FunctionClass cls, double eps_f, double e_sum, double eps);

struct SubexpPair {
  double nu_r = 0.0;
  double b_r = 0.0;
};

/// Sub-exponential parameters of r(eps_f, e + e+).
SubexpPair subexp_params_r(FunctionClass cls, double nu, double b, double eps, double eps_f);

struct EpsBoundInputs {
  FunctionClass cls = FunctionClass::nonconvex;
  double theta = 0.2;
  double L = 1.0;
  double kappa = 0.0;
  double alpha_max = 10.0;
  double eps_f = 0.0;
  double eps_g = 0.0;
  double p = 1.0;
  double beta = 0.0;
  double D = 0.0;
  /// Strongly convex: include the extra 4 eps_f clause (default) or not.
  bool strongly_convex_augmented = true;
  /// Convex: restrict eta so that eps_g / eta <= eps1.
  std::optional<double> eps1;
};

/// Right-hand side of the class lower bound on eps at one eta. Infinite when
/// the bound is vacuous for this eta (e.g. p <= 1/2 with eps_f > 0).
double eps_bound_at(const EpsBoundInputs& in, double eta);

struct EpsBound {
  double eps_min = 0.0;
  double eta_star = 0.0;
  double eps1_min = 0.0;  // convex class: eps_g / eta_star
};

/// Grid minimization over eta_i = eta_upper (i + 1) / 257, i = 0..255. Ties
/// keep the smallest eta. Throws InadmissibleError if no grid point is feasible.
EpsBound eps_lower_bound(const EpsBoundInputs& in);

/// 4 max{eps_g, (1 + kappa alpha_max) sqrt((L + 2 kappa) eps_f)}.
double eps_lower_bound_simplified(double eps_g, double eps_f, double L, double kappa,
                                  double alpha_max);

/// exp(-(p - p_hat)^2 t / (2 p^2)). Throws std::invalid_argument if p_hat >= p.
double azuma_tail(double p, double p_hat, double t);

/// exp(-min{s^2 t / (2 nu_r^2), s t / (2 b_r)}), 1 when s = 0 and 0 when
/// nu_r = b_r = 0 < s.
double bernstein_tail(double s, double t, double nu_r, double b_r);

enum class PSource { prop, noise_law };

struct TheoryInputs {
  FunctionClass cls = FunctionClass::nonconvex;
  double theta = 0.2;
  double gamma = 0.8;
  double alpha0 = 1.0;
  double alpha_max = 10.0;  // snapped to the step lattice internally
  double L = 1.0;
  double kappa = 0.0;
  double beta = 0.0;
  std::optional<double> D;
  double eps_f = 0.0;
  double eps_g = 0.0;
  double delta = 0.0;
  double nu = 0.0;
  double b = 0.0;
  double u = 0.0;
  bool subexp_noise = false;  // false: errors bounded by eps_f
  double eps = 1e-6;
  std::optional<double> eps1;
  double phi_gap0 = 0.0;  // phi(x0) - phi*
  double s = 0.0;
  std::optional<double> p_hat;
  std::optional<double> eta;  // fixed eta instead of the grid minimizer
  bool strongly_convex_augmented = true;
  /// Replaces the closed-form p (used with PSource::noise_law).
  std::optional<double> p_override;
  PSource p_source = PSource::prop;
};

struct TheoryConstants {
  FunctionClass cls = FunctionClass::nonconvex;
  double alpha_max_eff = 0.0;
  double eta = 0.0;
  double bar_alpha = 0.0;
  double bar_alpha_grid = 0.0;
  int grid_exponent = 0;
  double p = 0.0;
  PSource p_source = PSource::prop;
  double h_at_bar = 0.0;  // at bar_alpha_grid
  double r_at_2epsf = 0.0;
  double d = 0.0;
  double C = 0.0;
  double C_display = 0.0;  // strongly convex: the constant as printed in the theorem
  double Z0 = 0.0;
  double R = 0.0;
  double eps = 0.0;
  double eps1 = 0.0;
  double eps_min = 0.0;
  double eps_min_simplified = 0.0;
  double nu_r = 0.0;
  double b_r = 0.0;
  double u = 0.0;
  double s = 0.0;
  bool subexp_noise = false;
  double p_hat_lo = 0.0;  // 1/2 + (r + s) / h
  double p_hat = 0.0;
  long long t_min = 0;
  bool admissible = false;
  std::vector<std::string> violations;
};

struct Threshold {
  long long t_min = 0;
  double R = 0.0;
  double C = 0.0;
  double d = 0.0;
};

/// R = Z0 / h(bar_alpha_grid) + d and t_min = ceil(R / (p_hat - 1/2 - (r + s) / h)).
/// Throws InadmissibleError if p_hat is outside (1/2 + (r + s) / h, p).
Threshold iteration_threshold(const TheoryConstants& c, double s, double p_hat);

/// Evaluates every constant; never throws for inadmissible inputs but lists
/// each violated condition in `violations`.
TheoryConstants compute_theory(const TheoryInputs& in);

/// Throws InadmissibleError listing the violations, if any.
void require_admissible(const TheoryConstants& c);

/// Lower bound on P(T_eps <= t): 0 below t_min, otherwise
/// max{0, 1 - azuma - bernstein} (the Bernstein term only for sub-exponential noise).
double tail_bound(const TheoryConstants& c, long long t);

/// key = value lines, shortest round-trip number formatting.
std::string constants_report(const TheoryConstants& c);

}  // namespace aloe
