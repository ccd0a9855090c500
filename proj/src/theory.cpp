#include "aloe/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "aloe/aloe.hpp"
#include "aloe/csv.hpp"

namespace aloe {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kE = std::exp(1.0);

// 1 / bar_alpha without dividing by zero when L = 0.
double inv_bar_alpha(double theta, double L, double kappa, double eta) {
  const double first = (0.5 * L + kappa) / (1.0 - theta);
  const double second = L * (1.0 - eta) / (2.0 * (1.0 - 2.0 * eta - theta * (1.0 - eta)));
  return std::max(first, second);
}

}  // namespace

double eta_upper(double theta) { return (1.0 - theta) / (2.0 - theta); }

double bar_alpha(double theta, double L, double kappa, double eta) {
  if (!(eta > 0.0 && eta < eta_upper(theta)))
    throw std::invalid_argument("eta must lie in (0, (1 - theta) / (2 - theta))");
  const double first = (1.0 - theta) / (0.5 * L + kappa);
  const double second = 2.0 * (1.0 - 2.0 * eta - theta * (1.0 - eta)) / (L * (1.0 - eta));
  return std::min(first, second);
}

GridPoint snap_to_grid(double alpha_bar, double alpha0, double gamma, double alpha_max) {
  const int cap = lattice_cap_exponent(alpha0, gamma, alpha_max);
  int j = static_cast<int>(std::ceil(std::log(alpha_bar / alpha0) / std::log(gamma) - 1e-9));
  while (lattice_step(alpha0, gamma, j) > alpha_bar) ++j;
  while (lattice_step(alpha0, gamma, j - 1) <= alpha_bar) --j;
  j = std::max(j, -cap);
  return {lattice_step(alpha0, gamma, j), j};
}

double success_prob_p(double delta, double nu, double b, double u, bool bounded) {
  if (bounded) return 1.0 - delta;
  if (u < 0.0) throw std::invalid_argument("success_prob_p: u must be >= 0");
  const double a = nu > 0.0 ? u * u / (2.0 * nu * nu) : (u > 0.0 ? kInf : 0.0);
  const double c = b > 0.0 ? u / (2.0 * b) : (u > 0.0 ? kInf : 0.0);
  return 1.0 - delta - std::exp(-std::min(a, c));
}

double h_of_alpha(FunctionClass cls, double alpha, double eps, const ClassConstants& c) {
  const double cap = 1.0 + c.kappa * c.alpha_max;
  switch (cls) {
    case FunctionClass::nonconvex:
      return std::min(c.theta * eps * eps * alpha / (cap * cap),
                      c.theta * alpha * (1.0 - c.eta) * (1.0 - c.eta) * eps * eps);
    case FunctionClass::strongly_convex: {
      const double a1 = 1.0 - alpha * c.theta * c.beta / (cap * cap);
      const double a2 = 1.0 - alpha * c.beta * c.theta * (1.0 - c.eta);
      if (!(a1 > 0.0) || !(a2 > 0.0))
        throw InadmissibleError("strongly convex progress: log argument is not positive");
      return std::min(-std::log(a1), -std::log(a2));
    }
    case FunctionClass::convex: {
      if (!(c.D > 0.0)) throw InadmissibleError("convex progress needs a diameter D > 0");
      return alpha * c.theta / (4.0 * c.D * c.D) *
             std::min((1.0 - c.eta) * (1.0 - c.eta), 1.0 / (cap * cap));
    }
  }
  return 0.0;
}

double r_damage(FunctionClass cls, double eps_f, double e_sum, double eps) {
  const double dmg = 2.0 * eps_f + e_sum;
  switch (cls) {
    case FunctionClass::nonconvex:
      return dmg;
    case FunctionClass::strongly_convex:
      return std::log1p(dmg / eps);
    case FunctionClass::convex:
      return dmg / (eps * eps);
  }
  return dmg;
}

SubexpPair subexp_params_r(FunctionClass cls, double nu, double b, double eps, double eps_f) {
  switch (cls) {
    case FunctionClass::nonconvex:
      return {2.0 * nu, 2.0 * b};
    case FunctionClass::convex:
      return {2.0 * nu / (eps * eps), 2.0 * b / (eps * eps)};
    case FunctionClass::strongly_convex: {
      const double v = 4.0 * kE * kE * std::max(2.0 * nu / (eps * eps), 2.0 * b / (eps * eps)) +
                       8.0 * kE * eps_f;
      return {v, v};
    }
  }
  return {};
}

double eps_bound_at(const EpsBoundInputs& in, double eta) {
  const double inv_ab = inv_bar_alpha(in.theta, in.L, in.kappa, eta);
  const double cap = 1.0 + in.kappa * in.alpha_max;
  const double slack = in.p - 0.5;
  switch (in.cls) {
    case FunctionClass::nonconvex: {
      double noise_term = 0.0;
      if (in.eps_f > 0.0) {
        if (!(slack > 0.0)) return kInf;
        noise_term = std::max(cap, 1.0 / (1.0 - eta)) *
                     std::sqrt(4.0 * in.eps_f / (in.theta * slack) * inv_ab);
      }
      return std::max(in.eps_g / eta, noise_term);
    }
    case FunctionClass::strongly_convex: {
      const double grad_term =
          in.eps_g > 0.0 ? in.eps_g * in.eps_g / (2.0 * in.beta * eta * eta) : 0.0;
      double noise_term = 0.0;
      if (in.eps_f > 0.0) {
        const double m = std::min(1.0 / (cap * cap), 1.0 - eta);
        const double base = 1.0 - m * in.theta * in.beta / inv_ab;
        if (!(base > 0.0)) return kInf;
        const double denom = std::pow(base, 0.5 - in.p) - 1.0;
        if (!(denom > 0.0)) return kInf;
        noise_term = 4.0 * in.eps_f / denom;
      }
      double out = std::max(grad_term, noise_term);
      if (in.strongly_convex_augmented) out = std::max(out, 4.0 * in.eps_f);
      return out;
    }
    case FunctionClass::convex: {
      if (in.eps1 && in.eps_g / eta > *in.eps1) return kInf;
      double noise_term = 0.0;
      if (in.eps_f > 0.0) {
        if (!(slack > 0.0)) return kInf;
        const double m = std::min((1.0 - eta) * (1.0 - eta), 1.0 / (cap * cap));
        noise_term = std::sqrt(16.0 * in.D * in.D * in.eps_f * inv_ab / (in.theta * slack * m));
      }
      return std::max(noise_term, 4.0 * in.eps_f);
    }
  }
  return kInf;
}

EpsBound eps_lower_bound(const EpsBoundInputs& in) {
  const double top = eta_upper(in.theta);
  EpsBound best{kInf, 0.0, 0.0};
  for (int i = 0; i < kEtaGridSize; ++i) {
    const double eta = top * (i + 1) / (kEtaGridSize + 1);
    const double v = eps_bound_at(in, eta);
    if (v < best.eps_min) best = {v, eta, 0.0};
  }
  if (!std::isfinite(best.eps_min))
    throw InadmissibleError("epsilon lower bound is infinite for every eta on the grid");
  best.eps1_min = in.eps_g / best.eta_star;
  return best;
}

double eps_lower_bound_simplified(double eps_g, double eps_f, double L, double kappa,
                                  double alpha_max) {
  return 4.0 * std::max(eps_g, (1.0 + kappa * alpha_max) * std::sqrt((L + 2.0 * kappa) * eps_f));
}

double azuma_tail(double p, double p_hat, double t) {
  if (!(p_hat < p)) throw std::invalid_argument("azuma_tail: need p_hat < p");
  const double gap = p - p_hat;
  return std::exp(-gap * gap * t / (2.0 * p * p));
}

double bernstein_tail(double s, double t, double nu_r, double b_r) {
  if (s <= 0.0) return 1.0;
  const double a = nu_r > 0.0 ? s * s * t / (2.0 * nu_r * nu_r) : kInf;
  const double c = b_r > 0.0 ? s * t / (2.0 * b_r) : kInf;
  return std::exp(-std::min(a, c));
}

Threshold iteration_threshold(const TheoryConstants& c, double s, double p_hat) {
  if (!(c.h_at_bar > 0.0)) throw InadmissibleError("progress h(bar alpha) is not positive");
  const double lo = 0.5 + (c.r_at_2epsf + s) / c.h_at_bar;
  if (!(p_hat > lo && p_hat < c.p))
    throw InadmissibleError("theorem inapplicable for these constants: p_hat must lie in (" +
                            format_double(lo) + ", " + format_double(c.p) + ")");
  Threshold out;
  out.d = c.d;
  out.C = c.C;
  out.R = std::max(c.Z0, 0.0) / c.h_at_bar + c.d;
  out.t_min = static_cast<long long>(std::ceil(out.R / (p_hat - lo)));
  out.t_min = std::max<long long>(out.t_min, 1);
  return out;
}

TheoryConstants compute_theory(const TheoryInputs& in) {
  TheoryConstants c;
  c.cls = in.cls;
  c.eps = in.eps;
  c.s = in.s;
  c.u = in.u;
  c.subexp_noise = in.subexp_noise;
  c.p_source = in.p_source;
  auto violate = [&c](std::string msg) { c.violations.push_back(std::move(msg)); };

  if (!(in.eps > 0.0)) violate("eps must be > 0");
  if (!(in.theta > 0.0 && in.theta < 1.0)) violate("theta must lie in (0,1)");
  if (!(in.gamma > 0.0 && in.gamma < 1.0)) violate("gamma must lie in (0,1)");
  if (!(in.alpha0 > 0.0 && in.alpha0 < in.alpha_max)) violate("need 0 < alpha0 < alpha_max");
  if (!c.violations.empty()) return c;

  c.alpha_max_eff = effective_alpha_max(in.alpha0, in.gamma, in.alpha_max);
  c.p = in.p_override ? *in.p_override
                      : success_prob_p(in.delta, in.nu, in.b, in.u, !in.subexp_noise);

  if (in.cls == FunctionClass::convex && !in.D) violate("convex class needs a diameter D");
  if (in.cls == FunctionClass::strongly_convex && !(in.beta > 0.0))
    violate("strongly convex class needs beta > 0");

  EpsBoundInputs eb;
  eb.cls = in.cls;
  eb.theta = in.theta;
  eb.L = in.L;
  eb.kappa = in.kappa;
  eb.alpha_max = c.alpha_max_eff;
  eb.eps_f = in.eps_f;
  eb.eps_g = in.eps_g;
  eb.p = c.p;
  eb.beta = in.beta;
  eb.D = in.D.value_or(0.0);
  eb.strongly_convex_augmented = in.strongly_convex_augmented;
  eb.eps1 = in.eps1;

  if (in.eta) {
    if (!(*in.eta > 0.0 && *in.eta < eta_upper(in.theta))) {
      violate("eta must lie in (0, (1 - theta) / (2 - theta))");
      return c;
    }
    c.eta = *in.eta;
    c.eps_min = eps_bound_at(eb, c.eta);
  } else {
    try {
      const EpsBound bound = eps_lower_bound(eb);
      c.eta = bound.eta_star;
      c.eps_min = bound.eps_min;
    } catch (const InadmissibleError& e) {
      violate(e.what());
      c.eta = eta_upper(in.theta) / 2.0;
      c.eps_min = kInf;
    }
  }
  c.eps_min_simplified =
      eps_lower_bound_simplified(in.eps_g, in.eps_f, in.L, in.kappa, c.alpha_max_eff);
  if (!(in.eps > c.eps_min))
    violate("eps = " + format_double(in.eps) + " does not exceed the lower bound " +
            format_double(c.eps_min));

  c.eps1 = in.eps1.value_or(in.eps_g / c.eta);
  if (in.cls == FunctionClass::convex && c.eps1 < in.eps_g / c.eta)
    violate("eps1 must be >= eps_g / eta");

  c.bar_alpha = bar_alpha(in.theta, in.L, in.kappa, c.eta);
  // Any smaller bar alpha also satisfies the progress assumption; capping at
  // alpha0 keeps the small-step count argument valid from the first iteration.
  const GridPoint gp =
      snap_to_grid(std::min(c.bar_alpha, in.alpha0), in.alpha0, in.gamma, in.alpha_max);
  c.bar_alpha_grid = gp.alpha;
  c.grid_exponent = gp.exponent;
  c.d = std::max(gp.exponent, 0);

  ClassConstants cc{in.theta, in.kappa, c.alpha_max_eff, c.eta, in.beta, in.D.value_or(0.0)};
  try {
    c.h_at_bar = h_of_alpha(in.cls, c.bar_alpha_grid, in.eps, cc);
  } catch (const InadmissibleError& e) {
    violate(e.what());
    return c;
  }
  c.r_at_2epsf = r_damage(in.cls, in.eps_f, 2.0 * in.eps_f, in.eps);
  const SubexpPair sr = subexp_params_r(in.cls, in.nu, in.b, in.eps, in.eps_f);
  c.nu_r = sr.nu_r;
  c.b_r = sr.b_r;

  switch (in.cls) {
    case FunctionClass::nonconvex:
      c.Z0 = in.phi_gap0;
      c.C = c.h_at_bar / (in.eps * in.eps);
      c.C_display = c.C;
      break;
    case FunctionClass::strongly_convex: {
      c.Z0 = in.phi_gap0 > 0.0 ? std::log(in.phi_gap0 / in.eps) : -kInf;
      c.C = c.h_at_bar;
      const double arg = 1.0 - c.bar_alpha * in.theta * in.beta * c.bar_alpha;
      c.C_display = arg > 0.0 ? -std::log(arg) : std::nan("");
      break;
    }
    case FunctionClass::convex:
      c.Z0 = in.phi_gap0 > 0.0 ? 1.0 / in.eps - 1.0 / in.phi_gap0 : -kInf;
      c.C = c.h_at_bar;
      c.C_display = c.C;
      break;
  }

  if (!(c.h_at_bar > 0.0)) {
    violate("progress h(bar alpha) is not positive");
    return c;
  }
  if (!(c.h_at_bar > 2.0 * c.r_at_2epsf)) violate("need h(bar alpha) > 2 r(eps_f, 2 eps_f)");
  c.p_hat_lo = 0.5 + (c.r_at_2epsf + in.s) / c.h_at_bar;
  if (!(c.p > c.p_hat_lo)) {
    violate("empty p_hat interval: p = " + format_double(c.p) + " <= 1/2 + (r + s) / h = " +
            format_double(c.p_hat_lo));
    return c;
  }
  c.p_hat = in.p_hat.value_or(0.5 * (c.p_hat_lo + c.p));
  if (!(c.p_hat > c.p_hat_lo && c.p_hat < c.p)) {
    violate("p_hat must lie in (" + format_double(c.p_hat_lo) + ", " + format_double(c.p) + ")");
    return c;
  }
  const Threshold th = iteration_threshold(c, in.s, c.p_hat);
  c.R = th.R;
  c.t_min = th.t_min;
  c.admissible = c.violations.empty();
  return c;
}

void require_admissible(const TheoryConstants& c) {
  if (c.admissible) return;
  std::string msg = "inadmissible theory constants:";
  for (const auto& v : c.violations) msg += "\n  - " + v;
  if (c.violations.empty()) msg += "\n  - unknown";
  throw InadmissibleError(msg);
}

double tail_bound(const TheoryConstants& c, long long t) {
  if (!c.admissible || t < c.t_min) return 0.0;
  const double td = static_cast<double>(t);
  double tail = azuma_tail(c.p, c.p_hat, td);
  if (c.subexp_noise) tail += bernstein_tail(c.s, td, c.nu_r, c.b_r);
  return std::max(0.0, 1.0 - tail);
}

std::string constants_report(const TheoryConstants& c) {
  std::ostringstream out;
  auto kv = [&out](const char* k, double v) { out << k << " = " << format_double(v) << '\n'; };
  out << "class = " << to_string(c.cls) << '\n';
  out << "admissible = " << (c.admissible ? "true" : "false") << '\n';
  kv("eps", c.eps);
  kv("eps1", c.eps1);
  kv("eps_min", c.eps_min);
  kv("eps_min_simplified", c.eps_min_simplified);
  kv("eta", c.eta);
  kv("alpha_max_effective", c.alpha_max_eff);
  kv("bar_alpha", c.bar_alpha);
  kv("bar_alpha_grid", c.bar_alpha_grid);
  out << "grid_exponent = " << c.grid_exponent << '\n';
  kv("p", c.p);
  out << "p_source = " << (c.p_source == PSource::prop ? "prop" : "noise_law") << '\n';
  kv("u", c.u);
  kv("h_at_bar", c.h_at_bar);
  kv("r_at_2epsf", c.r_at_2epsf);
  kv("d", c.d);
  kv("C", c.C);
  kv("C_display", c.C_display);
  kv("Z0", c.Z0);
  kv("R", c.R);
  kv("nu_r", c.nu_r);
  kv("b_r", c.b_r);
  kv("s", c.s);
  out << "subexp_noise = " << (c.subexp_noise ? "true" : "false") << '\n';
  kv("p_hat_lo", c.p_hat_lo);
  kv("p_hat", c.p_hat);
  out << "t_min = " << c.t_min << '\n';
  for (const auto& v : c.violations) out << "violation = " << v << '\n';
  return out.str();
}

}  // namespace aloe
