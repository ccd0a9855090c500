#include "aloe/aloe.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "aloe/csv.hpp"

namespace aloe {

void AloeParams::validate() const {
  if (!(alpha0 > 0.0)) throw std::invalid_argument("alpha0 must be > 0");
  if (!(alpha0 < alpha_max)) throw std::invalid_argument("alpha0 must be < alpha_max");
  if (!(theta > 0.0 && theta < 1.0)) throw std::invalid_argument("theta must lie in (0,1)");
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must lie in (0,1)");
  if (!(eps_f_input >= 0.0)) throw std::invalid_argument("eps_f must be >= 0");
  if (max_iters <= 0) throw std::invalid_argument("max_iters must be > 0");
}

int lattice_cap_exponent(double alpha0, double gamma, double alpha_max) {
  // The 1e-9 absorbs rounding when alpha_max sits exactly on the lattice.
  const double m = std::floor(std::log(alpha_max / alpha0) / std::log(1.0 / gamma) + 1e-9);
  return std::max(0, static_cast<int>(m));
}

double lattice_step(double alpha0, double gamma, int exponent) {
  return alpha0 * std::pow(gamma, exponent);
}

double effective_alpha_max(double alpha0, double gamma, double alpha_max) {
  return lattice_step(alpha0, gamma, -lattice_cap_exponent(alpha0, gamma, alpha_max));
}

bool armijo_check(double f_plus, double f_curr, double alpha, double theta, double g_norm_sq,
                  double eps_f_input) {
  return f_plus <= f_curr - alpha * theta * g_norm_sq + 2.0 * eps_f_input;
}

double step_update(double alpha, bool success, double gamma, double alpha_max) {
  return success ? std::min(alpha_max, alpha / gamma) : gamma * alpha;
}

namespace {

void require_finite(double v, const char* what, int k) {
  if (!std::isfinite(v))
    throw std::runtime_error(std::string("non-finite ") + what + " at iteration " +
                             std::to_string(k));
}

}  // namespace

Trace aloe_run(const ProblemInstance& problem, const ZerothOracle& zeroth, const FirstOracle& first,
               const AloeParams& params, std::uint64_t seed, SlackSchedule* schedule) {
  params.validate();
  const int cap = lattice_cap_exponent(params.alpha0, params.gamma, params.alpha_max);

  Trace trace;
  trace.params = params;
  trace.seed = seed;
  trace.records.reserve(static_cast<std::size_t>(params.max_iters));

  Vector x = problem.x0;
  int step_index = 0;
  for (int k = 0; k < params.max_iters; ++k) {
    const auto uk = static_cast<std::uint64_t>(k);
    IterationRecord rec;
    rec.k = k;
    rec.x = x;
    rec.step_index = step_index;
    rec.alpha = lattice_step(params.alpha0, params.gamma, step_index);
    rec.eps_f_used = schedule ? schedule->eps_f_at(k, x) : params.eps_f_input;
    require_finite(rec.eps_f_used, "eps_f estimate", k);

    const Rng g_start = make_stream(seed, uk, StreamPurpose::gradient);
    Rng g_rng = g_start;
    rec.g = first.query(x, rec.alpha, g_rng);
    if (!rec.g.allFinite()) throw std::runtime_error("non-finite gradient estimate at iteration " +
                                                     std::to_string(k));
    rec.g_norm_sq = rec.g.squaredNorm();
    const Vector x_plus = rec.g_norm_sq == 0.0 ? x : Vector(x - rec.alpha * rec.g);

    Rng fc_rng = params.shared_sample ? g_start : make_stream(seed, uk, StreamPurpose::f_curr);
    Rng fp_rng = params.shared_sample ? g_start : make_stream(seed, uk, StreamPurpose::f_plus);
    rec.f_curr = zeroth.query(x, fc_rng);
    rec.f_plus = zeroth.query(x_plus, fp_rng);
    require_finite(rec.f_curr, "function estimate", k);
    require_finite(rec.f_plus, "trial-point function estimate", k);

    rec.phi_curr = eval_value(problem, x);
    rec.phi_plus = eval_value(problem, x_plus);
    const Vector grad = eval_gradient(problem, x);
    rec.grad_true_norm = grad.norm();
    rec.grad_err_norm = (rec.g - grad).norm();
    rec.e_curr = std::abs(rec.f_curr - rec.phi_curr);
    rec.e_plus = std::abs(rec.f_plus - rec.phi_plus);

    rec.success = armijo_check(rec.f_plus, rec.f_curr, rec.alpha, params.theta, rec.g_norm_sq,
                               rec.eps_f_used);
    step_index = rec.success ? std::max(step_index - 1, -cap) : step_index + 1;
    rec.alpha_next = lattice_step(params.alpha0, params.gamma, step_index);
    if (rec.success) x = x_plus;
    trace.records.push_back(std::move(rec));
  }
  trace.x_final = x;
  trace.phi_final = eval_value(problem, x);
  trace.grad_final_norm = eval_gradient(problem, x).norm();
  return trace;
}

void write_trace_csv(const Trace& trace, std::ostream& out) {
  out << "k,alpha,f_curr,f_plus,success,e_curr,e_plus,grad_true_norm,phi_curr\n";
  for (const auto& r : trace.records) {
    out << r.k << ',' << format_double(r.alpha) << ',' << format_double(r.f_curr) << ','
        << format_double(r.f_plus) << ',' << (r.success ? 1 : 0) << ',' << format_double(r.e_curr)
        << ',' << format_double(r.e_plus) << ',' << format_double(r.grad_true_norm) << ','
        << format_double(r.phi_curr) << '\n';
  }
}

std::vector<TraceCsvRow> read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) ||
      line != "k,alpha,f_curr,f_plus,success,e_curr,e_plus,grad_true_norm,phi_curr")
    throw std::runtime_error("trace csv: missing or unexpected header");
  std::vector<TraceCsvRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != 9) throw std::runtime_error("trace csv: expected 9 columns");
    TraceCsvRow r;
    r.k = static_cast<int>(parse_int(cells[0]));
    r.alpha = parse_double(cells[1]);
    r.f_curr = parse_double(cells[2]);
    r.f_plus = parse_double(cells[3]);
    r.success = parse_int(cells[4]) != 0;
    r.e_curr = parse_double(cells[5]);
    r.e_plus = parse_double(cells[6]);
    r.grad_true_norm = parse_double(cells[7]);
    r.phi_curr = parse_double(cells[8]);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace aloe
