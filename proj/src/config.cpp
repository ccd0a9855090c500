#include "aloe/config.hpp"

#include <openssl/evp.h>
#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

#include "aloe/csv.hpp"

namespace aloe {

ConfigParseError::ConfigParseError(const std::string& what, int line, int column)
    : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) +
                         ": " + what),
      line_(line),
      column_(column) {}

namespace {

std::string join_errors(const std::vector<std::string>& errors) {
  std::string msg = "invalid configuration:";
  for (const auto& e : errors) msg += "\n  - " + e;
  return msg;
}

}  // namespace

ConfigValidationError::ConfigValidationError(std::vector<std::string> errors)
    : std::invalid_argument(join_errors(errors)), errors_(std::move(errors)) {}

std::string_view to_string(PSource s) { return s == PSource::prop ? "prop" : "noise_law"; }

PSource parse_p_source(std::string_view name) {
  if (name == "prop") return PSource::prop;
  if (name == "noise_law") return PSource::noise_law;
  throw std::invalid_argument("unknown p_source '" + std::string(name) +
                              "' (expected prop or noise_law)");
}

std::string_view to_string(ZerothKind k) {
  return k == ZerothKind::synthetic ? "synthetic" : "minibatch";
}

std::string_view to_string(FirstKind k) {
  switch (k) {
    case FirstKind::synthetic:
      return "synthetic";
    case FirstKind::minibatch:
      return "minibatch";
    case FirstKind::gsg:
      return "gsg";
  }
  return "unknown";
}

namespace {

ZerothKind parse_zeroth_kind(std::string_view s) {
  if (s == "synthetic") return ZerothKind::synthetic;
  if (s == "minibatch") return ZerothKind::minibatch;
  throw std::invalid_argument("unknown zeroth oracle kind '" + std::string(s) + "'");
}

FirstKind parse_first_kind(std::string_view s) {
  if (s == "synthetic") return FirstKind::synthetic;
  if (s == "minibatch") return FirstKind::minibatch;
  if (s == "gsg") return FirstKind::gsg;
  throw std::invalid_argument("unknown first oracle kind '" + std::string(s) + "'");
}

std::string where(const YAML::Node& n) {
  const auto m = n.Mark();
  if (m.line < 0) return "";
  return "line " + std::to_string(m.line + 1) + ", column " + std::to_string(m.column + 1) + ": ";
}

void require_scalar(const YAML::Node& n) {
  if (!n.IsScalar()) throw std::invalid_argument("expected a single value");
}

double real(const YAML::Node& n) {
  require_scalar(n);
  double v = 0.0;
  try {
    v = parse_double(n.Scalar());
  } catch (const std::exception&) {
    throw std::invalid_argument("'" + n.Scalar() + "' is not a number");
  }
  if (!std::isfinite(v)) throw std::invalid_argument("value must be finite");
  return v;
}

long long integer(const YAML::Node& n) {
  require_scalar(n);
  try {
    return parse_int(n.Scalar());
  } catch (const std::exception&) {
    throw std::invalid_argument("'" + n.Scalar() + "' is not an integer");
  }
}

int int32(const YAML::Node& n) {
  const long long v = integer(n);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
    throw std::invalid_argument("integer out of range");
  return static_cast<int>(v);
}

std::uint64_t seed_value(const YAML::Node& n) {
  const long long v = integer(n);
  if (v < 0) throw std::invalid_argument("seed must be >= 0");
  return static_cast<std::uint64_t>(v);
}

bool boolean(const YAML::Node& n) {
  require_scalar(n);
  const std::string& s = n.Scalar();
  if (s == "true") return true;
  if (s == "false") return false;
  throw std::invalid_argument("'" + s + "' is not true or false");
}

std::string text(const YAML::Node& n) {
  require_scalar(n);
  return n.Scalar();
}

struct Draft {
  ExperimentConfig config;
  EstimatorConfig estimator;
  bool estimator_enabled = false;
  bool refresh_period_set = false;
};

using Setter = std::function<void(Draft&, const YAML::Node&)>;
using Section = std::map<std::string, Setter, std::less<>>;

const std::map<std::string, Section, std::less<>>& grammar() {
  static const std::map<std::string, Section, std::less<>> g = {
      {"problem",
       {
           {"kind", [](Draft& d, const YAML::Node& n) { d.config.problem.kind = parse_problem_kind(text(n)); }},
           {"dim", [](Draft& d, const YAML::Node& n) { d.config.problem.dim = int32(n); }},
           {"lambda_min", [](Draft& d, const YAML::Node& n) { d.config.problem.lambda_min = real(n); }},
           {"lambda_max", [](Draft& d, const YAML::Node& n) { d.config.problem.lambda_max = real(n); }},
           {"samples", [](Draft& d, const YAML::Node& n) { d.config.problem.samples = int32(n); }},
           {"x0_scale", [](Draft& d, const YAML::Node& n) { d.config.problem.x0_scale = real(n); }},
           {"seed", [](Draft& d, const YAML::Node& n) { d.config.problem.seed = seed_value(n); }},
       }},
      {"aloe",
       {
           {"alpha0", [](Draft& d, const YAML::Node& n) { d.config.aloe.alpha0 = real(n); }},
           {"alpha_max", [](Draft& d, const YAML::Node& n) { d.config.aloe.alpha_max = real(n); }},
           {"theta", [](Draft& d, const YAML::Node& n) { d.config.aloe.theta = real(n); }},
           {"gamma", [](Draft& d, const YAML::Node& n) { d.config.aloe.gamma = real(n); }},
           {"eps_f", [](Draft& d, const YAML::Node& n) { d.config.eps_f_input = real(n); }},
           {"shared_sample", [](Draft& d, const YAML::Node& n) { d.config.aloe.shared_sample = boolean(n); }},
       }},
      {"zeroth",
       {
           {"kind", [](Draft& d, const YAML::Node& n) { d.config.zeroth.kind = parse_zeroth_kind(text(n)); }},
           {"mode", [](Draft& d, const YAML::Node& n) { d.config.zeroth.spec.mode = parse_noise_mode(text(n)); }},
           {"eps_f", [](Draft& d, const YAML::Node& n) { d.config.zeroth.spec.eps_f = real(n); }},
           {"nu", [](Draft& d, const YAML::Node& n) { d.config.zeroth.spec.nu = real(n); }},
           {"b", [](Draft& d, const YAML::Node& n) { d.config.zeroth.spec.b = real(n); }},
           {"u", [](Draft& d, const YAML::Node& n) { d.config.zeroth.spec.mean_slack = real(n); }},
           {"batch_size", [](Draft& d, const YAML::Node& n) { d.config.zeroth.batch_size = int32(n); }},
       }},
      {"first",
       {
           {"kind", [](Draft& d, const YAML::Node& n) { d.config.first.kind = parse_first_kind(text(n)); }},
           {"eps_g", [](Draft& d, const YAML::Node& n) { d.config.first.spec.eps_g = real(n); }},
           {"kappa", [](Draft& d, const YAML::Node& n) { d.config.first.spec.kappa = real(n); }},
           {"delta", [](Draft& d, const YAML::Node& n) { d.config.first.spec.delta = real(n); }},
           {"failure_scale", [](Draft& d, const YAML::Node& n) { d.config.first.failure_scale = real(n); }},
           {"failure_offset", [](Draft& d, const YAML::Node& n) { d.config.first.failure_offset = real(n); }},
           {"batch_size", [](Draft& d, const YAML::Node& n) { d.config.first.batch_size = int32(n); }},
           {"sigma", [](Draft& d, const YAML::Node& n) { d.config.first.sigma = real(n); }},
           {"directions", [](Draft& d, const YAML::Node& n) { d.config.first.directions = int32(n); }},
       }},
      {"stopping",
       {
           {"class", [](Draft& d, const YAML::Node& n) { d.config.stopping.cls = parse_function_class(text(n)); }},
           {"eps", [](Draft& d, const YAML::Node& n) { d.config.stopping.eps = real(n); }},
           {"eps1", [](Draft& d, const YAML::Node& n) { d.config.stopping.eps1 = real(n); }},
       }},
      {"estimator",
       {
           {"enabled", [](Draft& d, const YAML::Node& n) { d.estimator_enabled = boolean(n); }},
           {"n_calls", [](Draft& d, const YAML::Node& n) { d.estimator.n_calls = int32(n); }},
           {"scale_factor", [](Draft& d, const YAML::Node& n) { d.estimator.scale_factor = real(n); }},
           {"refresh_period",
            [](Draft& d, const YAML::Node& n) {
              d.estimator.refresh_period = int32(n);
              d.refresh_period_set = true;
            }},
       }},
      {"experiment",
       {
           {"trials", [](Draft& d, const YAML::Node& n) { d.config.n_trials = int32(n); }},
           {"budget", [](Draft& d, const YAML::Node& n) { d.config.budget = int32(n); }},
           {"base_seed", [](Draft& d, const YAML::Node& n) { d.config.base_seed = seed_value(n); }},
           {"checkpoints",
            [](Draft& d, const YAML::Node& n) {
              if (!n.IsSequence()) throw std::invalid_argument("expected a list such as [10, 20]");
              d.config.checkpoints.clear();
              for (const auto& item : n) d.config.checkpoints.push_back(integer(item));
            }},
           {"jobs", [](Draft& d, const YAML::Node& n) { d.config.jobs = int32(n); }},
           {"write_traces", [](Draft& d, const YAML::Node& n) { d.config.write_traces = boolean(n); }},
       }},
      {"theory",
       {
           {"s", [](Draft& d, const YAML::Node& n) { d.config.theory.s = real(n); }},
           {"p_hat", [](Draft& d, const YAML::Node& n) { d.config.theory.p_hat = real(n); }},
           {"eta", [](Draft& d, const YAML::Node& n) { d.config.theory.eta = real(n); }},
           {"p_source", [](Draft& d, const YAML::Node& n) { d.config.theory.p_source = parse_p_source(text(n)); }},
           {"strongly_convex_augmented",
            [](Draft& d, const YAML::Node& n) { d.config.theory.strongly_convex_augmented = boolean(n); }},
           {"require_admissible",
            [](Draft& d, const YAML::Node& n) { d.config.theory.require_admissible = boolean(n); }},
       }},
      {"certify",
       {
           {"enabled", [](Draft& d, const YAML::Node& n) { d.config.certify.enabled = boolean(n); }},
           {"required", [](Draft& d, const YAML::Node& n) { d.config.certify.required = boolean(n); }},
           {"probes", [](Draft& d, const YAML::Node& n) { d.config.certify.probes = int32(n); }},
           {"queries", [](Draft& d, const YAML::Node& n) { d.config.certify.queries = int32(n); }},
           {"probe_radius", [](Draft& d, const YAML::Node& n) { d.config.certify.probe_radius = real(n); }},
       }},
  };
  return g;
}

}  // namespace

ExperimentConfig parse_config_text(std::string_view source) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(source));
  } catch (const YAML::ParserException& e) {
    throw ConfigParseError(e.msg, e.mark.line + 1, e.mark.column + 1);
  }

  Draft d;
  std::vector<std::string> errors;
  if (root.IsDefined() && !root.IsNull()) {
    if (!root.IsMap()) {
      errors.push_back(where(root) + "the document must be a mapping of sections");
      throw ConfigValidationError(errors);
    }
    const auto& g = grammar();
    for (const auto& sec : root) {
      const std::string name = sec.first.Scalar();
      const auto it = g.find(name);
      if (it == g.end()) {
        errors.push_back(where(sec.first) + "unknown section '" + name + "'");
        continue;
      }
      if (sec.second.IsNull()) continue;
      if (!sec.second.IsMap()) {
        errors.push_back(where(sec.second) + "section '" + name + "' must hold key: value pairs");
        continue;
      }
      for (const auto& kv : sec.second) {
        const std::string key = kv.first.Scalar();
        const auto setter = it->second.find(key);
        if (setter == it->second.end()) {
          errors.push_back(where(kv.first) + "unknown key '" + name + "." + key + "'");
          continue;
        }
        try {
          setter->second(d, kv.second);
        } catch (const std::exception& e) {
          errors.push_back(where(kv.second) + name + "." + key + ": " + e.what());
        }
      }
    }
  }

  if (d.estimator_enabled) {
    if (!d.refresh_period_set) {
      const bool erm = d.config.problem.kind == ProblemKind::logistic &&
                       d.config.zeroth.kind == ZerothKind::minibatch;
      d.estimator.refresh_period = erm ? default_refresh_period(d.config.problem.samples,
                                                                 d.config.zeroth.batch_size)
                                       : default_refresh_period(0, 0);
    }
    d.config.estimator = d.estimator;
  }

  for (auto& e : d.config.validate()) errors.push_back(std::move(e));
  if (!errors.empty()) throw ConfigValidationError(std::move(errors));
  return d.config;
}

ExperimentConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

std::string canonical_config(const ExperimentConfig& c) {
  std::ostringstream o;
  auto num = [](double v) { return format_double(v); };
  auto opt = [&num](const std::optional<double>& v) { return v ? num(*v) : std::string("none"); };
  auto flag = [](bool b) { return b ? "true" : "false"; };
  o << "problem.kind = " << to_string(c.problem.kind) << '\n'
    << "problem.dim = " << c.problem.dim << '\n'
    << "problem.lambda_min = " << num(c.problem.lambda_min) << '\n'
    << "problem.lambda_max = " << num(c.problem.lambda_max) << '\n'
    << "problem.samples = " << c.problem.samples << '\n'
    << "problem.x0_scale = " << num(c.problem.x0_scale) << '\n'
    << "problem.seed = " << c.problem.seed << '\n'
    << "aloe.alpha0 = " << num(c.aloe.alpha0) << '\n'
    << "aloe.alpha_max = " << num(c.aloe.alpha_max) << '\n'
    << "aloe.theta = " << num(c.aloe.theta) << '\n'
    << "aloe.gamma = " << num(c.aloe.gamma) << '\n'
    << "aloe.eps_f = " << opt(c.eps_f_input) << '\n'
    << "aloe.shared_sample = " << flag(c.aloe.shared_sample) << '\n'
    << "zeroth.kind = " << to_string(c.zeroth.kind) << '\n'
    << "zeroth.mode = " << to_string(c.zeroth.spec.mode) << '\n'
    << "zeroth.eps_f = " << num(c.zeroth.spec.eps_f) << '\n'
    << "zeroth.nu = " << num(c.zeroth.spec.nu) << '\n'
    << "zeroth.b = " << num(c.zeroth.spec.b) << '\n'
    << "zeroth.u = " << num(c.zeroth.spec.mean_slack) << '\n'
    << "zeroth.batch_size = " << c.zeroth.batch_size << '\n'
    << "first.kind = " << to_string(c.first.kind) << '\n'
    << "first.eps_g = " << num(c.first.spec.eps_g) << '\n'
    << "first.kappa = " << num(c.first.spec.kappa) << '\n'
    << "first.delta = " << num(c.first.spec.delta) << '\n'
    << "first.failure_scale = " << num(c.first.failure_scale) << '\n'
    << "first.failure_offset = " << num(c.first.failure_offset) << '\n'
    << "first.batch_size = " << c.first.batch_size << '\n'
    << "first.sigma = " << num(c.first.sigma) << '\n'
    << "first.directions = " << c.first.directions << '\n'
    << "stopping.class = " << to_string(c.stopping.cls) << '\n'
    << "stopping.eps = " << num(c.stopping.eps) << '\n'
    << "stopping.eps1 = " << opt(c.stopping.eps1) << '\n'
    << "estimator.enabled = " << flag(c.estimator.has_value()) << '\n';
  if (c.estimator)
    o << "estimator.n_calls = " << c.estimator->n_calls << '\n'
      << "estimator.scale_factor = " << num(c.estimator->scale_factor) << '\n'
      << "estimator.refresh_period = " << c.estimator->refresh_period << '\n';
  o << "experiment.trials = " << c.n_trials << '\n'
    << "experiment.budget = " << c.budget << '\n'
    << "experiment.base_seed = " << c.base_seed << '\n'
    << "experiment.checkpoints = [";
  for (std::size_t i = 0; i < c.checkpoints.size(); ++i)
    o << (i ? ", " : "") << c.checkpoints[i];
  o << "]\n"
    << "experiment.write_traces = " << flag(c.write_traces) << '\n'
    << "theory.s = " << num(c.theory.s) << '\n'
    << "theory.p_hat = " << opt(c.theory.p_hat) << '\n'
    << "theory.eta = " << opt(c.theory.eta) << '\n'
    << "theory.p_source = " << to_string(c.theory.p_source) << '\n'
    << "theory.strongly_convex_augmented = " << flag(c.theory.strongly_convex_augmented) << '\n'
    << "theory.require_admissible = " << flag(c.theory.require_admissible) << '\n'
    << "certify.enabled = " << flag(c.certify.enabled) << '\n'
    << "certify.required = " << flag(c.certify.required) << '\n'
    << "certify.probes = " << c.certify.probes << '\n'
    << "certify.queries = " << c.certify.queries << '\n'
    << "certify.probe_radius = " << num(c.certify.probe_radius) << '\n';
  return o.str();
}

std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 digest failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 0xf]);
  }
  return out;
}

std::string config_digest(const ExperimentConfig& config) {
  return sha256_hex(canonical_config(config));
}

}  // namespace aloe
