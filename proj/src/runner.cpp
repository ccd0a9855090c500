#include "aloe/runner.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "aloe/config.hpp"
#include "aloe/csv.hpp"

namespace aloe {

namespace {

using Json = nlohmann::ordered_json;

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Every file the runner writes goes through here so the manifest can list it.
class OutputDir {
 public:
  explicit OutputDir(std::filesystem::path root) : root_(std::move(root)) {
    std::filesystem::create_directories(root_);
  }

  void write(const std::string& rel, const std::string& content, bool listed = true) {
    const auto path = root_ / rel;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
    out.close();
    if (!out) throw std::runtime_error("write failed for " + path.string());
    if (listed) files_.push_back({rel, content.size(), sha256_hex(content)});
  }

  Json inventory() const {
    Json arr = Json::array();
    for (const auto& f : files_)
      arr.push_back({{"path", f.path}, {"bytes", f.bytes}, {"sha256", f.sha256}});
    // The manifest cannot hash itself; it is listed by name only.
    arr.push_back({{"path", "manifest.json"}});
    return arr;
  }

 private:
  struct Entry {
    std::string path;
    std::size_t bytes;
    std::string sha256;
  };
  std::filesystem::path root_;
  std::vector<Entry> files_;
};

struct ManifestInfo {
  std::optional<std::string> digest;
  std::optional<std::uint64_t> base_seed;
  std::string started;
};

int finish(OutputDir& dir, const ManifestInfo& info, int exit_code,
           const std::vector<std::string>& failures, const RunOptions& options) {
  Json fj;
  fj["exit_code"] = exit_code;
  fj["failures"] = failures;
  dir.write("failures.json", fj.dump(2) + "\n");

  Json m;
  m["tool"] = "aloe_lab";
  m["version"] = kToolVersion;
  m["config_digest"] = info.digest ? Json(*info.digest) : Json(nullptr);
  m["base_seed"] = info.base_seed ? Json(*info.base_seed) : Json(nullptr);
  m["started_utc"] = info.started;
  m["finished_utc"] = utc_now();
  m["exit_code"] = exit_code;
  m["files"] = dir.inventory();
  dir.write("manifest.json", m.dump(2) + "\n", false);

  if (options.log) {
    for (const auto& f : failures) *options.log << "FAIL " << f << '\n';
    *options.log << "exit " << exit_code << '\n';
  }
  return exit_code;
}

std::string trials_csv(const TrialSummary& s) {
  std::ostringstream o;
  o << "seed,T_eps,censored,frac_true,frac_success,lemma2_ok,lemma3_ok,lemma4_ok,eps_f_estimates\n";
  for (const auto& t : s.trials) {
    o << t.seed << ',' << (t.T_eps ? std::to_string(*t.T_eps) : "") << ','
      << (t.T_eps ? 0 : 1) << ',' << format_double(t.frac_true) << ','
      << format_double(t.frac_success) << ','
      << (t.verdicts.lemma2 && t.verdicts.corollary1 ? 1 : 0) << ','
      << (t.verdicts.lemma3 ? 1 : 0) << ',' << (t.verdicts.lemma4 ? 1 : 0) << ',';
    for (std::size_t i = 0; i < t.eps_history.size(); ++i)
      o << (i ? ";" : "") << format_double(t.eps_history[i].eps_f);
    o << '\n';
  }
  return o.str();
}

std::string summary_csv(const TrialSummary& s) {
  std::ostringstream o;
  o << "t,empirical_tail,theory_bound,wilson_lo,wilson_hi,dominates\n";
  for (const auto& r : s.checkpoints)
    o << r.t << ',' << format_double(r.empirical_tail) << ',' << format_double(r.theory_bound)
      << ',' << format_double(r.wilson.lo) << ',' << format_double(r.wilson.hi) << ','
      << (r.dominates ? 1 : 0) << '\n';
  return o.str();
}

std::string certification_csv(const CertificationReport& rep) {
  std::ostringstream o;
  o << "probe,alpha,queries,accurate,accuracy_upper,accuracy_pass,mean_error,mean_error_se,"
       "mean_pass,mgf_worst_excess,mgf_pass\n";
  for (const auto& p : rep.probes)
    o << p.probe << ',' << format_double(p.alpha) << ',' << p.queries << ',' << p.accurate << ','
      << format_double(p.accuracy_upper) << ',' << (p.accuracy_pass ? 1 : 0) << ','
      << format_double(p.mean_error) << ',' << format_double(p.mean_error_se) << ','
      << (p.mean_pass ? 1 : 0) << ',' << format_double(p.mgf_worst_excess) << ','
      << (p.mgf_pass ? 1 : 0) << '\n';
  return o.str();
}

void print_summary(std::ostream& out, const TrialSummary& s) {
  const auto n = s.trials.size();
  out << "trials " << n << ", theory " << (s.theory.admissible ? "admissible" : "inadmissible")
      << ", t_min " << s.theory.t_min << '\n';
  out << "large-step " << s.lemma2_pass << '/' << n << "  corollary " << s.corollary1_pass << '/'
      << n << "  small-step " << s.lemma3_pass << '/' << n << "  good-iteration " << s.lemma4_pass
      << '/' << n << '\n';
  out << "pooled true fraction " << format_double(static_cast<double>(s.pooled_true) /
                                                  static_cast<double>(std::max(1LL, s.pooled_iterations)))
      << " (p = " << format_double(s.theory.p) << ")\n";
  out << "t\tP(T<=t)\tbound\twilson_hi\n";
  for (const auto& r : s.checkpoints)
    out << r.t << '\t' << format_double(r.empirical_tail) << '\t' << format_double(r.theory_bound)
        << '\t' << format_double(r.wilson.hi) << (r.dominates ? "" : "\tFAIL") << '\n';
}

}  // namespace

int run_config(const ExperimentConfig& config_in, const std::filesystem::path& out_dir,
               const RunOptions& options) {
  ManifestInfo info;
  info.started = utc_now();
  std::optional<OutputDir> dir;
  try {
    dir.emplace(out_dir);
  } catch (const std::exception& e) {
    if (options.log) *options.log << "cannot create output directory: " << e.what() << '\n';
    return kExitRuntime;
  }

  ExperimentConfig config = config_in;
  if (options.seed) config.base_seed = *options.seed;
  if (options.trials) config.n_trials = *options.trials;
  if (options.jobs) config.jobs = *options.jobs;
  info.base_seed = config.base_seed;

  try {
    auto errors = config.validate();
    if (!errors.empty()) return finish(*dir, info, kExitConfig, errors, options);
    info.digest = config_digest(config);
    dir->write("config.canonical.txt", canonical_config(config));

    const Fixture fixture = build_fixture(config);
    const TheoryConstants theory = compute_theory(theory_inputs(config, fixture));
    dir->write("constants.txt", constants_report(theory));
    if (config.theory.require_admissible && !theory.admissible) {
      std::vector<std::string> v;
      for (const auto& s : theory.violations) v.push_back("inadmissible: " + s);
      return finish(*dir, info, kExitConfig, v, options);
    }

    const TrialSummary summary = run_trials(config);
    dir->write("trials.csv", trials_csv(summary));
    dir->write("summary.csv", summary_csv(summary));
    if (summary.certification)
      dir->write("certification.csv", certification_csv(*summary.certification));
    if (config.write_traces) {
      for (const auto& t : summary.trials) {
        if (!t.trace) continue;
        std::ostringstream o;
        write_trace_csv(*t.trace, o);
        dir->write("traces/trace_" + std::to_string(t.seed) + ".csv", o.str());
      }
    }
    if (options.log && !options.quiet) print_summary(*options.log, summary);
    const auto failures = summary.failures();
    return finish(*dir, info, failures.empty() ? kExitOk : kExitCheckFailed, failures, options);
  } catch (const InadmissibleError& e) {
    return finish(*dir, info, kExitConfig, {std::string("inadmissible: ") + e.what()}, options);
  } catch (const std::invalid_argument& e) {
    return finish(*dir, info, kExitConfig, {e.what()}, options);
  } catch (const std::exception& e) {
    try {
      return finish(*dir, info, kExitRuntime, {std::string("runtime error: ") + e.what()}, options);
    } catch (const std::exception&) {
      return kExitRuntime;
    }
  }
}

int run_config_file(const std::filesystem::path& config_path, const std::filesystem::path& out_dir,
                    const RunOptions& options) {
  ExperimentConfig config;
  std::vector<std::string> errors;
  try {
    config = parse_config_file(config_path);
  } catch (const ConfigParseError& e) {
    errors.push_back(config_path.string() + ": " + e.what());
  } catch (const ConfigValidationError& e) {
    for (const auto& m : e.errors()) errors.push_back(config_path.string() + ": " + m);
  } catch (const std::exception& e) {
    errors.push_back(e.what());
  }
  if (errors.empty()) return run_config(config, out_dir, options);

  ManifestInfo info;
  info.started = utc_now();
  try {
    OutputDir dir(out_dir);
    return finish(dir, info, kExitConfig, errors, options);
  } catch (const std::exception& e) {
    if (options.log) {
      for (const auto& m : errors) *options.log << "FAIL " << m << '\n';
      *options.log << "cannot write output directory: " << e.what() << '\n';
    }
    return kExitConfig;
  }
}

}  // namespace aloe
