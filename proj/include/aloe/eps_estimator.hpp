#pragma once

#include <cstdint>
#include <vector>

#include "aloe/aloe.hpp"
#include "aloe/oracles.hpp"

namespace aloe {

struct EstimatorConfig {
  int n_calls = 30;
  double scale_factor = 0.2;
  int refresh_period = 50;  // iterations per epoch

  void validate() const;
};

/// scale_factor times the sample standard deviation (denominator n - 1) of
/// n_calls zeroth-oracle values at x, all drawn from `rng`.
double estimate_eps_f(const ZerothOracle& zeroth, const Vector& x, const EstimatorConfig& config,
                      Rng& rng);

/// Iterations per epoch: dataset_size / batch_size (at least 1) for
/// mini-batch problems, 50 otherwise.
int default_refresh_period(int dataset_size, int batch_size);

/// Re-estimates eps_f at the current iterate every refresh_period iterations,
/// each time on the eps_estimate stream keyed by the iteration index.
class EpochEstimator final : public SlackSchedule {
 public:
  EpochEstimator(const ZerothOracle& zeroth, EstimatorConfig config, std::uint64_t seed);
  double eps_f_at(int k, const Vector& x) override;

  struct Entry {
    int k = 0;
    double eps_f = 0.0;
  };
  const std::vector<Entry>& history() const { return history_; }

 private:
  const ZerothOracle& zeroth_;
  EstimatorConfig config_;
  std::uint64_t seed_;
  double current_ = 0.0;
  std::vector<Entry> history_;
};

}  // namespace aloe
