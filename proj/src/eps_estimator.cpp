#include "aloe/eps_estimator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace aloe {

void EstimatorConfig::validate() const {
  if (n_calls < 2) throw std::invalid_argument("estimator: n_calls must be >= 2");
  if (!(scale_factor > 0.0)) throw std::invalid_argument("estimator: scale_factor must be > 0");
  if (refresh_period < 1) throw std::invalid_argument("estimator: refresh_period must be >= 1");
}

double estimate_eps_f(const ZerothOracle& zeroth, const Vector& x, const EstimatorConfig& config,
                      Rng& rng) {
  config.validate();
  // Welford's update: identical values give exactly zero spread.
  double mean = 0.0, m2 = 0.0;
  for (int i = 0; i < config.n_calls; ++i) {
    const double f = zeroth.query(x, rng);
    const double delta = f - mean;
    mean += delta / (i + 1);
    m2 += delta * (f - mean);
  }
  return config.scale_factor * std::sqrt(m2 / (config.n_calls - 1));
}

int default_refresh_period(int dataset_size, int batch_size) {
  if (dataset_size > 0 && batch_size > 0) return std::max(1, dataset_size / batch_size);
  return 50;
}

EpochEstimator::EpochEstimator(const ZerothOracle& zeroth, EstimatorConfig config,
                               std::uint64_t seed)
    : zeroth_(zeroth), config_(config), seed_(seed) {
  config_.validate();
}

double EpochEstimator::eps_f_at(int k, const Vector& x) {
  if (k % config_.refresh_period == 0) {
    Rng rng = make_stream(seed_, static_cast<std::uint64_t>(k), StreamPurpose::eps_estimate);
    current_ = estimate_eps_f(zeroth_, x, config_, rng);
    history_.push_back({k, current_});
  }
  return current_;
}

}  // namespace aloe
