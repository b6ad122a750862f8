#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace sawlab {

inline constexpr int kBatchCount = 32;

/// Summary of one chain's time series of a single observable.
struct SeriesSummary {
  double sum = 0.0;
  std::size_t count = 0;
  std::vector<double> batch_means;
  double tau_int = 0.5;
};

struct ObservableStats {
  std::string name;
  double mean = 0.0;
  double std_error = 0.0;  ///< batch-means standard error
  double tau_int = 0.5;    ///< Sokal convention, 1/2 for uncorrelated data
  std::size_t samples = 0;
};

/// Integrated autocorrelation time with Geyer's initial positive sequence
/// truncation. Lags beyond max_lag are ignored.
double integrated_autocorrelation(std::span<const double> x, std::size_t max_lag = 5000);

SeriesSummary summarize_series(std::span<const double> x, int batches = kBatchCount);

/// Pools per-chain summaries (in the given order) into one estimate.
ObservableStats combine_chains(std::string name, std::span<const SeriesSummary> chains);

}  // namespace sawlab
