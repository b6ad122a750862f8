#include "sawlab/stats.hpp"

#include <algorithm>
#include <cmath>

namespace sawlab {

double integrated_autocorrelation(std::span<const double> x, std::size_t max_lag) {
  const std::size_t n = x.size();
  if (n < 4) return 0.5;
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  auto autocov = [&](std::size_t lag) {
    double s = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) s += (x[i] - mean) * (x[i + lag] - mean);
    return s / static_cast<double>(n);
  };
  const double c0 = autocov(0);
  if (!(c0 > 0.0)) return 0.5;
  const std::size_t limit = std::min(max_lag, n / 2);
  // Gamma_k = rho(2k) + rho(2k+1), summed while positive.
  double sum_gamma = 0.0;
  for (std::size_t k = 0; 2 * k + 1 <= limit; ++k) {
    const double gamma = (autocov(2 * k) + autocov(2 * k + 1)) / c0;
    if (gamma <= 0.0) break;
    sum_gamma += gamma;
  }
  return std::max(0.5, sum_gamma - 0.5);
}

SeriesSummary summarize_series(std::span<const double> x, int batches) {
  SeriesSummary s;
  s.count = x.size();
  for (double v : x) s.sum += v;
  if (x.empty()) return s;
  const std::size_t b = std::min<std::size_t>(static_cast<std::size_t>(batches), x.size());
  const std::size_t size = x.size() / b;
  s.batch_means.reserve(b);
  for (std::size_t i = 0; i < b; ++i) {
    double acc = 0.0;
    for (std::size_t j = i * size; j < (i + 1) * size; ++j) acc += x[j];
    s.batch_means.push_back(acc / static_cast<double>(size));
  }
  // Autocovariances cost O(n) per lag; the leading window is enough for tau.
  constexpr std::size_t kTauWindow = std::size_t{1} << 17;
  s.tau_int = integrated_autocorrelation(x.first(std::min(x.size(), kTauWindow)));
  return s;
}

ObservableStats combine_chains(std::string name, std::span<const SeriesSummary> chains) {
  ObservableStats out;
  out.name = std::move(name);
  double sum = 0.0;
  std::size_t count = 0;
  std::vector<double> batches;
  double tau = 0.0;
  for (const auto& c : chains) {
    sum += c.sum;
    count += c.count;
    batches.insert(batches.end(), c.batch_means.begin(), c.batch_means.end());
    tau += c.tau_int;
  }
  out.samples = count;
  if (count == 0) return out;
  out.mean = sum / static_cast<double>(count);
  out.tau_int = tau / static_cast<double>(chains.size());
  if (batches.size() >= 2) {
    double bm = 0.0;
    for (double v : batches) bm += v;
    bm /= static_cast<double>(batches.size());
    double var = 0.0;
    for (double v : batches) var += (v - bm) * (v - bm);
    var /= static_cast<double>(batches.size() - 1);
    out.std_error = std::sqrt(var / static_cast<double>(batches.size()));
  }
  return out;
}

}  // namespace sawlab
