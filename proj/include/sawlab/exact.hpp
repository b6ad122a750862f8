#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "sawlab/walk.hpp"

namespace sawlab {

/// Leaf paths (after fixing the first step) allowed in one enumeration.
inline constexpr std::uint64_t kDefaultEnumerationBudget = 1'000'000'000ULL;

/// Joint counts of (J_n, chi_n^2) over all (2d)^n simple random walk paths.
/// Every beta-dependent exact moment is a finite sum over this table.
struct EnsembleTable {
  struct Cell {
    std::int64_t silt = 0;
    std::int64_t chi2 = 0;
    std::uint64_t count = 0;
  };

  int d = 1;
  int n = 0;
  double total_paths = 1.0;   ///< (2d)^n
  std::vector<Cell> cells;    ///< sorted by (silt, chi2), zero counts dropped

  std::uint64_t count_with_silt(std::int64_t silt) const;
};

struct HistogramBin {
  std::int64_t silt = 0;
  std::uint64_t count = 0;
  double weight = 0.0;  ///< count * exp(-beta * silt)
};

/// Exact moments under the Domb-Joyce measure Q^beta_n.
struct ExactMoments {
  int d = 1;
  int n = 0;
  double beta = 0.0;
  double Z = 1.0;  ///< E_0 exp(-beta J_n)
  double mean_chi = 0.0;
  double mean_chi2 = 0.0;
  double mean_J = 0.0;
  std::vector<HistogramBin> histogram;
};

struct SawCount {
  int d = 1;
  int n = 0;
  std::uint64_t count = 0;
  double connective_estimate = 1.0;  ///< c_n^(1/n)
};

struct SiltBandReport {
  double lhs = 0.0;  ///< E_0(e^{-beta J} 1{J > B n})
  double rhs = 0.0;  ///< E_0(e^{-beta J} 1{J = 0})
  bool holds = false;
  double b_star_plugin = 0.0;  ///< (ln 2d - ln c_n^(1/n)) / beta
  double b_star_lower = 0.0;   ///< rigorous bracket from d <= e^omega0 <= 2d-1
  double b_star_upper = 0.0;
  bool hypothesis_met = false;  ///< B > b_star_plugin
};

struct LowerBandReport {
  int n = 0;
  double lhs = 0.0;  ///< E_0(e^{-beta J} 1{J <= n^(1-delta)})
  double rhs = 0.0;  ///< E_0(e^{-beta J} 1{J < b n})
  double ratio = 0.0;
};

struct LowerBandTrend {
  std::vector<LowerBandReport> rows;
  bool non_increasing = true;
};

EnsembleTable enumerate_table(int d, int n,
                              std::uint64_t budget = kDefaultEnumerationBudget,
                              int threads = 1);

ExactMoments moments_from_table(const EnsembleTable& table, double beta);

ExactMoments enumerate_ensemble(int d, int n, double beta,
                                std::uint64_t budget = kDefaultEnumerationBudget,
                                int threads = 1);

SawCount saw_count(int d, int n, std::uint64_t budget = kDefaultEnumerationBudget);

/// m-step return probabilities p_0..p_max of the d-dimensional SRW.
std::vector<double> return_probabilities(int d, int max_steps);

/// Exact E_0 J_n = sum_{m=1}^n (n+1-m) p_m(0).
double srw_silt_mean(int d, int n, int cap = 5000);

SiltBandReport silt_band_check(const EnsembleTable& table, double beta, double B);
SiltBandReport silt_band_check(int d, int n, double beta, double B,
                               std::uint64_t budget = kDefaultEnumerationBudget);

LowerBandReport silt_lower_band_check(const EnsembleTable& table, double beta,
                                      double delta, double b);
LowerBandReport silt_lower_band_check(int d, int n, double beta, double delta,
                                      double b,
                                      std::uint64_t budget = kDefaultEnumerationBudget);
LowerBandTrend silt_lower_band_trend(int d, std::span<const int> n_grid,
                                     double beta, double delta, double b,
                                     std::uint64_t budget = kDefaultEnumerationBudget);

/// Calls visit(steps, sites) for every one of the (2d)^n paths in
/// lexicographic step order (+e1 < -e1 < +e2 < ...). Sites are row-major.
using PathVisitor =
    std::function<void(std::span<const Step>, std::span<const Coord>)>;
void for_each_path(int d, int n, const PathVisitor& visit,
                   std::uint64_t budget = kDefaultEnumerationBudget);

}  // namespace sawlab
