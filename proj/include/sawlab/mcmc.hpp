#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "sawlab/stats.hpp"
#include "sawlab/walk.hpp"

namespace sawlab {

/// Metropolis chain settings. `sweeps` counts every sweep including the
/// burn-in; one sweep is n proposals.
struct ChainConfig {
  int d = 2;
  int n = 16;
  double beta = 0.0;
  std::uint64_t sweeps = 10000;
  std::uint64_t burn_in = 1000;
  double move_mix = 0.2;  ///< probability of a pivot proposal
  std::uint64_t seed = 1;
  int chains = 1;
  int threads = 1;  ///< worker threads; never changes the results

  void validate() const;
};

/// Read-only view of a chain's current walk, translated so S_0 = 0.
class PathView {
 public:
  PathView(int d, std::size_t n, std::span<const Coord> sites, std::int64_t silt)
      : d_(d), n_(n), sites_(sites), silt_(silt) {}

  int dimension() const { return d_; }
  std::size_t length() const { return n_; }
  std::int64_t silt() const { return silt_; }
  Coord coord(std::size_t i, int k) const {
    const auto d = static_cast<std::size_t>(d_);
    return sites_[i * d + static_cast<std::size_t>(k)] - sites_[static_cast<std::size_t>(k)];
  }
  Step step(std::size_t i) const;
  LatticePath to_path() const;

 private:
  int d_;
  std::size_t n_;
  std::span<const Coord> sites_;
  std::int64_t silt_;
};

struct Observable {
  std::string name;
  std::function<double(const PathView&)> eval;
};

struct SampleStats {
  int d = 1;
  int n = 0;
  double beta = 0.0;
  std::uint64_t sweeps = 0;
  std::uint64_t burn_in = 0;
  std::uint64_t seed = 0;
  int chains = 0;
  std::vector<ObservableStats> observables;  ///< chi, chi2, J, hull_radius, extras...
  double acc_A = 0.0;  ///< single-step resample acceptance
  double acc_B = 0.0;  ///< pivot acceptance
  std::uint64_t proposals_A = 0;
  std::uint64_t proposals_B = 0;
  std::size_t samples = 0;

  const ObservableStats& get(const std::string& name) const;
};

/// Domb-Joyce weakly self-avoiding walk: single-step resampling mixed with
/// pivot moves, both accepted with min(1, exp(-beta dJ)).
SampleStats sample_weakly_saw(const ChainConfig& config,
                              std::span<const Observable> extra = {});

/// Pivot algorithm on strictly self-avoiding walks, started from a rod.
SampleStats sample_saw_pivot(int d, int n, std::uint64_t sweeps,
                             std::uint64_t burn_in, std::uint64_t seed,
                             int chains, int threads = 1,
                             std::span<const Observable> extra = {});

/// Post-burn-in snapshots every `thin` sweeps, concatenated in chain order.
std::vector<LatticePath> collect_weakly_saw_paths(const ChainConfig& config,
                                                  std::uint64_t thin);
std::vector<LatticePath> collect_saw_paths(const ChainConfig& config,
                                           std::uint64_t thin);

/// Independent simple random walks.
std::vector<LatticePath> sample_srw_paths(int d, int n, std::size_t count,
                                          std::uint64_t seed);

}  // namespace sawlab
