#include "sawlab/mcmc.hpp"

#include <absl/container/flat_hash_map.h>

#include <algorithm>
#include <atomic>
#include <cassert>
#include <cmath>
#include <numeric>
#include <thread>

#include "sawlab/errors.hpp"
#include "sawlab/rng.hpp"
#include "sawlab/symmetry.hpp"
#include "site_codec.hpp"

namespace sawlab {

Step PathView::step(std::size_t i) const {
  for (int k = 0; k < d_; ++k) {
    const Coord delta = coord(i + 1, k) - coord(i, k);
    if (delta != 0) return Step(k, delta);
  }
  return Step();
}

LatticePath PathView::to_path() const {
  std::vector<Step> steps;
  steps.reserve(n_);
  for (std::size_t i = 0; i < n_; ++i) steps.push_back(step(i));
  return LatticePath(d_, std::move(steps));
}

const ObservableStats& SampleStats::get(const std::string& name) const {
  for (const auto& o : observables) {
    if (o.name == name) return o;
  }
  throw ParamError("unknown observable '" + name + "'");
}

void ChainConfig::validate() const {
  if (d < 1) throw InvalidConfig("d must be >= 1");
  if (n < 1) throw InvalidConfig("n must be >= 1");
  if (!(beta >= 0)) throw InvalidConfig("beta must be >= 0");
  if (sweeps == 0) throw InvalidConfig("sweeps must be positive");
  if (burn_in == 0) throw InvalidConfig("burn_in must be positive");
  if (burn_in >= sweeps) throw InvalidConfig("burn_in must be smaller than sweeps");
  if (!(move_mix >= 0.0 && move_mix <= 1.0)) throw InvalidConfig("move_mix must lie in [0,1]");
  if (chains < 1) throw InvalidConfig("chains must be >= 1");
  const auto radius = detail::SiteCodec::max_radius(d);
  if (radius < 8 * static_cast<std::int64_t>(n) + 8) {
    throw InvalidConfig("walk too long for the site encoding in this dimension");
  }
}

namespace {

LatticeSymmetry random_symmetry(int d, Rng& rng) {
  while (true) {
    std::vector<int> perm(static_cast<std::size_t>(d));
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = perm.size(); i > 1; --i) {
      std::swap(perm[i - 1], perm[rng.below(i)]);
    }
    std::vector<int> sign(static_cast<std::size_t>(d));
    for (int& s : sign) s = (rng.next() >> 63) ? -1 : 1;
    LatticeSymmetry g(std::move(perm), std::move(sign));
    if (!g.is_identity()) return g;
  }
}

// One Markov chain on walks. Sites are stored in a free-floating frame:
// a move displaces whichever side of the cut point is shorter, so S_0 may
// drift; observables are measured relative to S_0.
class Chain {
 public:
  Chain(int d, int n, double beta, bool hard_core, double move_mix, std::uint64_t seed)
      : d_(d),
        n_(static_cast<std::size_t>(n)),
        beta_(beta),
        hard_core_(hard_core),
        move_mix_(move_mix),
        rng_(seed),
        codec_(d),
        recenter_limit_(detail::SiteCodec::max_radius(d) / 2),
        sites_((n_ + 1) * static_cast<std::size_t>(d), 0) {
    for (std::size_t i = 0; i <= n_; ++i) sites_[i * static_cast<std::size_t>(d)] = static_cast<Coord>(i);
    rebuild_occupancy();
  }

  void sweep() {
    for (std::size_t t = 0; t < n_; ++t) {
      if (hard_core_ || (move_mix_ > 0.0 && rng_.uniform() < move_mix_)) {
        ++proposed_B_;
        accepted_B_ += pivot_move();
      } else {
        ++proposed_A_;
        accepted_A_ += step_move();
      }
    }
#ifndef NDEBUG
    if (hard_core_) assert(silt_ == 0 && occupancy_.size() == n_ + 1);
#endif
  }

  PathView view() const { return PathView(d_, n_, sites_, silt_); }
  std::int64_t silt() const { return silt_; }

  std::int64_t chi2() const {
    std::int64_t s = 0;
    for (int k = 0; k < d_; ++k) {
      const std::int64_t c = at(n_, k) - at(0, k);
      s += c * c;
    }
    return s;
  }

  std::int64_t hull2() const {
    std::int64_t best = 0;
    for (std::size_t i = 0; i <= n_; ++i) {
      std::int64_t s = 0;
      for (int k = 0; k < d_; ++k) {
        const std::int64_t c = at(i, k) - at(0, k);
        s += c * c;
      }
      best = std::max(best, s);
    }
    return best;
  }

  std::uint64_t proposed_A_ = 0, accepted_A_ = 0, proposed_B_ = 0, accepted_B_ = 0;

 private:
  Coord at(std::size_t i, int k) const {
    return sites_[i * static_cast<std::size_t>(d_) + static_cast<std::size_t>(k)];
  }
  std::span<const Coord> site(std::size_t i) const {
    return {sites_.data() + i * static_cast<std::size_t>(d_), static_cast<std::size_t>(d_)};
  }

  void rebuild_occupancy() {
    occupancy_.clear();
    silt_ = 0;
    for (std::size_t i = 0; i <= n_; ++i) silt_ += occupancy_[codec_.encode(site(i))]++;
  }

  // Resample one step; the shorter side of the step is translated.
  bool step_move() {
    const std::size_t i = rng_.below(n_);
    const Step fresh(static_cast<int>(rng_.below(static_cast<std::uint64_t>(d_))),
                     (rng_.next() >> 63) ? -1 : 1);
    const auto du = static_cast<std::size_t>(d_);
    auto& delta = scratch_a_;
    for (std::size_t k = 0; k < du; ++k) delta[k] = at(i + 1, static_cast<int>(k)) - at(i, static_cast<int>(k));
    const Step old = [&] {
      for (int k = 0; k < d_; ++k) {
        if (delta[static_cast<std::size_t>(k)] != 0) return Step(k, delta[static_cast<std::size_t>(k)]);
      }
      return Step();
    }();
    if (old == fresh) return true;
    std::fill(delta.begin(), delta.end(), 0);
    delta[static_cast<std::size_t>(fresh.axis())] += fresh.sign();
    delta[static_cast<std::size_t>(old.axis())] -= old.sign();

    std::size_t first, last;
    int dir;
    if (n_ - i <= i + 1) {
      first = i + 1, last = n_, dir = 1;
    } else {
      first = 0, last = i, dir = -1;
    }
    moved_.resize((last - first + 1) * du);
    for (std::size_t j = first; j <= last; ++j) {
      for (std::size_t k = 0; k < du; ++k) {
        moved_[(j - first) * du + k] = at(j, static_cast<int>(k)) + dir * delta[k];
      }
    }
    return try_move(first, last);
  }

  // Apply a random non-identity lattice symmetry about a pivot site to the
  // shorter side of the walk.
  bool pivot_move() {
    if (n_ < 2) return true;
    const std::size_t pivot = 1 + rng_.below(n_ - 1);
    const LatticeSymmetry g = random_symmetry(d_, rng_);
    std::size_t first, last;
    if (n_ - pivot <= pivot) {
      first = pivot + 1, last = n_;
    } else {
      first = 0, last = pivot - 1;
    }
    const auto du = static_cast<std::size_t>(d_);
    moved_.resize((last - first + 1) * du);
    auto& rel = scratch_a_;
    auto& img = scratch_b_;
    for (std::size_t j = first; j <= last; ++j) {
      for (std::size_t k = 0; k < du; ++k) rel[k] = at(j, static_cast<int>(k)) - at(pivot, static_cast<int>(k));
      g.apply(rel, img);
      for (std::size_t k = 0; k < du; ++k) moved_[(j - first) * du + k] = at(pivot, static_cast<int>(k)) + img[k];
    }
    return try_move(first, last);
  }

  // Moves sites first..last to moved_, updating J incrementally; reverts
  // unless the Metropolis test passes.
  bool try_move(std::size_t first, std::size_t last) {
    const auto du = static_cast<std::size_t>(d_);
    const std::size_t count = last - first + 1;
    std::int64_t delta_silt = 0;
    for (std::size_t j = first; j <= last; ++j) delta_silt -= remove(codec_.encode(site(j)));
    std::size_t added = 0;
    bool blocked = false;
    for (; added < count; ++added) {
      const std::int64_t before = add(codec_.encode({moved_.data() + added * du, du}));
      delta_silt += before;
      if (hard_core_ && before > 0) {
        ++added;
        blocked = true;
        break;
      }
    }
    bool accept = !blocked;
    if (accept && !hard_core_ && delta_silt > 0 && beta_ > 0.0) {
      accept = rng_.uniform() < std::exp(-beta_ * static_cast<double>(delta_silt));
    }
    if (!accept) {
      for (std::size_t a = 0; a < added; ++a) remove(codec_.encode({moved_.data() + a * du, du}));
      for (std::size_t j = first; j <= last; ++j) add(codec_.encode(site(j)));
      return false;
    }
    std::copy(moved_.begin(), moved_.end(),
              sites_.begin() + static_cast<std::ptrdiff_t>(first * du));
    silt_ += delta_silt;
    maybe_recenter();
    return true;
  }

  // Returns the number of other visits at the key before removal.
  std::int64_t remove(std::uint64_t key) {
    auto it = occupancy_.find(key);
    const std::int64_t others = it->second - 1;
    if (--it->second == 0) occupancy_.erase(it);
    return others;
  }

  std::int64_t add(std::uint64_t key) { return occupancy_[key]++; }

  void maybe_recenter() {
    bool far = false;
    for (int k = 0; k < d_; ++k) far |= std::abs(static_cast<std::int64_t>(at(0, k))) > recenter_limit_;
    if (!far) return;
    const auto du = static_cast<std::size_t>(d_);
    const std::vector<Coord> origin(sites_.begin(), sites_.begin() + static_cast<std::ptrdiff_t>(du));
    for (std::size_t i = 0; i < sites_.size(); ++i) sites_[i] -= origin[i % du];
    rebuild_occupancy();
  }

  int d_;
  std::size_t n_;
  double beta_;
  bool hard_core_;
  double move_mix_;
  Rng rng_;
  detail::SiteCodec codec_;
  std::int64_t recenter_limit_;
  std::vector<Coord> sites_;
  std::vector<Coord> moved_;
  std::vector<Coord> scratch_a_ = std::vector<Coord>(static_cast<std::size_t>(d_));
  std::vector<Coord> scratch_b_ = std::vector<Coord>(static_cast<std::size_t>(d_));
  absl::flat_hash_map<std::uint64_t, std::int32_t> occupancy_;
  std::int64_t silt_ = 0;
};

template <typename Fn>
void for_each_chain(int chains, int threads, Fn&& fn) {
  const auto total = static_cast<std::size_t>(chains);
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, threads)), total);
  if (workers <= 1) {
    for (std::size_t c = 0; c < total; ++c) fn(c);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t c = next++; c < total; c = next++) fn(c);
    });
  }
  for (auto& t : pool) t.join();
}

struct ChainResult {
  std::vector<SeriesSummary> series;
  std::uint64_t proposed_A = 0, accepted_A = 0, proposed_B = 0, accepted_B = 0;
};

SampleStats run_chains(const ChainConfig& config, bool hard_core,
                       std::span<const Observable> extra) {
  config.validate();
  const std::size_t n_obs = 4 + extra.size();
  std::vector<ChainResult> results(static_cast<std::size_t>(config.chains));
  for_each_chain(config.chains, config.threads, [&](std::size_t c) {
    Chain chain(config.d, config.n, config.beta, hard_core,
                hard_core ? 1.0 : config.move_mix, stream_seed(config.seed, c));
    for (std::uint64_t s = 0; s < config.burn_in; ++s) chain.sweep();
    const std::uint64_t kept = config.sweeps - config.burn_in;
    std::vector<std::vector<double>> series(n_obs);
    for (auto& v : series) v.reserve(kept);
    for (std::uint64_t s = 0; s < kept; ++s) {
      chain.sweep();
      const auto chi2 = static_cast<double>(chain.chi2());
      series[0].push_back(std::sqrt(chi2));
      series[1].push_back(chi2);
      series[2].push_back(static_cast<double>(chain.silt()));
      series[3].push_back(std::sqrt(static_cast<double>(chain.hull2())));
      if (!extra.empty()) {
        const PathView view = chain.view();
        for (std::size_t e = 0; e < extra.size(); ++e) series[4 + e].push_back(extra[e].eval(view));
      }
    }
    auto& r = results[c];
    for (auto& v : series) {
      r.series.push_back(summarize_series(v));
      std::vector<double>().swap(v);
    }
    r.proposed_A = chain.proposed_A_;
    r.accepted_A = chain.accepted_A_;
    r.proposed_B = chain.proposed_B_;
    r.accepted_B = chain.accepted_B_;
  });

  SampleStats out;
  out.d = config.d;
  out.n = config.n;
  out.beta = hard_core ? INFINITY : config.beta;
  out.sweeps = config.sweeps;
  out.burn_in = config.burn_in;
  out.seed = config.seed;
  out.chains = config.chains;
  std::vector<std::string> names{"chi", "chi2", "J", "hull_radius"};
  for (const auto& e : extra) names.push_back(e.name);
  for (std::size_t o = 0; o < n_obs; ++o) {
    std::vector<SeriesSummary> per_chain;
    for (const auto& r : results) per_chain.push_back(r.series[o]);
    out.observables.push_back(combine_chains(names[o], per_chain));
  }
  for (const auto& r : results) {
    out.proposals_A += r.proposed_A;
    out.proposals_B += r.proposed_B;
    out.acc_A += static_cast<double>(r.accepted_A);
    out.acc_B += static_cast<double>(r.accepted_B);
  }
  out.acc_A = out.proposals_A ? out.acc_A / static_cast<double>(out.proposals_A) : 0.0;
  out.acc_B = out.proposals_B ? out.acc_B / static_cast<double>(out.proposals_B) : 0.0;
  out.samples = out.observables.front().samples;
  return out;
}

std::vector<LatticePath> collect_paths(const ChainConfig& config, std::uint64_t thin,
                                       bool hard_core) {
  config.validate();
  if (thin == 0) throw InvalidConfig("thin must be positive");
  std::vector<std::vector<LatticePath>> per_chain(static_cast<std::size_t>(config.chains));
  for_each_chain(config.chains, config.threads, [&](std::size_t c) {
    Chain chain(config.d, config.n, config.beta, hard_core,
                hard_core ? 1.0 : config.move_mix, stream_seed(config.seed, c));
    for (std::uint64_t s = 0; s < config.burn_in; ++s) chain.sweep();
    for (std::uint64_t s = 1; s <= config.sweeps - config.burn_in; ++s) {
      chain.sweep();
      if (s % thin == 0) per_chain[c].push_back(chain.view().to_path());
    }
  });
  std::vector<LatticePath> out;
  for (auto& v : per_chain) {
    for (auto& p : v) out.push_back(std::move(p));
  }
  return out;
}

}  // namespace

SampleStats sample_weakly_saw(const ChainConfig& config, std::span<const Observable> extra) {
  return run_chains(config, false, extra);
}

SampleStats sample_saw_pivot(int d, int n, std::uint64_t sweeps, std::uint64_t burn_in,
                             std::uint64_t seed, int chains, int threads,
                             std::span<const Observable> extra) {
  ChainConfig config;
  config.d = d;
  config.n = n;
  config.beta = 0.0;
  config.sweeps = sweeps;
  config.burn_in = burn_in;
  config.move_mix = 1.0;
  config.seed = seed;
  config.chains = chains;
  config.threads = threads;
  return run_chains(config, true, extra);
}

std::vector<LatticePath> collect_weakly_saw_paths(const ChainConfig& config, std::uint64_t thin) {
  return collect_paths(config, thin, false);
}

std::vector<LatticePath> collect_saw_paths(const ChainConfig& config, std::uint64_t thin) {
  return collect_paths(config, thin, true);
}

std::vector<LatticePath> sample_srw_paths(int d, int n, std::size_t count, std::uint64_t seed) {
  if (d < 1 || n < 0) throw InvalidConfig("sample_srw_paths: bad dimension or length");
  Rng rng(seed);
  std::vector<LatticePath> out;
  out.reserve(count);
  for (std::size_t c = 0; c < count; ++c) {
    std::vector<Step> steps;
    steps.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      const std::uint64_t r = rng.below(2 * static_cast<std::uint64_t>(d));
      steps.emplace_back(static_cast<int>(r / 2), (r % 2) ? -1 : 1);
    }
    out.emplace_back(d, std::move(steps));
  }
  return out;
}

}  // namespace sawlab
