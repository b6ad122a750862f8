#include "sawlab/exact.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>
#include <thread>

#include "sawlab/errors.hpp"

namespace sawlab {

namespace {

double ipow(double base, int e) {
  double r = 1.0;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

void check_dims(int d, int n) {
  if (d < 1) throw ParamError("dimension must be >= 1");
  if (n < 0) throw ParamError("length must be >= 0");
}

void check_budget(int d, int exponent, std::uint64_t budget, const char* what) {
  const double leaves = ipow(2.0 * d, std::max(exponent, 0));
  if (leaves > static_cast<double>(budget)) {
    throw BudgetExceeded(std::string(what) + ": " + std::to_string(leaves) +
                         " paths exceed the enumeration budget of " +
                         std::to_string(budget) + "; use engine=mcmc instead");
  }
}

// Dense (2n+1)^d grid of visit counts walked by depth-first search.
class GridWalker {
 public:
  GridWalker(int d, int n) : d_(d), n_(n) {
    const std::size_t side = 2 * static_cast<std::size_t>(n) + 1;
    stride_.resize(static_cast<std::size_t>(d));
    std::size_t cells = 1;
    for (int k = 0; k < d; ++k) {
      stride_[static_cast<std::size_t>(k)] = static_cast<std::int64_t>(cells);
      cells *= side;
    }
    visits_.assign(cells, 0);
    pos_.assign(static_cast<std::size_t>(d), 0);
    origin_ = 0;
    for (int k = 0; k < d; ++k) origin_ += n * stride_[static_cast<std::size_t>(k)];
  }

  std::int64_t origin() const { return origin_; }

 protected:
  int d_;
  int n_;
  std::vector<std::int64_t> stride_;
  std::vector<std::uint16_t> visits_;
  std::vector<Coord> pos_;
  std::int64_t origin_;
};

class TableEnumerator : public GridWalker {
 public:
  TableEnumerator(int d, int n)
      : GridWalker(d, n),
        chi2_span_(static_cast<std::size_t>(n) * n + 1),
        dense_((static_cast<std::size_t>(n) * (n + 1) / 2 + 1) * chi2_span_, 0) {}

  // Runs the subtree below a fixed prefix of steps.
  void run_prefix(std::span<const Step> prefix) {
    std::int64_t idx = origin_;
    std::int64_t r2 = 0;
    std::int64_t silt = 0;
    ++visits_[static_cast<std::size_t>(idx)];
    for (Step s : prefix) {
      const auto k = static_cast<std::size_t>(s.axis());
      r2 += 2 * s.sign() * pos_[k] + 1;
      pos_[k] += s.sign();
      idx += s.sign() * stride_[k];
      silt += visits_[static_cast<std::size_t>(idx)]++;
    }
    dfs(static_cast<int>(prefix.size()), idx, r2, silt);
    for (auto it = prefix.rbegin(); it != prefix.rend(); ++it) {
      const auto k = static_cast<std::size_t>(it->axis());
      --visits_[static_cast<std::size_t>(idx)];
      idx -= it->sign() * stride_[k];
      pos_[k] -= it->sign();
    }
    --visits_[static_cast<std::size_t>(idx)];
  }

  void add_into(std::vector<std::uint64_t>& acc) const {
    if (acc.empty()) acc.assign(dense_.size(), 0);
    for (std::size_t i = 0; i < dense_.size(); ++i) acc[i] += dense_[i];
  }

  std::size_t chi2_span() const { return chi2_span_; }

 private:
  void dfs(int depth, std::int64_t idx, std::int64_t r2, std::int64_t silt) {
    if (depth == n_) {
      ++dense_[static_cast<std::size_t>(silt) * chi2_span_ + static_cast<std::size_t>(r2)];
      return;
    }
    const bool last = depth + 1 == n_;
    for (int k = 0; k < d_; ++k) {
      const auto ku = static_cast<std::size_t>(k);
      for (int s = 1; s >= -1; s -= 2) {
        const std::int64_t next = idx + s * stride_[ku];
        const std::int64_t r2n = r2 + 2 * s * pos_[ku] + 1;
        const std::int64_t siltn = silt + visits_[static_cast<std::size_t>(next)];
        if (last) {
          ++dense_[static_cast<std::size_t>(siltn) * chi2_span_ + static_cast<std::size_t>(r2n)];
          continue;
        }
        pos_[ku] += s;
        ++visits_[static_cast<std::size_t>(next)];
        dfs(depth + 1, next, r2n, siltn);
        --visits_[static_cast<std::size_t>(next)];
        pos_[ku] -= s;
      }
    }
  }

  std::size_t chi2_span_;
  std::vector<std::uint64_t> dense_;
};

std::vector<Step> all_steps(int d) {
  std::vector<Step> steps;
  for (int k = 0; k < d; ++k) {
    steps.emplace_back(k, 1);
    steps.emplace_back(k, -1);
  }
  return steps;
}

// Prefixes of `depth` free steps after the fixed first step +e1.
std::vector<std::vector<Step>> prefixes(int d, int depth) {
  const auto steps = all_steps(d);
  std::vector<std::vector<Step>> out{{Step(0, 1)}};
  for (int level = 0; level < depth; ++level) {
    std::vector<std::vector<Step>> next;
    for (const auto& p : out) {
      for (Step s : steps) {
        auto q = p;
        q.push_back(s);
        next.push_back(std::move(q));
      }
    }
    out = std::move(next);
  }
  return out;
}

template <typename Fn>
void parallel_for(std::size_t tasks, int threads, Fn&& fn) {
  const auto workers = static_cast<std::size_t>(std::max(1, threads));
  if (workers == 1 || tasks <= 1) {
    for (std::size_t t = 0; t < tasks; ++t) fn(0, t);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::min(workers, tasks); ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t t = next++; t < tasks; t = next++) fn(w, t);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

std::uint64_t EnsembleTable::count_with_silt(std::int64_t silt) const {
  std::uint64_t c = 0;
  for (const Cell& cell : cells) {
    if (cell.silt == silt) c += cell.count;
  }
  return c;
}

EnsembleTable enumerate_table(int d, int n, std::uint64_t budget, int threads) {
  check_dims(d, n);
  check_budget(d, n - 1, budget, "enumerate_ensemble");
  EnsembleTable table;
  table.d = d;
  table.n = n;
  table.total_paths = ipow(2.0 * d, n);
  if (n == 0) {
    table.cells.push_back({0, 0, 1});
    return table;
  }

  // Fix the first step to +e1 and scale by 2d; every other first step is the
  // image of this subtree under a lattice symmetry preserving J and |S_n|.
  int depth = 0;
  const int workers = std::max(1, threads);
  while (depth < n - 1 && ipow(2.0 * d, depth) < 4.0 * workers && workers > 1) ++depth;
  const auto tasks = prefixes(d, depth);

  std::vector<TableEnumerator> local;
  local.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) local.emplace_back(d, n);
  parallel_for(tasks.size(), workers,
               [&](std::size_t w, std::size_t t) { local[w].run_prefix(tasks[t]); });

  std::vector<std::uint64_t> acc;
  for (const auto& e : local) e.add_into(acc);
  const std::size_t span = local.front().chi2_span();
  const auto symmetry = static_cast<std::uint64_t>(2 * d);
  for (std::size_t i = 0; i < acc.size(); ++i) {
    if (acc[i] == 0) continue;
    table.cells.push_back({static_cast<std::int64_t>(i / span),
                           static_cast<std::int64_t>(i % span), acc[i] * symmetry});
  }
  return table;
}

ExactMoments moments_from_table(const EnsembleTable& table, double beta) {
  ExactMoments m;
  m.d = table.d;
  m.n = table.n;
  m.beta = beta;
  double w_sum = 0.0;
  double chi_sum = 0.0;
  double chi2_sum = 0.0;
  double silt_sum = 0.0;
  for (const auto& cell : table.cells) {
    const double w = static_cast<double>(cell.count) * std::exp(-beta * static_cast<double>(cell.silt));
    w_sum += w;
    chi_sum += w * std::sqrt(static_cast<double>(cell.chi2));
    chi2_sum += w * static_cast<double>(cell.chi2);
    silt_sum += w * static_cast<double>(cell.silt);
    if (m.histogram.empty() || m.histogram.back().silt != cell.silt) {
      m.histogram.push_back({cell.silt, 0, 0.0});
    }
    m.histogram.back().count += cell.count;
    m.histogram.back().weight += w;
  }
  m.Z = w_sum / table.total_paths;
  m.mean_chi = chi_sum / w_sum;
  m.mean_chi2 = chi2_sum / w_sum;
  m.mean_J = silt_sum / w_sum;
  return m;
}

ExactMoments enumerate_ensemble(int d, int n, double beta, std::uint64_t budget,
                                int threads) {
  if (beta < 0) throw ParamError("beta must be >= 0");
  return moments_from_table(enumerate_table(d, n, budget, threads), beta);
}

namespace {

class SawCounter : public GridWalker {
 public:
  SawCounter(int d, int n, std::uint64_t budget) : GridWalker(d, n), budget_(budget) {}

  std::uint64_t count_from_first_step() {
    visits_[static_cast<std::size_t>(origin_)] = 1;
    const std::int64_t idx = origin_ + stride_[0];
    visits_[static_cast<std::size_t>(idx)] = 1;
    return dfs(1, idx);
  }

 private:
  std::uint64_t dfs(int depth, std::int64_t idx) {
    if (++nodes_ > budget_) {
      throw BudgetExceeded("saw_count: search exceeded the node budget of " +
                           std::to_string(budget_));
    }
    if (depth == n_) return 1;
    std::uint64_t total = 0;
    for (int k = 0; k < d_; ++k) {
      for (int s = 1; s >= -1; s -= 2) {
        const std::int64_t next = idx + s * stride_[static_cast<std::size_t>(k)];
        auto& v = visits_[static_cast<std::size_t>(next)];
        if (v) continue;
        v = 1;
        total += dfs(depth + 1, next);
        v = 0;
      }
    }
    return total;
  }

  std::uint64_t budget_;
  std::uint64_t nodes_ = 0;
};

}  // namespace

SawCount saw_count(int d, int n, std::uint64_t budget) {
  check_dims(d, n);
  SawCount out;
  out.d = d;
  out.n = n;
  if (n == 0) {
    out.count = 1;
    return out;
  }
  SawCounter counter(d, n, budget);
  out.count = counter.count_from_first_step() * static_cast<std::uint64_t>(2 * d);
  out.connective_estimate = std::pow(static_cast<double>(out.count), 1.0 / n);
  return out;
}

std::vector<double> return_probabilities(int d, int max_steps) {
  if (d < 1) throw ParamError("dimension must be >= 1");
  if (max_steps < 0) throw ParamError("max_steps must be >= 0");
  constexpr double kTrim = 1e-16;
  const auto m = static_cast<std::size_t>(max_steps);

  // One coordinate: lazy-free +-1 walk on a line, trimmed at the tails.
  std::vector<double> p1(m + 1, 0.0);
  {
    std::vector<double> cur(2 * m + 3, 0.0);
    std::vector<double> nxt(cur.size(), 0.0);
    const std::size_t c = m + 1;
    cur[c] = 1.0;
    std::size_t lo = c;
    std::size_t hi = c;
    p1[0] = 1.0;
    for (std::size_t step = 1; step <= m; ++step) {
      for (std::size_t x = lo - 1; x <= hi + 1; ++x) nxt[x] = 0.5 * (cur[x - 1] + cur[x + 1]);
      for (std::size_t x = lo; x <= hi; ++x) cur[x] = 0.0;
      std::swap(cur, nxt);
      --lo;
      ++hi;
      while (lo < c && cur[lo] < kTrim) cur[lo++] = 0.0;
      while (hi > c && cur[hi] < kTrim) cur[hi--] = 0.0;
      p1[step] = cur[c];
    }
  }

  // Add coordinates one at a time: in dimension j a step moves the new
  // coordinate with probability 1/j, so the m steps split binomially.
  std::vector<double> prev = p1;
  for (int j = 2; j <= d; ++j) {
    const double q = 1.0 / j;
    std::vector<double> out(m + 1, 0.0);
    std::vector<double> row{1.0};
    out[0] = 1.0;
    for (std::size_t steps = 1; steps <= m; ++steps) {
      std::vector<double> next(steps + 1, 0.0);
      for (std::size_t k = 0; k <= steps; ++k) {
        double v = 0.0;
        if (k > 0) v += row[k - 1] * q;
        if (k < steps) v += row[k] * (1.0 - q);
        next[k] = v;
      }
      row.swap(next);
      double acc = 0.0;
      for (std::size_t k = 0; k <= steps; k += 2) {
        if ((steps - k) % 2 != 0) continue;
        acc += row[k] * p1[k] * prev[steps - k];
      }
      out[steps] = acc;
    }
    prev.swap(out);
  }
  return prev;
}

double srw_silt_mean(int d, int n, int cap) {
  check_dims(d, n);
  if (n > cap) {
    throw CapExceeded("srw_silt_mean: n = " + std::to_string(n) +
                      " exceeds the cap of " + std::to_string(cap));
  }
  const auto p = return_probabilities(d, n);
  double total = 0.0;
  for (int step = 1; step <= n; ++step) {
    total += static_cast<double>(n + 1 - step) * p[static_cast<std::size_t>(step)];
  }
  return total;
}

SiltBandReport silt_band_check(const EnsembleTable& table, double beta, double B) {
  if (!(beta > 0)) throw ParamError("silt_band_check requires beta > 0");
  const int d = table.d;
  const int n = table.n;
  SiltBandReport r;
  const double threshold = B * n;
  double lhs = 0.0;
  double rhs = 0.0;
  for (const auto& cell : table.cells) {
    const double w = static_cast<double>(cell.count) * std::exp(-beta * static_cast<double>(cell.silt));
    if (static_cast<double>(cell.silt) > threshold) lhs += w;
    if (cell.silt == 0) rhs += w;
  }
  r.lhs = lhs / table.total_paths;
  r.rhs = rhs / table.total_paths;
  r.holds = r.lhs < r.rhs;
  const double ln2d = std::log(2.0 * d);
  const double omega_plugin =
      n > 0 ? std::log(static_cast<double>(table.count_with_silt(0))) / n : std::log(2.0 * d);
  r.b_star_plugin = (ln2d - omega_plugin) / beta;
  r.b_star_lower = (ln2d - std::log(2.0 * d - 1.0)) / beta;
  r.b_star_upper = (ln2d - std::log(static_cast<double>(d))) / beta;
  r.hypothesis_met = B > r.b_star_plugin;
  return r;
}

SiltBandReport silt_band_check(int d, int n, double beta, double B,
                               std::uint64_t budget) {
  return silt_band_check(enumerate_table(d, n, budget), beta, B);
}

LowerBandReport silt_lower_band_check(const EnsembleTable& table, double beta,
                                      double delta, double b) {
  if (!(delta > 0)) throw ParamError("delta must be > 0");
  if (!(b > 0)) throw ParamError("b must be > 0");
  const double n = table.n;
  const double low_cut = std::pow(n, 1.0 - delta);
  const double band_cut = b * n;
  LowerBandReport r;
  r.n = table.n;
  for (const auto& cell : table.cells) {
    const double j = static_cast<double>(cell.silt);
    const double w = static_cast<double>(cell.count) * std::exp(-beta * j);
    if (j <= low_cut) r.lhs += w;
    if (j < band_cut) r.rhs += w;
  }
  r.lhs /= table.total_paths;
  r.rhs /= table.total_paths;
  r.ratio = r.rhs > 0 ? r.lhs / r.rhs : 0.0;
  return r;
}

LowerBandReport silt_lower_band_check(int d, int n, double beta, double delta,
                                      double b, std::uint64_t budget) {
  return silt_lower_band_check(enumerate_table(d, n, budget), beta, delta, b);
}

LowerBandTrend silt_lower_band_trend(int d, std::span<const int> n_grid,
                                     double beta, double delta, double b,
                                     std::uint64_t budget) {
  LowerBandTrend trend;
  for (int n : n_grid) {
    trend.rows.push_back(silt_lower_band_check(d, n, beta, delta, b, budget));
    const auto& rows = trend.rows;
    if (rows.size() >= 2 && rows.back().ratio > rows[rows.size() - 2].ratio) {
      trend.non_increasing = false;
    }
  }
  return trend;
}

void for_each_path(int d, int n, const PathVisitor& visit, std::uint64_t budget) {
  check_dims(d, n);
  check_budget(d, n, budget, "for_each_path");
  const auto du = static_cast<std::size_t>(d);
  const auto steps_all = all_steps(d);
  std::vector<Step> steps(static_cast<std::size_t>(n));
  std::vector<Coord> sites((static_cast<std::size_t>(n) + 1) * du, 0);
  std::vector<std::size_t> choice(static_cast<std::size_t>(n), 0);

  // Odometer over step choices; sites are refreshed from the first changed step.
  auto rebuild_from = [&](std::size_t first) {
    for (std::size_t i = first; i < steps.size(); ++i) {
      steps[i] = steps_all[choice[i]];
      std::copy_n(sites.begin() + static_cast<std::ptrdiff_t>(i * du), du,
                  sites.begin() + static_cast<std::ptrdiff_t>((i + 1) * du));
      sites[(i + 1) * du + static_cast<std::size_t>(steps[i].axis())] += steps[i].sign();
    }
  };
  rebuild_from(0);
  while (true) {
    visit(steps, sites);
    std::size_t pos = steps.size();
    while (pos > 0) {
      --pos;
      if (++choice[pos] < steps_all.size()) break;
      choice[pos] = 0;
      if (pos == 0) return;
    }
    if (steps.empty()) return;
    rebuild_from(pos);
  }
}

}  // namespace sawlab
