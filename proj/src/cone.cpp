#include "sawlab/cone.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <numbers>
#include <stdexcept>

#include "sawlab/errors.hpp"

namespace sawlab {

namespace {

std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t h) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < size; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

double log_sum_exp_add(double acc, double term) {
  if (acc == -std::numeric_limits<double>::infinity()) return term;
  if (term == -std::numeric_limits<double>::infinity()) return acc;
  const double hi = std::max(acc, term);
  return hi + std::log1p(std::exp(std::min(acc, term) - hi));
}

}  // namespace

TestSet::TestSet(int dimension, std::vector<std::vector<double>> directions)
    : dimension_(dimension), count_(directions.size()) {
  if (dimension < 1) throw ParamError("test set dimension must be at least 1");
  if (directions.empty()) throw ParamError("test set must not be empty");
  const auto d = static_cast<std::size_t>(dimension);
  data_.reserve(count_ * d);
  for (auto& u : directions) {
    if (u.size() != d) throw ParamError("direction has the wrong dimension");
    const double norm = std::sqrt(dot(u, u));
    if (!(norm > 0.0)) throw ParamError("zero direction in test set");
    for (double v : u) data_.push_back(v / norm);
  }
  for (std::size_t i = 0; i < count_; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      double diff = 0.0;
      for (std::size_t k = 0; k < d; ++k) diff = std::max(diff, std::abs(data_[i * d + k] - data_[j * d + k]));
      if (diff < 1e-12) throw ParamError("repeated direction in test set");
    }
  }
  fingerprint_ = fnv1a(&dimension_, sizeof dimension_, 0xcbf29ce484222325ULL);
  fingerprint_ = fnv1a(data_.data(), data_.size() * sizeof(double), fingerprint_);
}

std::uint64_t cube_grid_size(int d, int m) {
  if (d < 1 || m < 2) throw ParamError("cube grid needs d >= 1 and m >= 2");
  std::uint64_t all = 1;
  std::uint64_t inner = 1;
  for (int k = 0; k < d; ++k) {
    all *= static_cast<std::uint64_t>(m);
    inner *= static_cast<std::uint64_t>(m - 2);
  }
  return all - inner;
}

TestSet cube_face_test_set(int d, int m) {
  const std::uint64_t expected = cube_grid_size(d, m);
  std::vector<std::vector<double>> dirs;
  dirs.reserve(expected);
  std::vector<int> j(static_cast<std::size_t>(d), 0);
  while (true) {
    bool on_surface = false;
    for (int v : j) on_surface = on_surface || v == 0 || v == m - 1;
    if (on_surface) {
      std::vector<double> u(j.size());
      for (std::size_t k = 0; k < j.size(); ++k) u[k] = -1.0 + 2.0 * j[k] / (m - 1);
      dirs.push_back(std::move(u));
    }
    std::size_t k = 0;
    while (k < j.size() && ++j[k] == m) j[k++] = 0;
    if (k == j.size()) break;
  }
  return TestSet(d, std::move(dirs));
}

TestSet build_test_set(int d, int n, double v) {
  if (d < 1 || n < 1 || !(v > 0.0)) throw ParamError("build_test_set needs d >= 1, n >= 1, v > 0");
  if (d == 1) return TestSet(1, {{1.0}, {-1.0}});
  const double target = v * std::pow(static_cast<double>(n), 1.0 - 1.0 / d);
  if (d == 2) {
    const auto count = std::max<long>(1, std::lround(target));
    std::vector<std::vector<double>> dirs;
    for (long k = 0; k < count; ++k) {
      const double a = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(count);
      dirs.push_back({std::cos(a), std::sin(a)});
    }
    return TestSet(2, std::move(dirs));
  }
  int best = 2;
  double best_gap = std::abs(std::log(static_cast<double>(cube_grid_size(d, 2)) / target));
  for (int m = 3;; ++m) {
    const double count = static_cast<double>(cube_grid_size(d, m));
    const double gap = std::abs(std::log(count / target));
    if (gap < best_gap) {
      best = m;
      best_gap = gap;
    }
    if (count > 4.0 * target) break;
  }
  return cube_face_test_set(d, best);
}

double ray_distance2(std::span<const double> x, std::span<const double> u) {
  const double xx = dot(x, x);
  const double t = dot(x, u);
  if (t <= 0.0) return xx;
  return std::max(0.0, xx - t * t);
}

ConeDecomposition assign_cones(const SiltPointProcess& phi, const TestSet& V) {
  if (V.size() == 0) throw ParamError("empty test set");
  if (V.dimension() != phi.dimension) throw ParamError("test set and point process dimensions differ");
  const std::size_t L = V.size();
  ConeDecomposition out;
  out.test_set = V.fingerprint();
  out.members.assign(L, {});
  out.cone_silt.assign(L, 0);
  out.total = phi.total;

  std::vector<std::size_t> lex(L);
  for (std::size_t i = 0; i < L; ++i) lex[i] = i;
  std::sort(lex.begin(), lex.end(), [&](std::size_t a, std::size_t b) {
    const auto ua = V.direction(a);
    const auto ub = V.direction(b);
    return std::lexicographical_compare(ua.begin(), ua.end(), ub.begin(), ub.end());
  });

  std::map<std::vector<std::size_t>, std::size_t> dealt;
  std::vector<double> x(static_cast<std::size_t>(phi.dimension));
  std::vector<double> dist(L);
  for (std::size_t p = 0; p < phi.points.size(); ++p) {
    const auto& pt = phi.points[p];
    for (std::size_t k = 0; k < x.size(); ++k) x[k] = pt.site[k];
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t l = 0; l < L; ++l) {
      dist[l] = ray_distance2(x, V.direction(l));
      best = std::min(best, dist[l]);
    }
    const double tol = 1e-9 * std::max(1.0, dot(x, x));
    std::vector<std::size_t> tied;
    for (std::size_t l : lex) {
      if (dist[l] <= best + tol) tied.push_back(l);
    }
    std::size_t line = tied.front();
    if (tied.size() > 1) line = tied[dealt[tied]++ % tied.size()];
    out.members[line].push_back(p);
    out.cone_silt[line] += pt.multiplicity;
  }

  std::int64_t sum = 0;
  for (auto c : out.cone_silt) sum += c;
  if (sum != phi.total) throw std::logic_error("cone decomposition does not partition J_n");
  return out;
}

ClassParams default_class_params(int d, double beta) {
  if (!(beta > 0.0)) throw ParamError("class parameters need beta > 0");
  ClassParams p;
  p.a1 = 0.5 / beta;
  p.a2 = 4.0 / beta;
  p.b1 = 0.1 / beta;
  p.b2 = (std::log(2.0 * d) - std::log(static_cast<double>(d))) / beta;
  p.delta = 0.05;
  return p;
}

namespace {

std::vector<std::size_t> lines_within(const std::vector<std::int64_t>& silt, double lo, double hi) {
  std::vector<std::size_t> out;
  for (std::size_t l = 0; l < silt.size(); ++l) {
    const double s2 = 2.0 * static_cast<double>(silt[l]);
    if (s2 >= lo && s2 <= hi) out.push_back(l);
  }
  return out;
}

}  // namespace

std::vector<std::size_t> LineClasses::r_class(double r) const {
  const double nr = std::pow(static_cast<double>(n), r);
  return lines_within(cone_silt, params.a1 * nr, params.a2 * nr);
}

std::vector<std::size_t> LineClasses::r_star_class(double r) const {
  const double nn = static_cast<double>(n);
  return lines_within(cone_silt, params.a1 * std::pow(nn, r), params.a2 * std::pow(nn, r + params.delta));
}

std::int64_t LineClasses::silt_of(std::span<const std::size_t> lines) const {
  std::int64_t s = 0;
  for (auto l : lines) s += cone_silt[l];
  return s;
}

LineClasses classify_lines(const ConeDecomposition& decomp, const ClassParams& params, int n) {
  if (!(params.a1 > 0.0) || params.a1 >= params.a2) throw ParamError("class parameters need 0 < a1 < a2");
  if (!(params.delta > 0.0)) throw ParamError("class parameters need delta > 0");
  if (n < 1) throw ParamError("class parameters need n >= 1");
  std::int64_t sum = 0;
  for (auto c : decomp.cone_silt) sum += c;
  if (sum != decomp.total) throw std::logic_error("cone decomposition does not partition J_n");

  LineClasses out;
  out.params = params;
  out.n = n;
  out.test_set = decomp.test_set;
  out.cone_silt = decomp.cone_silt;
  const double nn = static_cast<double>(n);
  const double half_lo = params.a1 * std::sqrt(nn);
  const double half_hi = params.a2 * std::sqrt(nn);
  const double pm_lo = params.a1 * std::pow(nn, 0.5 - params.delta);
  const double pm_hi = params.a2 * std::pow(nn, 0.5 + params.delta);
  const double plus_hi = 2.0 * params.b2 * nn;
  for (std::size_t l = 0; l < out.cone_silt.size(); ++l) {
    const double s2 = 2.0 * static_cast<double>(out.cone_silt[l]);
    if (s2 >= half_lo && s2 <= half_hi) out.half.push_back(l);
    if (out.cone_silt[l] == 0) {
      out.empty.push_back(l);
    } else if (s2 < pm_lo) {
      out.minus.push_back(l);
    } else if (s2 <= pm_hi) {
      out.half_pm.push_back(l);
    } else if (s2 <= plus_hi) {
      out.plus.push_back(l);
    } else {
      out.over.push_back(l);
    }
  }
  return out;
}

std::vector<double> default_r_grid(double delta) {
  if (!(delta > 0.0)) throw ParamError("r grid spacing must be positive");
  std::vector<double> grid;
  const auto steps = static_cast<long>(std::floor(1.0 / delta + 1e-9));
  for (long k = 0; k <= steps; ++k) grid.push_back(std::min(1.0, static_cast<double>(k) * delta));
  if (grid.back() < 1.0) grid.push_back(1.0);
  return grid;
}

ShapeReport shape_of(const LineClasses& classes, std::int64_t silt, double rho,
                     std::span<const double> r_grid) {
  if (silt < 0) throw ParamError("J_n must be non-negative");
  ShapeReport out;
  out.rho = rho;
  out.delta = classes.params.delta;
  out.degenerate = silt == 0;
  const double threshold = 0.5 * std::pow(static_cast<double>(silt), 1.0 - rho);
  for (double r : r_grid) {
    ShapeRow row;
    row.r = r;
    const auto lines = classes.r_star_class(r);
    row.class_size = lines.size();
    row.class_silt = classes.silt_of(lines);
    row.flagged = !out.degenerate && static_cast<double>(row.class_silt) >= threshold;
    if (row.flagged) out.shape.push_back(r);
    out.rows.push_back(row);
  }
  return out;
}

namespace select {

ClassSelector all() {
  return [](const LineClasses& c) {
    std::vector<std::size_t> out(c.test_set_size());
    for (std::size_t l = 0; l < out.size(); ++l) out[l] = l;
    return out;
  };
}
ClassSelector half() {
  return [](const LineClasses& c) { return c.half; };
}
ClassSelector half_pm() {
  return [](const LineClasses& c) { return c.half_pm; };
}
ClassSelector minus() {
  return [](const LineClasses& c) { return c.minus; };
}
ClassSelector plus() {
  return [](const LineClasses& c) { return c.plus; };
}
ClassSelector empty() {
  return [](const LineClasses& c) { return c.empty; };
}
ClassSelector minus_or_empty() {
  return [](const LineClasses& c) {
    std::vector<std::size_t> out;
    std::merge(c.minus.begin(), c.minus.end(), c.empty.begin(), c.empty.end(), std::back_inserter(out));
    return out;
  };
}
ClassSelector r(double r) {
  return [r](const LineClasses& c) { return c.r_class(r); };
}
ClassSelector r_star(double r) {
  return [r](const LineClasses& c) { return c.r_star_class(r); };
}

}  // namespace select

double palm_line_probability(std::span<const LineClasses> ensemble, const ClassSelector& cls,
                             std::span<const double> weights) {
  if (ensemble.empty()) throw ParamError("empty ensemble");
  if (!weights.empty() && weights.size() != ensemble.size()) {
    throw ParamError("weights and ensemble sizes differ");
  }
  const auto tag = ensemble.front().test_set;
  const auto lines = ensemble.front().test_set_size();
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < ensemble.size(); ++i) {
    const auto& c = ensemble[i];
    if (c.test_set != tag || c.test_set_size() != lines) {
      throw EnsembleMismatch("ensemble members use different test sets");
    }
    const double w = weights.empty() ? 1.0 : weights[i];
    num += w * static_cast<double>(cls(c).size());
    den += w;
  }
  return num / (den * static_cast<double>(lines));
}

double palm_line_probability(std::span<const ConeSample> samples, const ClassSelector& cls) {
  std::vector<LineClasses> classes;
  std::vector<double> weights;
  classes.reserve(samples.size());
  weights.reserve(samples.size());
  for (const auto& s : samples) {
    classes.push_back(s.classes);
    weights.push_back(s.weight);
  }
  return palm_line_probability(classes, cls, weights);
}

double ConeSample::chi() const { return std::sqrt(static_cast<double>(chi2)); }

ConeSample make_cone_sample(const LatticePath& path, const TestSet& V, const ClassParams& params,
                            double weight) {
  const auto obs = observe(path);
  ConeSample s;
  s.chi2 = obs.chi2;
  s.silt = obs.silt.total;
  s.weight = weight;
  s.classes = classify_lines(assign_cones(obs.silt, V), params, static_cast<int>(path.length()));
  return s;
}

std::vector<ConeSample> condition_on_band(std::span<const ConeSample> samples, double b1,
                                          double b2, int n) {
  std::vector<ConeSample> out;
  const double lo = b1 * n;
  const double hi = b2 * n;
  for (const auto& s : samples) {
    const double j = static_cast<double>(s.silt);
    if (j >= lo && j <= hi) out.push_back(s);
  }
  return out;
}

namespace {

// log of the per-sample mean of exp(-beta |C_L|) over the lines; -inf if none.
double log_line_average(const LineClasses& c, std::span<const std::size_t> lines, double beta) {
  double acc = -std::numeric_limits<double>::infinity();
  for (auto l : lines) acc = log_sum_exp_add(acc, -beta * static_cast<double>(c.cone_silt[l]));
  if (lines.empty()) return acc;
  return acc - std::log(static_cast<double>(lines.size()));
}

AxEntry ax_from_bin(std::span<const ConeSample* const> bin, const ClassSelector& cls, double r,
                    double beta, int n) {
  AxEntry e;
  e.chi2 = bin.front()->chi2;
  e.x = bin.front()->chi();
  double acc = -std::numeric_limits<double>::infinity();
  double weight = 0.0;
  for (const auto* s : bin) {
    const auto lines = cls(s->classes);
    if (lines.empty()) {
      ++e.skipped_empty;
      continue;
    }
    ++e.used;
    acc = log_sum_exp_add(acc, std::log(s->weight) + log_line_average(s->classes, lines, beta));
    weight += s->weight;
  }
  if (e.used == 0) {
    e.empty_class = true;
    return e;
  }
  e.log_average = acc - std::log(weight);
  e.saturated = e.log_average < std::log(1e-300);
  e.a_x = -2.0 / (beta * std::pow(static_cast<double>(n), r)) * e.log_average;
  return e;
}

}  // namespace

AxEntry estimate_ax_bin(std::span<const ConeSample> bin, const ClassSelector& cls, double r,
                        double beta, int n) {
  if (bin.empty()) throw EmptyClass("empty distance bin");
  if (!(beta > 0.0)) throw ParamError("a_x needs beta > 0");
  std::vector<const ConeSample*> ptrs;
  double total = 0.0;
  for (const auto& s : bin) {
    ptrs.push_back(&s);
    total += s.weight;
  }
  auto e = ax_from_bin(ptrs, cls, r, beta, n);
  if (e.empty_class) throw EmptyClass("class is empty for every sample in the bin");
  e.probability = total > 0.0 ? 1.0 : 0.0;
  return e;
}

std::vector<AxEntry> estimate_ax(std::span<const ConeSample> samples, const ClassSelector& cls,
                                 double r, double beta, int n) {
  if (!(beta > 0.0)) throw ParamError("a_x needs beta > 0");
  std::map<std::int64_t, std::vector<const ConeSample*>> bins;
  double total = 0.0;
  for (const auto& s : samples) {
    bins[s.chi2].push_back(&s);
    total += s.weight;
  }
  std::vector<AxEntry> out;
  for (const auto& [chi2, bin] : bins) {
    auto e = ax_from_bin(bin, cls, r, beta, n);
    double w = 0.0;
    for (const auto* s : bin) w += s->weight;
    e.probability = w / total;
    out.push_back(e);
  }
  return out;
}

ConditionDReport condition_d_check(std::span<const DistancePoint> law, double gamma,
                                   double epsilon, double beta, int n, bool d_one_variant) {
  if (law.empty()) throw ParamError("empty distance law");
  if (!(beta > 0.0) || n < 1) throw ParamError("condition D needs beta > 0 and n >= 1");
  const double nn = static_cast<double>(n);
  const double mu_scale = d_one_variant ? nn : std::pow(nn, 0.75);
  const double q_scale = d_one_variant ? nn : std::sqrt(nn);

  ConditionDReport out;
  bool have_r1 = false;
  bool have_r2 = false;
  std::vector<double> log_q(law.size());
  double shift = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < law.size(); ++i) {
    const auto& p = law[i];
    if (!(p.a_x > 0.0)) throw ParamError("a_x must be positive");
    const double mu = std::sqrt(beta * p.a_x) * mu_scale;
    if (p.x <= gamma * mu * std::pow(nn, -epsilon) && (!have_r1 || p.x > out.r1)) {
      out.r1 = p.x;
      have_r1 = true;
    }
    if (p.x <= gamma * mu && (!have_r2 || p.x > out.r2)) {
      out.r2 = p.x;
      have_r2 = true;
    }
    log_q[i] = -beta * p.a_x * q_scale / 2.0;
    if (p.probability > 0.0) shift = std::max(shift, log_q[i]);
  }
  if (shift == -std::numeric_limits<double>::infinity()) shift = 0.0;

  double upper = 0.0;
  double lower = 0.0;
  double g = 0.0;
  for (std::size_t i = 0; i < law.size(); ++i) {
    const auto& p = law[i];
    const double q = std::exp(log_q[i] - shift);
    const double term = p.x * q * p.probability;
    if (p.x > out.r1) {
      upper += term;
    } else {
      lower += term;
    }
    g += std::sqrt(p.a_x) * q * p.probability;
  }
  out.log_upper = std::log(upper) + shift;
  out.log_lower = std::log(lower) + shift;
  out.log_I = std::log(upper + lower) + shift;
  out.log_g = std::log(g) + shift;
  out.I_over_g = g > 0.0 ? (upper + lower) / g : std::numeric_limits<double>::quiet_NaN();
  if (lower > 0.0) {
    out.rho_n = upper / lower;
  } else {
    out.rho_n = std::numeric_limits<double>::infinity();
    out.degenerate = true;
  }
  return out;
}

void ConeProcessAccumulator::Quotient::add(double log_weight, double chi) {
  if (log_weight == -std::numeric_limits<double>::infinity()) return;
  if (log_weight > shift) {
    const double scale = std::exp(shift - log_weight);
    num *= scale;
    den *= scale;
    shift = log_weight;
  }
  const double w = std::exp(log_weight - shift);
  num += w * chi;
  den += w;
}

std::optional<double> ConeProcessAccumulator::Quotient::value() const {
  if (!(den > 0.0)) return std::nullopt;
  return num / den;
}

void ConeProcessAccumulator::add(const ConeSample& s) {
  const auto& c = s.classes;
  if (!started_) {
    test_set_ = c.test_set;
    lines_ = c.test_set_size();
    started_ = true;
  } else if (c.test_set != test_set_ || c.test_set_size() != lines_) {
    throw EnsembleMismatch("ensemble members use different test sets");
  }
  const double lw = std::log(s.weight);
  half_.add(lw + log_line_average(c, c.half, beta_), s.chi());
  empty_.add(lw + log_line_average(c, c.empty, beta_), s.chi());
  weight_ += s.weight;
  palm_half_ += s.weight * static_cast<double>(c.half.size());
  palm_empty_ += s.weight * static_cast<double>(c.empty.size());
  palm_minus_empty_ += s.weight * static_cast<double>(c.minus.size() + c.empty.size());
}

ConeProcessReport ConeProcessAccumulator::finish() const {
  ConeProcessReport out;
  out.quotient_half = half_.value();
  out.quotient_empty = empty_.value();
  if (weight_ > 0.0) {
    const double norm = weight_ * static_cast<double>(lines_);
    out.palm_half = palm_half_ / norm;
    out.palm_empty = palm_empty_ / norm;
    out.palm_minus_or_empty = palm_minus_empty_ / norm;
  }
  const double h = out.palm_half * out.quotient_half.value_or(0.0);
  const double e = out.palm_empty * out.quotient_empty.value_or(0.0);
  const double me = out.palm_minus_or_empty * out.quotient_empty.value_or(0.0);
  out.upper_skeleton = h + e;
  out.lower_skeleton = std::max(h, me);
  return out;
}

std::optional<double> penalised_distance_quotient(std::span<const ConeSample> samples,
                                                  const ClassSelector& cls, double beta) {
  double shift = -std::numeric_limits<double>::infinity();
  std::vector<double> logs(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    logs[i] = std::log(s.weight) + log_line_average(s.classes, cls(s.classes), beta);
    shift = std::max(shift, logs[i]);
  }
  if (shift == -std::numeric_limits<double>::infinity()) return std::nullopt;
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double w = std::exp(logs[i] - shift);
    num += w * samples[i].chi();
    den += w;
  }
  return num / den;
}

ConeProcessReport cone_process_distance(std::span<const ConeSample> samples, double beta) {
  if (samples.empty()) throw ParamError("empty ensemble");
  ConeProcessAccumulator acc(beta);
  for (const auto& s : samples) acc.add(s);
  return acc.finish();
}

}  // namespace sawlab
