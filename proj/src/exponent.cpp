#include "sawlab/exponent.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

#include "sawlab/errors.hpp"

namespace sawlab {

Rational mu_formula(int d) {
  if (d < 1) throw ParamError("mu(d) needs d >= 1");
  if (d == 1) return {1, 1};
  // 1/4 + 1/d = (d + 4) / (4d), which exceeds 1/2 only for d < 4.
  if (d >= 4) return {1, 2};
  long num = d + 4;
  long den = 4L * d;
  const long g = std::gcd(num, den);
  return {num / g, den / g};
}

void MomentSeries::validate() const {
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].n <= rows[i - 1].n) throw ParamError("moment series n must be strictly increasing");
  }
}

std::string observable_name(FitObservable observable) {
  return observable == FitObservable::chi ? "chi" : "chi2";
}

ExponentFit fit_exponent(const MomentSeries& series, FitObservable observable,
                         std::optional<FitWindow> window) {
  series.validate();
  std::vector<const MomentRow*> rows;
  if (window) {
    for (const auto& r : series.rows) {
      if (r.n >= window->n_min && r.n <= window->n_max) rows.push_back(&r);
    }
  } else {
    const std::size_t k = series.rows.size();
    const std::size_t keep = std::max<std::size_t>(std::min<std::size_t>(3, k), (k + 1) / 2);
    for (std::size_t i = k - keep; i < k; ++i) rows.push_back(&series.rows[i]);
  }
  if (rows.size() < 3) throw InsufficientData("exponent fit needs at least 3 rows in the window");

  const bool chi2 = observable == FitObservable::chi2;
  const std::size_t k = rows.size();
  std::vector<double> x(k), y(k), w(k, 1.0);
  bool weighted = true;
  for (std::size_t i = 0; i < k; ++i) {
    const double m = chi2 ? rows[i]->mean_chi2 : rows[i]->mean_chi;
    const double se = chi2 ? rows[i]->stderr_chi2 : rows[i]->stderr_chi;
    if (!(m > 0.0)) throw InsufficientData("moments must be positive for a log fit");
    x[i] = std::log(static_cast<double>(rows[i]->n));
    y[i] = std::log(m);
    if (se > 0.0) {
      w[i] = (m / se) * (m / se);
    } else {
      weighted = false;
    }
  }
  if (!weighted) std::fill(w.begin(), w.end(), 1.0);

  double sw = 0.0, sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    sw += w[i];
    sx += w[i] * x[i];
    sy += w[i] * y[i];
  }
  const double xbar = sx / sw;
  const double ybar = sy / sw;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    sxx += w[i] * (x[i] - xbar) * (x[i] - xbar);
    sxy += w[i] * (x[i] - xbar) * (y[i] - ybar);
  }
  const double slope = sxy / sxx;

  ExponentFit fit;
  fit.intercept = ybar - slope * xbar;
  fit.points = k;
  fit.n_min = rows.front()->n;
  fit.n_max = rows.back()->n;
  double ssr = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double r = y[i] - (fit.intercept + slope * x[i]);
    fit.residuals.push_back(r);
    ssr += w[i] * r * r;
  }
  const double dof = static_cast<double>(k - 2);
  fit.residual_se = std::sqrt(ssr / dof);
  const boost::math::students_t t_dist(dof);
  const double t = boost::math::quantile(boost::math::complement(t_dist, 0.025));
  double half = t * fit.residual_se / std::sqrt(sxx);
  if (weighted) half = std::max(half, 1.959963984540054 / std::sqrt(sxx));

  const double scale = chi2 ? 0.5 : 1.0;
  fit.nu_hat = slope * scale;
  fit.half_width = half * scale;
  fit.pointwise = y.back() / x.back() * scale;
  return fit;
}

namespace {

RescaledSequence rescale(const std::vector<double>& values) {
  RescaledSequence s;
  s.values = values;
  s.min = *std::min_element(values.begin(), values.end());
  s.max = *std::max_element(values.begin(), values.end());
  bool up = true;
  bool down = true;
  for (std::size_t i = 1; i < values.size(); ++i) {
    up = up && values[i] >= values[i - 1];
    down = down && values[i] <= values[i - 1];
  }
  if (s.max - s.min <= 1e-12 * std::max(1.0, std::abs(s.max))) {
    s.trend = "constant";
  } else if (up) {
    s.trend = "increasing";
  } else if (down) {
    s.trend = "decreasing";
  } else {
    s.trend = "mixed";
  }
  return s;
}

}  // namespace

TheoremReport theorem_report(const MomentSeries& series, int d, double beta) {
  if (series.rows.empty()) throw InsufficientData("empty moment series");
  TheoremReport out;
  out.d = d;
  out.beta = beta;
  out.mu = mu_formula(d).value();
  std::vector<double> chi, chi2;
  for (const auto& r : series.rows) {
    const double n = static_cast<double>(r.n);
    out.n.push_back(r.n);
    chi.push_back(r.mean_chi * std::pow(n, -out.mu));
    chi2.push_back(r.mean_chi2 * std::pow(n, -2.0 * out.mu));
  }
  out.chi = rescale(chi);
  out.chi2 = rescale(chi2);
  return out;
}

}  // namespace sawlab
