#pragma once

#include <optional>
#include <string>
#include <vector>

namespace sawlab {

struct Rational {
  long num = 0;
  long den = 1;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  friend bool operator==(const Rational&, const Rational&) = default;
};

/// 1 for d = 1, max(1/2, 1/4 + 1/d) otherwise, in lowest terms.
Rational mu_formula(int d);

enum class MomentSource { exact, mcmc };

struct MomentRow {
  int n = 0;
  double mean_chi = 0.0;
  double mean_chi2 = 0.0;
  double stderr_chi = 0.0;
  double stderr_chi2 = 0.0;
  MomentSource source = MomentSource::exact;
};

struct MomentSeries {
  int d = 1;
  double beta = 0.0;
  std::vector<MomentRow> rows;  ///< n strictly increasing

  void validate() const;
};

enum class FitObservable { chi, chi2 };

struct FitWindow {
  int n_min = 0;
  int n_max = 0;
};

struct ExponentFit {
  double nu_hat = 0.0;
  double half_width = 0.0;  ///< about 95% confidence
  int n_min = 0;
  int n_max = 0;
  std::size_t points = 0;
  double intercept = 0.0;
  std::vector<double> residuals;  ///< ln moment minus fitted line
  double residual_se = 0.0;
  double pointwise = 0.0;  ///< single-point ln E / ln n at n_max (ln E / (2 ln n) for chi2)
};

/// Weighted least squares of ln(moment) on ln n. The window defaults to the
/// upper half of the rows. Throws InsufficientData for fewer than 3 rows.
ExponentFit fit_exponent(const MomentSeries& series, FitObservable observable,
                         std::optional<FitWindow> window = std::nullopt);

struct RescaledSequence {
  std::vector<double> values;
  double min = 0.0;
  double max = 0.0;
  std::string trend;  ///< constant, increasing, decreasing or mixed
};

struct TheoremReport {
  int d = 1;
  double beta = 0.0;
  double mu = 0.0;
  std::vector<int> n;
  RescaledSequence chi;   ///< n^-mu E chi
  RescaledSequence chi2;  ///< n^-2mu E chi^2
};

TheoremReport theorem_report(const MomentSeries& series, int d, double beta);

std::string observable_name(FitObservable observable);

}  // namespace sawlab
