#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "sawlab/walk.hpp"

namespace sawlab {

/// Half-lines from the origin, given by unit direction vectors.
class TestSet {
 public:
  TestSet() = default;
  /// Normalises every direction; throws ParamError on zero or repeated ones.
  TestSet(int dimension, std::vector<std::vector<double>> directions);

  int dimension() const { return dimension_; }
  std::size_t size() const { return count_; }
  std::span<const double> direction(std::size_t i) const {
    return {data_.data() + i * static_cast<std::size_t>(dimension_),
            static_cast<std::size_t>(dimension_)};
  }
  /// Hash of the direction data; equal test sets have equal fingerprints.
  std::uint64_t fingerprint() const { return fingerprint_; }

 private:
  int dimension_ = 1;
  std::size_t count_ = 0;
  std::vector<double> data_;
  std::uint64_t fingerprint_ = 0;
};

/// Number of distinct points of the closed m-point-per-edge grid on the
/// surface of the cube [-1,1]^d, i.e. m^d - (m-2)^d.
std::uint64_t cube_grid_size(int d, int m);

/// Grid t_j = -1 + 2j/(m-1) on every face of [-1,1]^d, shared edge and corner
/// points kept once, projected radially to the unit sphere.
TestSet cube_face_test_set(int d, int m);

/// Directions roughly uniform on the sphere with |V| ~ v n^(1-1/d).
TestSet build_test_set(int d, int n, double v = 1.0);

/// Squared Euclidean distance from x to the ray {t u : t >= 0}.
double ray_distance2(std::span<const double> x, std::span<const double> u);

struct ConeDecomposition {
  std::uint64_t test_set = 0;  ///< TestSet fingerprint
  std::vector<std::vector<std::size_t>> members;  ///< per line: indices into phi.points
  std::vector<std::int64_t> cone_silt;            ///< |C_L|
  std::int64_t total = 0;                         ///< J_n
};

/// Assigns every self-intersection point to the nearest line. Points tied
/// between several lines are dealt, in lexicographic site order, round-robin
/// over the tied lines in lexicographic direction order.
ConeDecomposition assign_cones(const SiltPointProcess& phi, const TestSet& V);

struct ClassParams {
  double a1 = 0.5;
  double a2 = 4.0;
  double delta = 0.05;
  double b1 = 0.1;
  double b2 = 0.6931471805599453;
};

/// a1 beta = 0.5, a2 beta = 4, b1 beta = 0.1, b2 beta = ln(2d) - ln d.
ClassParams default_class_params(int d, double beta);

struct LineClasses {
  ClassParams params;
  int n = 0;
  std::uint64_t test_set = 0;
  std::vector<std::int64_t> cone_silt;
  std::vector<std::size_t> half;     ///< 2|C| in [a1 n^1/2, a2 n^1/2]
  std::vector<std::size_t> half_pm;  ///< 2|C| in [a1 n^(1/2-delta), a2 n^(1/2+delta)]
  std::vector<std::size_t> minus;    ///< 2|C| in (0, a1 n^(1/2-delta))
  std::vector<std::size_t> plus;     ///< 2|C| in (a2 n^(1/2+delta), 2 b2 n]
  std::vector<std::size_t> empty;    ///< |C| = 0
  std::vector<std::size_t> over;     ///< 2|C| > 2 b2 n (outside every class above)

  std::size_t test_set_size() const { return cone_silt.size(); }
  /// 2|C| in [a1 n^r, a2 n^r].
  std::vector<std::size_t> r_class(double r) const;
  /// 2|C| in [a1 n^r, a2 n^(r+delta)].
  std::vector<std::size_t> r_star_class(double r) const;
  std::int64_t silt_of(std::span<const std::size_t> lines) const;
};

LineClasses classify_lines(const ConeDecomposition& decomp, const ClassParams& params, int n);

struct ShapeRow {
  double r = 0.0;
  std::size_t class_size = 0;
  std::int64_t class_silt = 0;
  bool flagged = false;
};

struct ShapeReport {
  double rho = 0.05;
  double delta = 0.05;
  std::vector<ShapeRow> rows;
  std::vector<double> shape;  ///< flagged r values
  bool degenerate = false;    ///< J_n = 0
};

/// 0, delta, 2 delta, ..., 1.
std::vector<double> default_r_grid(double delta);

/// r is flagged when the widened class L_{r*} carries at least J^(1-rho)/2.
ShapeReport shape_of(const LineClasses& classes, std::int64_t silt, double rho,
                     std::span<const double> r_grid);

using ClassSelector = std::function<std::vector<std::size_t>(const LineClasses&)>;

namespace select {
ClassSelector all();
ClassSelector half();
ClassSelector half_pm();
ClassSelector minus();
ClassSelector plus();
ClassSelector empty();
ClassSelector minus_or_empty();
ClassSelector r(double r);
ClassSelector r_star(double r);
}  // namespace select

/// Weighted ensemble mean of |L| over |V|. Throws EnsembleMismatch when the
/// members were built on different test sets.
double palm_line_probability(std::span<const LineClasses> ensemble, const ClassSelector& cls,
                             std::span<const double> weights = {});

/// One realisation for the ensemble-level diagnostics.
struct ConeSample {
  std::int64_t chi2 = 0;
  std::int64_t silt = 0;
  double weight = 1.0;
  LineClasses classes;

  double chi() const;
};

/// Same estimate over ConeSample members, weighted by their sample weights.
double palm_line_probability(std::span<const ConeSample> samples, const ClassSelector& cls);

ConeSample make_cone_sample(const LatticePath& path, const TestSet& V,
                            const ClassParams& params, double weight = 1.0);

/// Samples with b1 n <= J_n <= b2 n.
std::vector<ConeSample> condition_on_band(std::span<const ConeSample> samples, double b1,
                                          double b2, int n);

struct AxEntry {
  std::int64_t chi2 = 0;
  double x = 0.0;
  double probability = 0.0;  ///< weight share of the bin in the ensemble
  double a_x = 0.0;
  double log_average = 0.0;  ///< log of the averaged penalising factor
  std::size_t used = 0;
  std::size_t skipped_empty = 0;
  bool saturated = false;  ///< averaged factor below 1e-300
  bool empty_class = false;
};

/// a_x for one distance bin: -(2/(beta n^r)) ln of the average over samples
/// (with a non-empty class) of the per-sample mean of exp(-beta |C_L|).
/// Throws EmptyClass if no sample in the bin has a member line.
AxEntry estimate_ax_bin(std::span<const ConeSample> bin, const ClassSelector& cls, double r,
                        double beta, int n);

/// One entry per distinct chi_n^2 value, sorted by distance; bins without
/// class members are reported with empty_class set.
std::vector<AxEntry> estimate_ax(std::span<const ConeSample> samples, const ClassSelector& cls,
                                 double r, double beta, int n);

struct DistancePoint {
  double x = 0.0;
  double a_x = 0.0;
  double probability = 0.0;
};

struct ConditionDReport {
  double r1 = 0.0;
  double r2 = 0.0;
  double rho_n = 0.0;  ///< +inf when the lower mass vanishes
  bool degenerate = false;
  double log_upper = 0.0;  ///< log sum_{x > r1} x q(x) P(x)
  double log_lower = 0.0;  ///< log sum_{x <= r1} x q(x) P(x)
  double log_I = 0.0;      ///< log sum x q(x) P(x)
  double log_g = 0.0;      ///< log sum sqrt(a_x) q(x) P(x)
  double I_over_g = 0.0;
};

/// Mass split of x q(x) dP(x) around r1. With d_one_variant the scales
/// mu_x = (beta a_x)^1/2 n and q = exp(-beta a_x n/2) replace the n^3/4 and
/// n^1/2 versions.
ConditionDReport condition_d_check(std::span<const DistancePoint> law, double gamma,
                                   double epsilon, double beta, int n, bool d_one_variant);

struct ConeProcessReport {
  std::optional<double> quotient_half;
  std::optional<double> quotient_empty;
  double palm_half = 0.0;
  double palm_empty = 0.0;
  double palm_minus_or_empty = 0.0;
  double upper_skeleton = 0.0;  ///< P(L_half) Q_half + P(L_empty) Q_empty
  double lower_skeleton = 0.0;  ///< max(P(L_half) Q_half, P(L_- u L_empty) Q_empty)
};

/// Weighted quotient sum w chi pen / sum w pen with pen the per-sample mean
/// of exp(-beta |C_L|) over the class (0 when the class is empty).
std::optional<double> penalised_distance_quotient(std::span<const ConeSample> samples,
                                                  const ClassSelector& cls, double beta);

ConeProcessReport cone_process_distance(std::span<const ConeSample> samples, double beta);

/// Streaming form of cone_process_distance for ensembles too large to hold.
class ConeProcessAccumulator {
 public:
  explicit ConeProcessAccumulator(double beta) : beta_(beta) {}
  void add(const ConeSample& sample);
  ConeProcessReport finish() const;

 private:
  struct Quotient {
    double shift = -std::numeric_limits<double>::infinity();
    double num = 0.0;
    double den = 0.0;
    void add(double log_weight, double chi);
    std::optional<double> value() const;
  };
  double beta_;
  Quotient half_;
  Quotient empty_;
  double weight_ = 0.0;
  double palm_half_ = 0.0;
  double palm_empty_ = 0.0;
  double palm_minus_empty_ = 0.0;
  std::uint64_t test_set_ = 0;
  std::size_t lines_ = 0;
  bool started_ = false;
};

}  // namespace sawlab
