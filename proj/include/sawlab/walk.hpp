#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sawlab {

using Coord = std::int32_t;

/// One nearest-neighbour step: +e_axis or -e_axis (axis is 0-based).
class Step {
 public:
  constexpr Step() = default;
  constexpr Step(int axis, int sign) : axis_(axis), sign_(sign > 0 ? 1 : -1) {}

  /// Signed 1-based axis code as used in the text format (+1, -2, ...).
  static Step from_code(int code);

  constexpr int axis() const { return axis_; }
  constexpr int sign() const { return sign_; }
  constexpr int code() const { return sign_ * (axis_ + 1); }
  constexpr Step reversed() const { return Step(axis_, -sign_); }

  friend constexpr bool operator==(Step, Step) = default;

 private:
  int axis_ = 0;
  int sign_ = 1;
};

/// A nearest-neighbour walk S_0 = 0, S_1, ..., S_n on Z^d.
///
/// Sites are stored row-major: coordinate k of site i lives at i*d + k.
class LatticePath {
 public:
  LatticePath() = default;
  LatticePath(int dimension, std::vector<Step> steps);

  /// Builds a path from consecutive sites; they are translated so that the
  /// first one becomes the origin. Throws InvalidPath unless consecutive
  /// sites are lattice neighbours.
  static LatticePath from_sites(int dimension, std::span<const Coord> sites);

  int dimension() const { return dimension_; }
  std::size_t length() const { return steps_.size(); }
  const std::vector<Step>& steps() const { return steps_; }
  std::span<const Coord> site(std::size_t i) const {
    return {sites_.data() + i * static_cast<std::size_t>(dimension_),
            static_cast<std::size_t>(dimension_)};
  }
  std::span<const Coord> sites() const { return sites_; }

  /// The reversed walk, translated so that it starts at the origin.
  LatticePath reversed() const;

  friend bool operator==(const LatticePath&, const LatticePath&) = default;

 private:
  int dimension_ = 1;
  std::vector<Step> steps_;
  std::vector<Coord> sites_{0};
};

struct SiltPoint {
  std::vector<Coord> site;
  std::int64_t multiplicity = 0;  ///< colliding pairs at this site, C(k,2)

  friend bool operator==(const SiltPoint&, const SiltPoint&) = default;
};

/// Self-intersection sites of a walk with their pair multiplicities.
/// Points are sorted lexicographically by site; only sites with m(x) > 0
/// are kept.
struct SiltPointProcess {
  int dimension = 1;
  std::vector<SiltPoint> points;
  std::int64_t total = 0;  ///< J_n

  bool self_avoiding() const { return total == 0; }
};

struct PathObservables {
  double chi = 0.0;
  std::int64_t chi2 = 0;
  double hull_radius = 0.0;
  SiltPointProcess silt;
};

SiltPointProcess silt(const LatticePath& path);

/// Plain J_n without the per-site breakdown.
std::int64_t silt_total(const LatticePath& path);

std::int64_t endpoint_distance2(const LatticePath& path);
double endpoint_distance(const LatticePath& path);

/// max_i ||S_i||, the radius of the smallest origin-centred ball holding the
/// whole trajectory.
double hull_radius(const LatticePath& path);

PathObservables observe(const LatticePath& path);

/// "d:n:s1 s2 ... sn" with signed 1-based axis codes.
std::string format_path(const LatticePath& path);
LatticePath parse_path(std::string_view line);

}  // namespace sawlab
