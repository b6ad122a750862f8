#pragma once

#include <cstdint>
#include <span>

#include "sawlab/walk.hpp"

namespace sawlab::detail {

/// Packs a lattice site with |coordinates| <= radius into one 64-bit key.
class SiteCodec {
 public:
  /// Largest radius representable for the dimension, or 0 if d is too large.
  static std::int64_t max_radius(int dimension) {
    if (dimension <= 0 || dimension > 16) return 0;
    const int bits = bits_for(dimension);
    return (std::int64_t{1} << (bits - 1)) - 1;
  }

  static bool fits(int dimension, std::int64_t radius) {
    return radius <= max_radius(dimension);
  }

  explicit SiteCodec(int dimension)
      : dimension_(dimension),
        bits_(bits_for(dimension)),
        offset_(std::int64_t{1} << (bits_ - 1)) {}

  std::uint64_t encode(std::span<const Coord> x) const {
    std::uint64_t key = 0;
    for (int k = 0; k < dimension_; ++k) {
      key = (key << bits_) | static_cast<std::uint64_t>(x[k] + offset_);
    }
    return key;
  }

  int dimension() const { return dimension_; }

 private:
  // Coordinates are 32-bit, so wider fields would only invite shift overflow.
  static int bits_for(int dimension) { return dimension <= 2 ? 32 : 64 / dimension; }

  int dimension_;
  int bits_;
  std::int64_t offset_;
};

}  // namespace sawlab::detail
