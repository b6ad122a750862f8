#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sawlab/walk.hpp"

namespace sawlab {

/// Element of the hyperoctahedral group: x -> y with y[perm[k]] = sign[k] x[k].
class LatticeSymmetry {
 public:
  explicit LatticeSymmetry(int dimension);  // identity
  LatticeSymmetry(std::vector<int> perm, std::vector<int> sign);

  int dimension() const { return static_cast<int>(perm_.size()); }
  bool is_identity() const;

  void apply(std::span<const Coord> x, std::span<Coord> out) const;
  Step apply(Step s) const { return Step(perm_[s.axis()], sign_[s.axis()] * s.sign()); }
  LatticeSymmetry inverse() const;

  /// All 2^d d! elements, identity first. Intended for small d.
  static std::vector<LatticeSymmetry> all(int dimension);

 private:
  std::vector<int> perm_;
  std::vector<int> sign_;
};

LatticePath transform(const LatticePath& path, const LatticeSymmetry& g);

}  // namespace sawlab
