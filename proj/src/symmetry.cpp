#include "sawlab/symmetry.hpp"

#include <algorithm>
#include <numeric>

#include "sawlab/errors.hpp"

namespace sawlab {

LatticeSymmetry::LatticeSymmetry(int dimension)
    : perm_(static_cast<std::size_t>(dimension)),
      sign_(static_cast<std::size_t>(dimension), 1) {
  std::iota(perm_.begin(), perm_.end(), 0);
}

LatticeSymmetry::LatticeSymmetry(std::vector<int> perm, std::vector<int> sign)
    : perm_(std::move(perm)), sign_(std::move(sign)) {
  std::vector<int> check = perm_;
  std::sort(check.begin(), check.end());
  for (std::size_t k = 0; k < check.size(); ++k) {
    if (check[k] != static_cast<int>(k)) throw ParamError("not a permutation");
  }
  if (sign_.size() != perm_.size()) throw ParamError("sign/perm size mismatch");
  for (int& s : sign_) s = s < 0 ? -1 : 1;
}

bool LatticeSymmetry::is_identity() const {
  for (std::size_t k = 0; k < perm_.size(); ++k) {
    if (perm_[k] != static_cast<int>(k) || sign_[k] != 1) return false;
  }
  return true;
}

void LatticeSymmetry::apply(std::span<const Coord> x, std::span<Coord> out) const {
  for (std::size_t k = 0; k < perm_.size(); ++k) {
    out[static_cast<std::size_t>(perm_[k])] = sign_[k] * x[k];
  }
}

LatticeSymmetry LatticeSymmetry::inverse() const {
  std::vector<int> perm(perm_.size());
  std::vector<int> sign(perm_.size());
  for (std::size_t k = 0; k < perm_.size(); ++k) {
    const auto j = static_cast<std::size_t>(perm_[k]);
    perm[j] = static_cast<int>(k);
    sign[j] = sign_[k];
  }
  return LatticeSymmetry(std::move(perm), std::move(sign));
}

std::vector<LatticeSymmetry> LatticeSymmetry::all(int dimension) {
  std::vector<LatticeSymmetry> out;
  std::vector<int> perm(static_cast<std::size_t>(dimension));
  std::iota(perm.begin(), perm.end(), 0);
  do {
    for (unsigned mask = 0; mask < (1u << dimension); ++mask) {
      std::vector<int> sign(static_cast<std::size_t>(dimension));
      for (int k = 0; k < dimension; ++k) sign[static_cast<std::size_t>(k)] = (mask >> k) & 1u ? -1 : 1;
      out.emplace_back(perm, std::move(sign));
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

LatticePath transform(const LatticePath& path, const LatticeSymmetry& g) {
  std::vector<Step> steps;
  steps.reserve(path.length());
  for (Step s : path.steps()) steps.push_back(g.apply(s));
  return LatticePath(path.dimension(), std::move(steps));
}

}  // namespace sawlab
