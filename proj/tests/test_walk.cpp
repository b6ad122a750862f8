#include <doctest.h>

#include <cmath>
#include <map>

#include "sawlab/errors.hpp"
#include "sawlab/mcmc.hpp"
#include "sawlab/symmetry.hpp"
#include "sawlab/walk.hpp"

using namespace sawlab;

namespace {

LatticePath path_of(int d, std::initializer_list<int> codes) {
  std::vector<Step> steps;
  for (int c : codes) steps.push_back(Step::from_code(c));
  return LatticePath(d, steps);
}

// J_n straight from the definition: pairs i < j with equal sites.
std::int64_t pair_count(const LatticePath& p) {
  std::int64_t j = 0;
  for (std::size_t a = 0; a <= p.length(); ++a) {
    for (std::size_t b = a + 1; b <= p.length(); ++b) {
      const auto x = p.site(a);
      const auto y = p.site(b);
      j += std::equal(x.begin(), x.end(), y.begin()) ? 1 : 0;
    }
  }
  return j;
}

}  // namespace

TEST_CASE("sites follow the steps") {
  const auto p = path_of(2, {1, 2, -1});
  CHECK(p.length() == 3);
  CHECK(p.site(3)[0] == 0);
  CHECK(p.site(3)[1] == 1);
  CHECK(endpoint_distance2(p) == 1);
  CHECK_THROWS_AS(LatticePath(2, {Step(2, 1)}), InvalidPath);
}

TEST_CASE("silt of small walks") {
  SUBCASE("back and forth in one dimension") {
    const auto p = path_of(1, {1, -1});
    CHECK(silt_total(p) == 1);
    CHECK(endpoint_distance(p) == 0.0);
  }
  SUBCASE("square loop returns once to the origin") {
    const auto phi = silt(path_of(2, {1, 2, -1, -2}));
    CHECK(phi.total == 1);
    REQUIRE(phi.points.size() == 1);
    CHECK(phi.points[0].site == std::vector<Coord>{0, 0});
  }
  SUBCASE("three visits give three pairs") {
    const auto phi = silt(path_of(1, {1, -1, 1, -1}));
    CHECK(phi.total == 4);
    std::map<Coord, std::int64_t> m;
    for (const auto& pt : phi.points) m[pt.site[0]] = pt.multiplicity;
    CHECK(m[0] == 3);
    CHECK(m[1] == 1);
  }
  SUBCASE("straight rod is self-avoiding") {
    const auto phi = silt(path_of(3, {3, 3, 3, 3}));
    CHECK(phi.self_avoiding());
    CHECK(hull_radius(path_of(3, {3, 3, 3, 3})) == 4.0);
  }
}

TEST_CASE("silt equals the pair count on random walks") {
  for (int d = 1; d <= 4; ++d) {
    for (const auto& p : sample_srw_paths(d, 40, 50, 7 + d)) {
      const auto phi = silt(p);
      CHECK(phi.total == pair_count(p));
      std::int64_t sum = 0;
      for (const auto& pt : phi.points) sum += pt.multiplicity;
      CHECK(sum == phi.total);
      CHECK(silt_total(p) == phi.total);
      CHECK(std::is_sorted(phi.points.begin(), phi.points.end(),
                           [](const auto& a, const auto& b) { return a.site < b.site; }));
      CHECK(hull_radius(p) >= endpoint_distance(p));
    }
  }
}

TEST_CASE("observables are invariant under lattice symmetries and reversal") {
  for (const auto& p : sample_srw_paths(3, 30, 20, 99)) {
    const auto base = observe(p);
    for (const auto& g : LatticeSymmetry::all(3)) {
      const auto o = observe(transform(p, g));
      CHECK(o.silt.total == base.silt.total);
      CHECK(o.chi2 == base.chi2);
      CHECK(o.hull_radius == doctest::Approx(base.hull_radius));
    }
    const auto r = p.reversed();
    CHECK(silt_total(r) == base.silt.total);
    CHECK(endpoint_distance2(r) == base.chi2);
  }
}

TEST_CASE("symmetry group has 2^d d! elements and inverses") {
  CHECK(LatticeSymmetry::all(1).size() == 2);
  CHECK(LatticeSymmetry::all(2).size() == 8);
  const auto g3 = LatticeSymmetry::all(3);
  CHECK(g3.size() == 48);
  CHECK(g3.front().is_identity());
  const auto p = sample_srw_paths(3, 12, 1, 3).front();
  for (const auto& g : g3) CHECK(transform(transform(p, g), g.inverse()) == p);
}

TEST_CASE("text format round trips") {
  const auto p = path_of(3, {1, -2, 3, 3, -1});
  const auto text = format_path(p);
  CHECK(text == "3:5:+1 -2 +3 +3 -1");
  CHECK(parse_path(text) == p);
  CHECK(parse_path("2:2:+1 \xE2\x88\x92" "2") == path_of(2, {1, -2}));
  CHECK_THROWS_AS(parse_path("2:3:+1 -2"), InvalidPath);
  CHECK_THROWS_AS(parse_path("2:1:+3"), InvalidPath);
}

TEST_CASE("from_sites translates and validates") {
  const std::vector<Coord> sites{5, 5, 6, 5, 6, 6};
  const auto p = LatticePath::from_sites(2, sites);
  CHECK(p == path_of(2, {1, 2}));
  const std::vector<Coord> bad{0, 0, 2, 0};
  CHECK_THROWS_AS(LatticePath::from_sites(2, bad), InvalidPath);
}
