#include <doctest.h>

#include <cmath>
#include <map>

#include "oracles.hpp"
#include "sawlab/errors.hpp"
#include "sawlab/exact.hpp"
#include "sawlab/mcmc.hpp"
#include "sawlab/rng.hpp"
#include "sawlab/stats.hpp"

using namespace sawlab;

TEST_CASE("bounded draws stay in range and are reproducible") {
  Rng a(5), b(5);
  for (int i = 0; i < 1000; ++i) {
    const auto x = a.below(7);
    CHECK(x < 7);
    CHECK(x == b.below(7));
  }
  CHECK(stream_seed(1, 0) != stream_seed(1, 1));
  CHECK(stream_seed(1, 0) != stream_seed(2, 0));
}

TEST_CASE("autocorrelation of independent data is about one half") {
  Rng rng(11);
  std::vector<double> x(20000);
  for (auto& v : x) v = rng.normal();
  const double tau = integrated_autocorrelation(x);
  CHECK(tau == doctest::Approx(0.5).epsilon(0.3));
}

TEST_CASE("autocorrelation of an AR(1) series") {
  Rng rng(12);
  const double phi = 0.8;
  std::vector<double> x(200000);
  double y = 0.0;
  for (auto& v : x) {
    y = phi * y + rng.normal();
    v = y;
  }
  // Sokal tau for AR(1) is (1 + phi) / (2 (1 - phi)).
  CHECK(integrated_autocorrelation(x) == doctest::Approx(4.5).epsilon(0.15));
}

TEST_CASE("batch means pool across chains") {
  std::vector<double> a(64, 1.0), b(64, 3.0);
  const std::vector<SeriesSummary> s{summarize_series(a), summarize_series(b)};
  const auto st = combine_chains("x", s);
  CHECK(st.mean == doctest::Approx(2.0));
  CHECK(st.samples == 128);
  CHECK(st.std_error > 0.0);
}

TEST_CASE("config validation") {
  ChainConfig c;
  c.n = 0;
  CHECK_THROWS_AS(c.validate(), InvalidConfig);
  c = ChainConfig{};
  c.burn_in = c.sweeps;
  CHECK_THROWS_AS(c.validate(), InvalidConfig);
  c = ChainConfig{};
  c.move_mix = 1.5;
  CHECK_THROWS_AS(c.validate(), InvalidConfig);
}

TEST_CASE("results do not depend on the thread count") {
  ChainConfig c;
  c.d = 2;
  c.n = 20;
  c.beta = 0.5;
  c.sweeps = 3000;
  c.burn_in = 300;
  c.chains = 3;
  c.seed = 42;
  c.threads = 1;
  const auto a = sample_weakly_saw(c);
  c.threads = 3;
  const auto b = sample_weakly_saw(c);
  for (std::size_t i = 0; i < a.observables.size(); ++i) {
    CHECK(a.observables[i].mean == b.observables[i].mean);
    CHECK(a.observables[i].std_error == b.observables[i].std_error);
  }
  CHECK(a.acc_A == b.acc_A);
}

TEST_CASE("weakly self-avoiding chain agrees with enumeration in one dimension") {
  ChainConfig c;
  c.d = 1;
  c.n = 6;
  c.beta = 0.8;
  c.sweeps = 120000;
  c.burn_in = 2000;
  c.chains = 4;
  c.seed = 3;
  const auto s = sample_weakly_saw(c);
  const auto e = enumerate_ensemble(1, 6, 0.8);
  CHECK(std::abs(s.get("chi").mean - e.mean_chi) <= 4.0 * s.get("chi").std_error);
  CHECK(std::abs(s.get("J").mean - e.mean_J) <= 4.0 * s.get("J").std_error);
  CHECK(s.acc_A > 0.0);
  CHECK(s.acc_B > 0.0);
}

TEST_CASE("beta zero samples the free walk") {
  ChainConfig c;
  c.d = 3;
  c.n = 10;
  c.beta = 0.0;
  c.sweeps = 60000;
  c.burn_in = 1000;
  c.chains = 2;
  c.seed = 8;
  const auto s = sample_weakly_saw(c);
  CHECK(std::abs(s.get("chi2").mean - 10.0) <= 4.0 * s.get("chi2").std_error);
  CHECK(s.acc_A == doctest::Approx(1.0));
}

TEST_CASE("pivot chain stays self-avoiding") {
  ChainConfig c;
  c.d = 3;
  c.n = 60;
  c.sweeps = 400;
  c.burn_in = 50;
  c.seed = 5;
  const auto paths = collect_saw_paths(c, 10);
  CHECK(paths.size() == 35);
  for (const auto& p : paths) {
    CHECK(silt_total(p) == 0);
    CHECK(p.length() == 60);
  }
  const auto s = sample_saw_pivot(3, 60, 400, 50, 5, 1);
  CHECK(s.get("J").mean == 0.0);
  CHECK(std::isinf(s.beta));
}

TEST_CASE("pivot chain is uniform over short self-avoiding walks") {
  const auto all = oracle::all_saws(2, 4);
  double mean = 0.0;
  for (const auto& w : all) {
    const auto& e = w.back();
    mean += std::sqrt(static_cast<double>(e[0] * e[0] + e[1] * e[1]));
  }
  mean /= static_cast<double>(all.size());
  const auto s = sample_saw_pivot(2, 4, 200000, 1000, 17, 4);
  CHECK(std::abs(s.get("chi").mean - mean) <= 4.0 * s.get("chi").std_error);
}

TEST_CASE("extra observables are evaluated on the current walk") {
  ChainConfig c;
  c.d = 2;
  c.n = 8;
  c.beta = 1.0;
  c.sweeps = 2000;
  c.burn_in = 100;
  const std::vector<Observable> extra{
      {"silt_again", [](const PathView& v) { return static_cast<double>(silt_total(v.to_path())); }}};
  const auto s = sample_weakly_saw(c, extra);
  CHECK(s.get("silt_again").mean == doctest::Approx(s.get("J").mean));
}

TEST_CASE("collected paths are consistent with the sampler bookkeeping") {
  ChainConfig c;
  c.d = 2;
  c.n = 30;
  c.beta = 0.3;
  c.sweeps = 600;
  c.burn_in = 100;
  c.chains = 2;
  const auto paths = collect_weakly_saw_paths(c, 5);
  CHECK(paths.size() == 200);
  for (const auto& p : paths) CHECK(p.length() == 30);
}
