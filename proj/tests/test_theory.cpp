#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "oracles.hpp"
#include "test_util.hpp"
#include "touchbench/error.hpp"
#include "touchbench/synth.hpp"
#include "touchbench/theory.hpp"

using namespace touchbench;

namespace {

const double kLn2 = std::numbers::ln2;

SampleSet gaussian(std::uint64_t seed, std::size_t n, double mu = 0.0, double sd = 1.0) {
  Rng rng(seed);
  SampleSet s;
  for (std::size_t i = 0; i < n; ++i) s.values.push_back(rng.normal(mu, sd));
  return s;
}

SampleSet uniform(std::uint64_t seed, std::size_t n, double lo, double hi) {
  Rng rng(seed);
  SampleSet s;
  for (std::size_t i = 0; i < n; ++i) s.values.push_back(rng.uniform(lo, hi));
  return s;
}

SampleSet point_mass(std::size_t n) { return SampleSet::one_d(std::vector<double>(n, 0.0)); }

}  // namespace

TEST_CASE("JSD endpoints") {
  CHECK(estimate_jsd(gaussian(1, 20000), gaussian(2, 20000)).jsd_nats <= 0.02);
  CHECK(estimate_jsd(uniform(3, 5000, 0, 1), uniform(4, 5000, 2, 3)).jsd_nats ==
        doctest::Approx(kLn2).epsilon(0.02 / kLn2));
}

TEST_CASE("quadrature routine agrees with an independent Simpson oracle") {
  for (auto [m1, s1, m2, s2] : {std::array{0.0, 1.0, 1.0, 1.0}, std::array{0.0, 1.0, 0.0, 0.5},
                                std::array{-1.0, 2.0, 3.0, 0.7}}) {
    CHECK(gaussian_jsd_quadrature(m1, s1, m2, s2) ==
          doctest::Approx(oracle::jsd_gaussians(m1, s1, m2, s2)).epsilon(1e-6));
  }
}

TEST_CASE("histogram JSD of shifted Gaussians matches quadrature") {
  const double exact = oracle::jsd_gaussians(0, 1, 1, 1);
  CHECK(std::abs(estimate_jsd(gaussian(5, 100000), gaussian(6, 100000, 1.0)).jsd_nats - exact) <= 0.01);
}

TEST_CASE("JSD is symmetric and bounded") {
  Rng pick(7);
  for (int trial = 0; trial < 30; ++trial) {
    const SampleSet a = gaussian(100 + trial, 200 + pick.index(500), pick.uniform(-2, 2), pick.uniform(0.2, 3));
    const SampleSet b = uniform(200 + trial, 200 + pick.index(500), pick.uniform(-3, 0), pick.uniform(0.5, 3));
    const int bins = 1 + static_cast<int>(pick.index(100));
    const double ab = estimate_jsd(a, b, bins).jsd_nats;
    const double ba = estimate_jsd(b, a, bins).jsd_nats;
    CHECK(std::abs(ab - ba) <= 1e-12);
    CHECK(ab >= 0.0);
    CHECK(ab <= kLn2);
  }
}

TEST_CASE("two-dimensional samples") {
  Rng rng(8);
  SampleSet a, b;
  a.dim = b.dim = 2;
  for (int i = 0; i < 5000; ++i) {
    a.values.insert(a.values.end(), {rng.normal(), rng.normal()});
    b.values.insert(b.values.end(), {rng.normal() + 10, rng.normal()});
  }
  CHECK(estimate_jsd(a, b, 16).jsd_nats == doctest::Approx(kLn2).epsilon(0.01));
  CHECK_THROWS_AS(estimate_jsd(a, gaussian(1, 500)), Error);
}

TEST_CASE("estimator errors") {
  try {
    estimate_jsd(gaussian(1, 99), gaussian(2, 500));
    FAIL("expected TooFewSamples");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TooFewSamples);
  }
  SampleSet a = gaussian(1, 200);
  a.dim = 2;
  try {
    estimate_jsd(a, gaussian(2, 500));
    FAIL("expected DimensionMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DimensionMismatch);
  }
}

TEST_CASE("optimal detector value") {
  const double ln4 = 2 * kLn2;
  SUBCASE("identical distributions") {
    CHECK(optimal_detector_value(gaussian(1, 100000), gaussian(2, 100000)).value ==
          doctest::Approx(-ln4).epsilon(0.02 / ln4));
  }
  SUBCASE("disjoint supports") {
    CHECK(std::abs(optimal_detector_value(uniform(3, 5000, 0, 1), uniform(4, 5000, 2, 3)).value) <= 1e-12);
  }
  SUBCASE("shifted Gaussians against quadrature") {
    const auto v = optimal_detector_value(gaussian(5, 100000), gaussian(6, 100000, 1.0));
    CHECK(std::abs(v.value - (-ln4 + 2 * oracle::jsd_gaussians(0, 1, 1, 1))) <= 0.05);
    // The plug-in discriminator attains the bound on its own histogram.
    CHECK(v.value == doctest::Approx(-ln4 + 2 * v.jsd_nats).epsilon(1e-9));
  }
  SUBCASE("never positive") {
    for (std::uint64_t s = 0; s < 20; ++s) {
      CHECK(optimal_detector_value(gaussian(s, 300, 0.1 * s), uniform(s + 50, 400, -1, 2)).value <= 1e-12);
    }
  }
}

TEST_CASE("smoothing a point mass") {
  const SampleSet p = gaussian(9, 100000);
  const SampleSet g = point_mass(100000);
  SUBCASE("raw divergence approaches ln 2 on a fine grid") {
    const auto r = verify_smoothing(p, g, 1.0, 1, 256);
    CHECK(std::abs(r.jsd_raw - kLn2) <= 0.05);
    CHECK(r.jsd_smoothed <= 0.1);
  }
  SUBCASE("sigma zero keeps the raw estimate") {
    const auto r = verify_smoothing(p, g, 0.0, 1);
    CHECK(r.jsd_smoothed == r.jsd_raw);
  }
  SUBCASE("more smoothing, less divergence") {
    double prev = INFINITY;
    for (double sigma : {0.1, 0.5, 1.0}) {
      const auto r = verify_smoothing(p, g, sigma, 2);
      CHECK(r.jsd_smoothed < r.jsd_raw);
      CHECK(r.jsd_smoothed < prev);
      CHECK(std::abs(r.jsd_smoothed - oracle::jsd_gaussians(0, 1, 0, sigma)) <= 0.05);
      prev = r.jsd_smoothed;
    }
  }
  SUBCASE("any positive sigma on any singular set") {
    Rng pick(10);
    for (int trial = 0; trial < 10; ++trial) {
      const double at = pick.uniform(-2, 2);
      const SampleSet mass = SampleSet::one_d(std::vector<double>(2000, at));
      const auto r = verify_smoothing(gaussian(20 + trial, 2000), mass, pick.uniform(0.05, 2.0), trial);
      CHECK(r.jsd_smoothed < r.jsd_raw);
    }
  }
}

TEST_CASE("W1 examples") {
  const std::vector<double> a{0, 0}, b{1, 1}, c{0, 1}, d{0, 3};
  CHECK(wasserstein_1d(a, a) == 0.0);
  CHECK(wasserstein_1d(a, b) == doctest::Approx(1.0));
  CHECK(wasserstein_1d(c, d) == doctest::Approx(1.0));
  // The crossed matching is worse.
  CHECK(0.5 * (std::abs(0.0 - 3.0) + std::abs(1.0 - 0.0)) > 1.0);
  CHECK_THROWS_AS(wasserstein_1d(std::vector<double>{}, a), Error);
  CHECK(wasserstein_1d_exact(c, d) == doctest::Approx(1.0));
}

TEST_CASE("W1 properties") {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + rng.index(30);
    std::vector<double> x(n), y(n), z(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = rng.normal();
      y[i] = rng.normal(1.0, 2.0);
      z[i] = rng.uniform(-3, 3);
    }
    CHECK(wasserstein_1d(x, z) <= wasserstein_1d(x, y) + wasserstein_1d(y, z) + 1e-9);
    CHECK(wasserstein_1d(x, y) == doctest::Approx(wasserstein_1d(y, x)).epsilon(1e-12));
    // Sorted matching and the CDF integral agree for equal sizes.
    CHECK(wasserstein_1d_exact(x, y) == doctest::Approx(wasserstein_1d(x, y)).epsilon(1e-9));
    // Shifting one side by c moves W1 by at most |c|.
    std::vector<double> shifted = x;
    for (double& v : shifted) v += 0.5;
    CHECK(wasserstein_1d(x, shifted) == doctest::Approx(0.5));
  }
  const std::vector<double> big{0, 1, 2, 3, 4, 5}, small{10, 11};
  CHECK(wasserstein_1d(big, small, 3) == wasserstein_1d(big, small, 3));
  // Exact W1 between unequal sizes: {0, 2} vs {1} is 1.
  CHECK(wasserstein_1d_exact(std::vector<double>{0, 2}, std::vector<double>{1}) == doctest::Approx(1.0));
}

TEST_CASE("empirical measures converge at the square-root rate") {
  const SampleGenerator gauss = [](Rng& r) { return r.normal(); };
  const std::vector<std::size_t> sizes{100, 400, 1600};
  const auto conv = verify_history_convergence(gauss, gauss, sizes, 50, 3, 100000);
  REQUIRE(conv.size() == 3);
  CHECK(conv[1].mean_w1 < conv[0].mean_w1);
  CHECK(conv[2].mean_w1 < conv[1].mean_w1);
  CHECK(conv[0].mean_w1 / conv[1].mean_w1 == doctest::Approx(2.0).epsilon(0.25));
  CHECK(conv[1].mean_w1 / conv[2].mean_w1 == doctest::Approx(2.0).epsilon(0.25));

  const std::vector<std::size_t> one{100000};
  CHECK(verify_history_convergence(gauss, gauss, one, 10, 4, 200000)[0].mean_w1 <= 0.01);

  const SampleGenerator zero = [](Rng&) { return 0.0; };
  for (const auto& c : verify_history_convergence(gauss, zero, sizes, 10, 5, 100000)) {
    CHECK(std::abs(c.mean_w1 - std::sqrt(2.0 / std::numbers::pi)) <= 0.02);
  }
  const std::vector<std::size_t> bad{400, 100};
  CHECK_THROWS_AS(verify_history_convergence(gauss, gauss, bad, 10, 1), Error);
}

TEST_CASE("pipeline divergence on synthetic sessions") {
  SynthConfig cfg;
  cfg.humans = 60;
  cfg.agents = 60;
  cfg.seed = 21;
  const LabeledCorpus c = gen_corpus(cfg);
  std::vector<Session> human, agent;
  for (const Session& s : c.sessions) (s.actor == Actor::Human ? human : agent).push_back(s);
  WrapperConfig w;
  w.swipe_mode = SwipeMode::HistoryMatch;
  w.history.db = std::make_shared<const ReferenceDB>(build_reference_db(c));
  std::vector<Session> humanized;
  for (const Session& s : agent) humanized.push_back(humanize_session(s, w));

  const auto dev = pipeline_divergence_report(agent, humanized, human, "maxDev");
  CHECK(dev.jsd_humanized_vs_human < dev.jsd_raw_vs_human);
  const auto start = pipeline_divergence_report(agent, humanized, human, "startX");
  CHECK(std::abs(start.jsd_humanized_vs_human - start.jsd_raw_vs_human) <= 1e-12);
  const auto same = pipeline_divergence_report(human, human, human, "maxDev");
  CHECK(same.jsd_raw_vs_human == 0.0);
  CHECK(same.jsd_humanized_vs_human == 0.0);
}

TEST_CASE("theory report") {
  TheoryOptions o;
  o.samples = 20000;
  o.sizes = {100, 400, 1600};
  o.trials = 10;
  const TheoryReport r = run_theory_checks(o);
  CHECK(r.optimal_value_ok);
  CHECK(r.smoothing_ok);
  CHECK(r.convergence_ok);
  std::ostringstream csv;
  write_theory_csv(r, csv);
  CHECK(csv.str().rfind("experiment,parameters,estimate,oracle,pass\n", 0) == 0);
  CHECK(theory_to_json(r)["checks"].size() == r.checks.size());

  o.sigmas = {0.0};
  const TheoryReport zero = run_theory_checks(o);
  CHECK(zero.smoothing_ok);
}
