#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "oracles.hpp"
#include "test_util.hpp"
#include "touchbench/error.hpp"
#include "touchbench/features.hpp"

using namespace touchbench;
using testutil::trace_from;

namespace {

// Random curved swipe with strictly increasing, irregular timing.
ActionTrace random_swipe(Rng& rng, int n_points) {
  ActionTrace a;
  double t = 0.0;
  double x = rng.uniform(100, 900), y = rng.uniform(100, 1700);
  double heading = rng.uniform(-3.1, 3.1);
  for (int i = 0; i < n_points; ++i) {
    a.events.push_back({x, y, t});
    heading += rng.normal(0.0, 0.4);
    const double step = rng.uniform(1.0, 25.0);
    x = std::clamp(x + step * std::cos(heading), 0.0, 1080.0);
    y = std::clamp(y + step * std::sin(heading), 0.0, 1920.0);
    t += rng.uniform(2.0, 20.0);
  }
  a.kind = ActionKind::Swipe;
  return a;
}

}  // namespace

TEST_CASE("straight constant-velocity swipe") {
  const auto fv = extract_features(trace_from({{0, 0}, {1, 0}, {2, 0}, {3, 0}, {4, 0}}, 10), 1080,
                                   1920);
  CHECK(fv[Feature::maxDev] == 0.0);
  CHECK(fv[Feature::ratio_end_to_length] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fv[Feature::meanResultantLength] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fv[Feature::direction] == 0.0);
  CHECK(fv[Feature::speed] == doctest::Approx(0.1));
  CHECK(fv[Feature::v20] == doctest::Approx(0.1));
  CHECK(fv[Feature::a50] == doctest::Approx(0.0));
  CHECK(fv[Feature::duration] == 40.0);
  CHECK(fv[Feature::length] == 4.0);
  CHECK(fv[Feature::displacement] == 4.0);
  CHECK_FALSE(fv.degenerate_chord);
}

TEST_CASE("corner polyline matches the closed-form geometry oracle") {
  const std::vector<std::pair<double, double>> pts{{0, 0}, {0.5, 0}, {1, 0}, {1, 0.5}, {1, 1}};
  const auto fv = extract_features(trace_from(pts, 10), 1080, 1920);
  std::vector<std::complex<double>> cpts;
  for (auto [x, y] : pts) cpts.emplace_back(x, y);
  const auto g = oracle::polyline(cpts);
  // |2 e^{i0} + 2 e^{i pi/2}| / 4 and the corner's distance from y = x.
  CHECK(g.mean_resultant == doctest::Approx(std::sqrt(8.0) / 4.0));
  CHECK(g.max_dev == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(std::abs(fv[Feature::meanResultantLength] - g.mean_resultant) < 1e-12);
  CHECK(std::abs(fv[Feature::maxDev] - g.max_dev) < 1e-12);
  CHECK(fv[Feature::direction] == doctest::Approx(std::numbers::pi / 4));
  CHECK(fv[Feature::avgDirection] == doctest::Approx(std::numbers::pi / 4));
  // The corner lies to the right of the chord in screen coordinates.
  CHECK(fv.signed_max_dev < 0.0);
}

TEST_CASE("random polylines agree with the geometry oracle") {
  Rng rng(2024);
  for (int trial = 0; trial < 20; ++trial) {
    const ActionTrace a = random_swipe(rng, 5 + static_cast<int>(rng.index(8)));
    std::vector<std::complex<double>> cpts;
    for (const auto& e : a.events) cpts.emplace_back(e.x, e.y);
    const auto g = oracle::polyline(cpts);
    const auto fv = extract_features(a, 1080, 1920);
    CHECK(std::abs(fv[Feature::maxDev] - g.max_dev) < 1e-9);
    CHECK(std::abs(fv[Feature::length] - g.length) < 1e-9);
    CHECK(std::abs(fv[Feature::displacement] - g.displacement) < 1e-9);
    CHECK(std::abs(fv[Feature::meanResultantLength] - g.mean_resultant) < 1e-9);
  }
}

TEST_CASE("feature invariants hold on random traces") {
  Rng rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    const auto fv = extract_features(random_swipe(rng, 5 + static_cast<int>(rng.index(40))), 1080,
                                     1920);
    CHECK(fv[Feature::v20] <= fv[Feature::v50]);
    CHECK(fv[Feature::v50] <= fv[Feature::v80]);
    CHECK(fv[Feature::v20] >= 0.0);
    CHECK(fv[Feature::a20] <= fv[Feature::a50]);
    CHECK(fv[Feature::a50] <= fv[Feature::a80]);
    CHECK(fv[Feature::dev20] >= 0.0);
    CHECK(fv[Feature::dev20] <= fv[Feature::dev50]);
    CHECK(fv[Feature::dev50] <= fv[Feature::dev80]);
    CHECK(fv[Feature::dev80] <= fv[Feature::maxDev]);
    CHECK(fv[Feature::displacement] >= 0.0);
    CHECK(fv[Feature::length] >= fv[Feature::displacement]);
    CHECK(fv[Feature::ratio_end_to_length] >= 0.0);
    CHECK(fv[Feature::ratio_end_to_length] <= 1.0);
    CHECK(fv[Feature::meanResultantLength] >= 0.0);
    CHECK(fv[Feature::meanResultantLength] <= 1.0);
    CHECK(fv[Feature::direction] > -std::numbers::pi);
    CHECK(fv[Feature::direction] <= std::numbers::pi);
    CHECK(fv[Feature::avgDirection] > -std::numbers::pi);
    CHECK(fv[Feature::avgDirection] <= std::numbers::pi);
  }
}

TEST_CASE("ratio and resultant reach 1 exactly for collinear same-direction paths") {
  Rng rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    const double ang = rng.uniform(-3.0, 3.0);
    std::vector<std::pair<double, double>> pts;
    double s = 0.0;
    for (int i = 0; i < 8; ++i) {
      pts.emplace_back(500 + s * std::cos(ang), 900 + s * std::sin(ang));
      s += rng.uniform(1.0, 30.0);
    }
    const auto fv = extract_features(trace_from(pts, 7), 1080, 1920);
    CHECK(std::abs(fv[Feature::ratio_end_to_length] - 1.0) < 1e-9);
    CHECK(std::abs(fv[Feature::meanResultantLength] - 1.0) < 1e-9);
    CHECK(fv[Feature::maxDev] < 1e-9);
  }
  // A reversal keeps points collinear but breaks path order.
  const auto back = extract_features(trace_from({{0, 0}, {4, 0}, {2, 0}, {6, 0}, {8, 0}}, 5), 1080,
                                     1920);
  CHECK(back[Feature::ratio_end_to_length] < 1.0 - 1e-3);
  CHECK(back[Feature::meanResultantLength] < 1.0 - 1e-3);
}

TEST_CASE("rotation leaves shape features unchanged and shifts direction") {
  Rng rng(31);
  for (int trial = 0; trial < 40; ++trial) {
    const ActionTrace a = random_swipe(rng, 12);
    const double theta = rng.uniform(-3.0, 3.0);
    ActionTrace r = a;
    // Rotate about a far-off origin and translate so the result stays on a
    // large virtual screen.
    for (auto& e : r.events) {
      const double x = e.x, y = e.y;
      e.x = 5000 + x * std::cos(theta) - y * std::sin(theta);
      e.y = 5000 + x * std::sin(theta) + y * std::cos(theta);
    }
    const auto f0 = extract_features(a, 10000, 10000);
    const auto f1 = extract_features(r, 10000, 10000);
    for (Feature f : {Feature::length, Feature::displacement, Feature::ratio_end_to_length,
                      Feature::dev20, Feature::dev50, Feature::dev80, Feature::maxDev,
                      Feature::duration, Feature::meanResultantLength, Feature::v50}) {
      CHECK(f1[f] == doctest::Approx(f0[f]).epsilon(1e-9));
    }
    double diff = std::remainder(f1[Feature::direction] - f0[Feature::direction] - theta,
                                 2 * std::numbers::pi);
    CHECK(std::abs(diff) < 1e-9);
  }
}

TEST_CASE("degenerate chord is flagged, not fatal") {
  const auto fv =
      extract_features(trace_from({{10, 10}, {20, 10}, {20, 20}, {10, 20}, {10, 10}}, 10), 100, 100);
  CHECK(fv.degenerate_chord);
  CHECK(fv[Feature::direction] == 0.0);
  CHECK(fv[Feature::ratio_end_to_length] == 0.0);
  CHECK(fv[Feature::maxDev] == doctest::Approx(std::sqrt(200.0)));
}

TEST_CASE("extraction rejects taps and tied timestamps") {
  try {
    extract_features(trace_from({{0, 0}, {1, 1}, {2, 2}}, 10), 100, 100);
    FAIL("expected NotASwipe");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotASwipe);
  }
  auto a = trace_from({{0, 0}, {1, 1}, {2, 2}, {3, 3}, {4, 4}}, 10);
  a.events[2].t_ms = a.events[1].t_ms;
  CHECK_THROWS_AS(extract_features(a, 100, 100), Error);
}

TEST_CASE("first-5% acceleration floors at one sample and tracks the head") {
  // Accelerating then constant: first acceleration sample dominates.
  const auto fv = extract_features(
      trace_from({{0, 0}, {1, 0}, {3, 0}, {5, 0}, {7, 0}, {9, 0}}, 10), 100, 100);
  CHECK(fv[Feature::acc_first5pct_median] == doctest::Approx(0.1 / 10.0));
  CHECK(fv[Feature::v_last3_median] == doctest::Approx(0.2));
}

TEST_CASE("normalization maps coordinates into the unit square") {
  const auto a = trace_from({{540, 960}, {600, 960}, {660, 960}, {720, 960}, {1080, 1920}}, 10);
  const auto fv = extract_features(a, 1080, 1920, {.normalize = true});
  CHECK(fv[Feature::startX] == doctest::Approx(0.5));
  CHECK(fv[Feature::endY] == doctest::Approx(1.0));
}

namespace {

FeatureMatrix matrix_from(const std::vector<double>& values, const std::vector<int>& human) {
  FeatureMatrix m;
  for (std::size_t i = 0; i < values.size(); ++i) {
    FeatureRow r;
    r.session_id = "s" + std::to_string(i);
    r.actor = human[i] ? Actor::Human : Actor::Agent;
    r.features.values.fill(values[i]);
    m.rows.push_back(r);
  }
  return m;
}

}  // namespace

TEST_CASE("information gain endpoints") {
  std::vector<double> v;
  std::vector<int> lab;
  for (int i = 0; i < 400; ++i) {
    lab.push_back(i % 3 == 0);
    v.push_back(lab.back() ? 0.0 : 1.0);
  }
  CHECK(information_gain(v, lab) == doctest::Approx(1.0).epsilon(1e-12));
  const std::vector<double> constant(400, 3.5);
  CHECK(information_gain(constant, lab) == 0.0);
  CHECK(information_gain(matrix_from(v, lab), "maxDev") == doctest::Approx(1.0));
}

TEST_CASE("information gain of an independent feature is near zero") {
  Rng rng(8);
  std::vector<double> v;
  std::vector<int> lab;
  for (int i = 0; i < 10000; ++i) {
    v.push_back(rng.normal());
    lab.push_back(rng.bernoulli(0.5));
  }
  CHECK(information_gain(v, lab) <= 0.05);
}

TEST_CASE("information gain is invariant under strictly monotone transforms") {
  Rng rng(9);
  std::vector<double> v, transformed;
  std::vector<int> lab;
  for (int i = 0; i < 2000; ++i) {
    lab.push_back(rng.bernoulli(0.4));
    const double x = rng.normal(lab.back() ? 0.6 : 0.0, 1.0);
    v.push_back(x);
    transformed.push_back(std::exp(3.0 * x) - 7.0);
  }
  for (int bins : {2, 5, 20, 64}) {
    CHECK(information_gain(v, lab, bins) == information_gain(transformed, lab, bins));
  }
}

TEST_CASE("information gain errors") {
  std::vector<double> v{1, 2, 3};
  try {
    information_gain(v, std::vector<int>{1, 1, 1});
    FAIL("expected SingleClass");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SingleClass);
  }
  CHECK_THROWS_AS(information_gain(v, std::vector<int>{1, 0, 1}, 1), Error);
  CHECK_THROWS_AS(information_gain(FeatureMatrix{}, "nope"), Error);
}

TEST_CASE("correlation matrix conventions") {
  FeatureMatrix m;
  const double xs[] = {1, 2, 3};
  for (double x : xs) {
    FeatureRow r;
    r.features.values.fill(7.0);  // constant columns
    r.features[Feature::v20] = x;
    r.features[Feature::v50] = 2 * x;
    r.features[Feature::a20] = -x;
    m.rows.push_back(r);
  }
  const auto c = correlation_matrix(m);
  const auto v20 = static_cast<std::size_t>(Feature::v20);
  const auto v50 = static_cast<std::size_t>(Feature::v50);
  const auto a20 = static_cast<std::size_t>(Feature::a20);
  const auto dur = static_cast<std::size_t>(Feature::duration);
  CHECK(c[v20][v20] == 1.0);
  CHECK(c[v20][v50] == doctest::Approx(1.0));
  CHECK(c[v20][a20] == doctest::Approx(-1.0));
  CHECK(c[dur][dur] == 0.0);
  CHECK(c[dur][v20] == 0.0);
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    for (std::size_t j = 0; j < kFeatureCount; ++j) CHECK(c[i][j] == c[j][i]);
  }
  FeatureMatrix one;
  one.rows.resize(1);
  CHECK_THROWS_AS(correlation_matrix(one), Error);
}

TEST_CASE("feature matrix skips taps and CSV has 28 columns") {
  const Session s = testutil::session_from(
      "s1", Actor::Agent,
      {trace_from({{1, 1}}, 1), trace_from({{0, 0}, {1, 0}, {2, 0}, {3, 0}, {4, 0}}, 10),
       trace_from({{0, 0}, {0, 1}, {0, 2}, {0, 3}, {0, 4}, {0, 5}}, 10)},
      {100.0, 100.0}, 3);
  LabeledCorpus c;
  c.sessions = {s};
  const FeatureMatrix m = build_feature_matrix(c);
  REQUIRE(m.rows.size() == 2);
  CHECK(m.rows[0].action_index == 1);
  CHECK(m.rows[1].cluster == 3);
  std::stringstream ss;
  write_feature_csv(m, ss);
  std::string header;
  std::getline(ss, header);
  CHECK(std::count(header.begin(), header.end(), ',') == 27);
  CHECK(header.rfind("session_id,action_index,actor,cluster,v20,", 0) == 0);
  CHECK(feature_index("duration") == 23);
  CHECK(feature_names().size() == 24);
}
