#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "oracles.hpp"
#include "test_util.hpp"
#include "touchbench/error.hpp"
#include "touchbench/features.hpp"
#include "touchbench/humanize.hpp"

using namespace touchbench;
using testutil::session_from;
using testutil::trace_from;

namespace {

double max_dev(const ActionTrace& t) {
  return extract_features(t, 1080, 1920).values[static_cast<std::size_t>(Feature::maxDev)];
}

bool strictly_increasing(const ActionTrace& t) {
  for (std::size_t i = 1; i < t.events.size(); ++i) {
    if (!(t.events[i].t_ms > t.events[i - 1].t_ms)) return false;
  }
  return true;
}

double endpoint_error(const ActionTrace& t, Point s, Point e) {
  return std::max(std::hypot(t.events.front().x - s.x, t.events.front().y - s.y),
                  std::hypot(t.events.back().x - e.x, t.events.back().y - e.y));
}

ActionTrace curved_swipe(double x0, double y0, double x1, double y1, double bulge) {
  std::vector<std::pair<double, double>> pts;
  for (int k = 0; k <= 20; ++k) {
    const double f = k / 20.0;
    const double off = bulge * std::sin(std::numbers::pi * f);
    const double dx = x1 - x0, dy = y1 - y0, len = std::hypot(dx, dy);
    pts.emplace_back(x0 + f * dx - off * dy / len, y0 + f * dy + off * dx / len);
  }
  return trace_from(pts, 12.0);
}

Session agent_session(const std::string& id) {
  std::vector<ActionTrace> acts{
      trace_from({{500, 900}}, 1.0),
      trace_from({{300, 1500}, {350, 1400}, {400, 1300}, {450, 1200}, {500, 1100}, {550, 1000}}, 11.0),
      trace_from({{200, 200}, {201, 201}}, 3.0),
      trace_from({{800, 400}, {700, 500}, {600, 600}, {500, 700}, {400, 800}}, 11.0),
  };
  return session_from(id, Actor::Agent, acts, {6000, 7000, 8000});
}

std::shared_ptr<const ReferenceDB> small_db() {
  auto db = std::make_shared<ReferenceDB>();
  for (int i = 0; i < 8; ++i) {
    const double ang = i * std::numbers::pi / 4;
    db->entries.push_back(make_reference_entry(
        curved_swipe(540, 960, 540 + 300 * std::cos(ang), 960 + 300 * std::sin(ang), 25.0)));
  }
  return db;
}

}  // namespace

TEST_CASE("de Boor evaluation matches the basis-function oracle") {
  Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const int p = 2 + static_cast<int>(rng.index(3));
    const int n = p + 1 + static_cast<int>(rng.index(5));
    std::vector<Point> ctrl;
    std::vector<std::complex<double>> cc;
    for (int i = 0; i < n; ++i) {
      ctrl.push_back({rng.uniform(0, 100), rng.uniform(0, 100)});
      cc.emplace_back(ctrl.back().x, ctrl.back().y);
    }
    for (double u : {0.0, 0.13, 0.5, 0.77, 0.999, 1.0, rng.uniform()}) {
      const Point a = bspline_point(ctrl, p, u);
      const auto b = oracle::bspline_basis_point(cc, p, u);
      CHECK(a.x == doctest::Approx(b.real()).epsilon(1e-12));
      CHECK(a.y == doctest::Approx(b.imag()).epsilon(1e-12));
    }
  }
}

TEST_CASE("quadratic spline midpoint sits at half the displacement") {
  const double d = 40.0;
  const std::vector<Point> ctrl{{0, 0}, {50, d}, {100, 0}};
  const Point mid = bspline_point(ctrl, 2, 0.5);
  CHECK(mid.x == doctest::Approx(50.0));
  CHECK(mid.y == doctest::Approx(d / 2));
}

TEST_CASE("B-spline swipe properties") {
  const Point s{100, 1700}, e{900, 300};
  SUBCASE("zero noise collapses onto the chord") {
    BSplineConfig cfg;
    cfg.noise_sigma = 0.0;
    Rng rng(3);
    CHECK(max_dev(bspline_swipe(s, e, cfg, rng)) < 1e-6);
  }
  SUBCASE("endpoints and times for many seeds") {
    BSplineConfig cfg;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      Rng rng(seed);
      const auto t = bspline_swipe(s, e, cfg, rng, 250.0);
      CHECK(endpoint_error(t, s, e) <= 1e-6);
      CHECK(strictly_increasing(t));
      CHECK(t.events.size() >= kSwipeMinEvents);
      CHECK(t.duration_ms() == doctest::Approx(250.0));
    }
  }
  SUBCASE("noise bends nearly every path") {
    BSplineConfig cfg;
    cfg.noise_sigma = 20.0;
    int bent = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      Rng rng(seed);
      bent += max_dev(bspline_swipe(s, e, cfg, rng)) > 0.1;
    }
    CHECK(bent >= 99);
  }
  SUBCASE("smoothstep slows both ends") {
    BSplineConfig cfg;
    cfg.noise_sigma = 0.0;
    Rng rng(4);
    const auto t = bspline_swipe(s, e, cfg, rng, 400.0);
    auto step = [&](std::size_t i) {
      return std::hypot(t.events[i + 1].x - t.events[i].x, t.events[i + 1].y - t.events[i].y);
    };
    const std::size_t m = t.events.size();
    CHECK(step(0) < step(m / 2));
    CHECK(step(m - 2) < step(m / 2));
  }
  SUBCASE("degenerate chord") {
    Rng rng(5);
    CHECK_THROWS_AS(bspline_swipe(s, s, BSplineConfig{}, rng), Error);
  }
}

TEST_CASE("history matching rotation example") {
  ReferenceEntry ref;
  ref.chord_length = 100.0;
  ref.chord_angle = std::numbers::pi / 2;
  ref.points = {{0, 0, 0}, {10, 50, 10}, {5, 70, 20}, {2, 90, 30}, {0, 100, 40}};
  const Point start{200, 200}, end{300, 200};
  const auto t = map_reference(ref, start, end);
  CHECK(t.events[1].x == doctest::Approx(250.0));
  CHECK(t.events[1].y == doctest::Approx(190.0));
  CHECK(endpoint_error(t, start, end) <= 1e-6);
  // Timestamps are copied unchanged.
  for (std::size_t i = 0; i < ref.points.size(); ++i) CHECK(t.events[i].t_ms == ref.points[i].t_ms);
  const auto scaled = map_reference(ref, start, {400, 200}, true);
  CHECK(scaled.events.back().t_ms == doctest::Approx(80.0));
}

TEST_CASE("history matching identity and scaling") {
  const ActionTrace original = curved_swipe(100, 300, 700, 900, 40.0);
  ReferenceDB db;
  db.entries.push_back(make_reference_entry(original));
  Rng rng(6);
  const Point s{original.events.front().x, original.events.front().y};
  const Point e{original.events.back().x, original.events.back().y};
  const auto m = history_match_swipe(s, e, db, HistoryConfig{}, rng);
  CHECK_FALSE(m.fallback);
  REQUIRE(m.trace.events.size() == original.events.size());
  for (std::size_t i = 0; i < original.events.size(); ++i) {
    CHECK(m.trace.events[i].x == doctest::Approx(original.events[i].x).epsilon(1e-12));
    CHECK(m.trace.events[i].y == doctest::Approx(original.events[i].y).epsilon(1e-12));
    CHECK(m.trace.events[i].t_ms + original.events.front().t_ms ==
          doctest::Approx(original.events[i].t_ms));
  }
  const Point e2{s.x + 2 * (e.x - s.x), s.y + 2 * (e.y - s.y)};
  const auto twice = map_reference(db.entries[0], s, e2);
  CHECK(max_dev(twice) == doctest::Approx(2 * max_dev(original)).epsilon(1e-9));
}

TEST_CASE("history matching candidates and fallback") {
  const auto db = small_db();
  HistoryConfig cfg;
  Rng rng(7);
  // Only the entry pointing right lies within the narrowed angle band.
  cfg.angle_band_rad = 0.5;
  for (int i = 0; i < 20; ++i) {
    const auto m = history_match_swipe({100, 100}, {400, 130}, *db, cfg, rng);
    CHECK_FALSE(m.fallback);
    CHECK(m.entry == 0);
  }
  cfg.angle_band_rad = 0.01;
  const auto fb = history_match_swipe({100, 100}, {400, 250}, *db, cfg, rng);
  CHECK(fb.fallback);
  CHECK(fb.entry == 1);  // the 45-degree entry is nearest
  CHECK(endpoint_error(fb.trace, {100, 100}, {400, 250}) <= 1e-6);
  CHECK_THROWS_AS(history_match_swipe({0, 0}, {1, 1}, ReferenceDB{}, cfg, rng), Error);
}

TEST_CASE("endpoint preservation across many seeded generations") {
  const auto db = small_db();
  Rng pick(8);
  BSplineConfig bcfg;
  int checked = 0;
  double worst = 0.0;
  for (int i = 0; i < 5000; ++i) {
    const Point s{pick.uniform(0, 1080), pick.uniform(0, 1920)};
    Point e{pick.uniform(0, 1080), pick.uniform(0, 1920)};
    if (s == e) continue;
    Rng rng(static_cast<std::uint64_t>(i));
    worst = std::max(worst, endpoint_error(bspline_swipe(s, e, bcfg, rng), s, e));
    worst = std::max(worst, endpoint_error(history_match_swipe(s, e, *db, {}, rng).trace, s, e));
    checked += 2;
  }
  CHECK(checked == 10000);
  CHECK(worst <= 1e-6);
}

TEST_CASE("long-press durations") {
  Rng rng(9);
  LongPressConfig fixed{true, 0.08, 0.0};
  CHECK(long_press_duration(fixed, rng) == doctest::Approx(80.0));
  LongPressConfig cfg;
  double sum = 0.0;
  bool all_above = true;
  for (int i = 0; i < 10000; ++i) {
    const double d = long_press_duration(cfg, rng);
    sum += d;
    all_above = all_above && d >= 10.0;
  }
  CHECK(all_above);
  CHECK(sum / 10000 / 1000 == doctest::Approx(0.075).epsilon(0.002 / 0.075));
  LongPressConfig wide{true, 0.02, 0.05};
  for (int i = 0; i < 1000; ++i) CHECK(long_press_duration(wide, rng) >= 10.0);
}

TEST_CASE("tap stretching") {
  const auto one = stretch_tap(trace_from({{5, 5}}, 1.0, 100.0), 70.0);
  REQUIRE(one.events.size() == 2);
  CHECK(one.duration_ms() == doctest::Approx(70.0));
  CHECK(one.events[1].x == 5.0);
  CHECK(one.kind == ActionKind::Tap);
  const auto four = stretch_tap(trace_from({{1, 1}, {2, 2}, {3, 3}, {4, 4}}, 1.0, 50.0), 90.0);
  CHECK(four.events.size() == 4);
  CHECK(four.events.front().t_ms == 50.0);
  CHECK(four.duration_ms() == doctest::Approx(90.0));
  CHECK(four.kind == ActionKind::Tap);
}

TEST_CASE("fake actions") {
  const Session s = agent_session("a");
  FakeActionConfig cfg;
  Rng rng(10);
  SUBCASE("disabled is a no-op") { CHECK(inject_fake_actions(s, cfg, rng) == s); }
  SUBCASE("structure") {
    cfg.enabled = true;
    const Session out = inject_fake_actions(s, cfg, rng);
    std::size_t originals = 0;
    Point origin{540, 960};
    for (std::size_t i = 0; i < out.actions.size(); ++i) {
      const ActionTrace& a = out.actions[i];
      if (!a.synthetic) {
        CHECK(a.events == s.actions[originals].events);
        ++originals;
        if (a.kind == ActionKind::Tap) origin = {a.events.front().x, a.events.front().y};
        continue;
      }
      CHECK(a.kind == ActionKind::Swipe);
      CHECK(a.events.size() == 12);
      CHECK(strictly_increasing(a));
      for (const auto& ev : a.events) {
        CHECK(std::hypot(ev.x - origin.x, ev.y - origin.y) == doctest::Approx(50.0));
      }
    }
    CHECK(originals == s.actions.size());
    for (double v : action_intervals(out)) CHECK(v >= 0.0);
    CHECK_NOTHROW(validate_session(out));
  }
  SUBCASE("counts follow the Poisson rate") {
    cfg.enabled = true;
    const Session two = session_from("p", Actor::Agent,
                                     {trace_from({{10, 10}}, 1.0), trace_from({{20, 20}}, 1.0)},
                                     {100000.0});
    double total = 0.0;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
      Rng r(seed);
      total += static_cast<double>(inject_fake_actions(two, cfg, r).actions.size() - 2);
    }
    CHECK(total / 1000 >= 87.0);
    CHECK(total / 1000 <= 93.0);
  }
}

TEST_CASE("wrapper pipeline") {
  const Session s = agent_session("agent-1");
  SUBCASE("all-off is the identity apart from the label") {
    Session out = humanize_session(s, WrapperConfig{});
    CHECK(out.actor == Actor::Humanized);
    out.actor = Actor::Agent;
    CHECK(out == s);
  }
  SUBCASE("history + long-press + fake") {
    WrapperConfig cfg;
    cfg.swipe_mode = SwipeMode::HistoryMatch;
    cfg.history.db = small_db();
    cfg.longpress.enabled = true;
    cfg.fake.enabled = true;
    cfg.seed = 42;
    const Session out = humanize_session(s, cfg);
    CHECK(out.actor == Actor::Humanized);
    CHECK(out.actions.size() >= s.actions.size());
    CHECK_NOTHROW(validate_session(out));
    std::size_t k = 0;
    for (const ActionTrace& a : out.actions) {
      if (a.synthetic) continue;
      const ActionTrace& o = s.actions[k++];
      CHECK(a.kind == o.kind);
      CHECK(endpoint_error(a, {o.events.front().x, o.events.front().y},
                           {o.events.back().x, o.events.back().y}) <= 1e-6);
      if (a.kind == ActionKind::Tap) CHECK(a.duration_ms() >= 10.0);
    }
    CHECK(k == s.actions.size());
    CHECK(humanize_session(s, cfg) == out);
  }
  SUBCASE("gaps between real actions are kept when only durations change") {
    WrapperConfig cfg;
    cfg.longpress.enabled = true;
    const Session out = humanize_session(s, cfg);
    for (std::size_t i = 1; i < s.actions.size(); ++i) {
      CHECK(*out.actions[i].start_offset_ms == doctest::Approx(*s.actions[i].start_offset_ms));
    }
  }
  SUBCASE("history mode without a database is a config error") {
    WrapperConfig cfg;
    cfg.swipe_mode = SwipeMode::HistoryMatch;
    try {
      humanize_session(s, cfg);
      FAIL("expected InvalidConfig");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::InvalidConfig);
    }
  }
}

TEST_CASE("corpus humanization is independent of thread count") {
  LabeledCorpus c;
  for (int i = 0; i < 12; ++i) {
    Session s = agent_session("s" + std::to_string(i));
    if (i % 3 == 0) s.actor = Actor::Human;
    c.sessions.push_back(s);
  }
  WrapperConfig cfg;
  cfg.swipe_mode = SwipeMode::BSpline;
  cfg.fake.enabled = true;
  cfg.seed = 5;
  const auto serial = humanize_corpus(c, cfg, 1);
  CHECK(humanize_corpus(c, cfg, 4) == serial);
  CHECK(serial.sessions[0] == c.sessions[0]);
  CHECK(serial.sessions[1].actor == Actor::Humanized);
}

TEST_CASE("wrapper config text round-trip and validation") {
  WrapperConfig cfg;
  cfg.swipe_mode = SwipeMode::BSpline;
  cfg.bspline.noise_sigma = 12.5;
  cfg.fake.enabled = true;
  cfg.fake.rate_hz = 1.3;
  cfg.seed = 99;
  std::istringstream in(wrapper_config_to_string(cfg));
  const WrapperConfig back = parse_wrapper_config(in);
  CHECK(wrapper_config_to_string(back) == wrapper_config_to_string(cfg));
  std::istringstream bad_key("bspline.colour = 3\n");
  CHECK_THROWS_AS(parse_wrapper_config(bad_key), ParseError);
  std::istringstream bad_band("history.ratio_lo = 2\nhistory.ratio_hi = 1\n");
  CHECK_THROWS_AS(parse_wrapper_config(bad_band), Error);
  std::istringstream bad_degree("bspline.degree = 3\nbspline.control_points = 3\n");
  CHECK_THROWS_AS(parse_wrapper_config(bad_degree), Error);
}

TEST_CASE("reference database JSONL round-trip") {
  const auto db = small_db();
  std::stringstream buf;
  write_reference_db(*db, buf);
  const ReferenceDB back = read_reference_db(buf);
  REQUIRE(back.entries.size() == db->entries.size());
  CHECK(back == *db);
  std::istringstream short_entry(R"({"chord_length":1,"chord_angle":0,"points":[[0,0,0],[1,0,1]]})");
  CHECK_THROWS_AS(read_reference_db(short_entry), SchemaViolation);
}
