#include <doctest.h>

#include <cmath>
#include <sstream>

#include "touchbench/error.hpp"
#include "touchbench/features.hpp"
#include "touchbench/synth.hpp"

using namespace touchbench;

namespace {

SynthConfig small_config(std::uint64_t seed = 3) {
  SynthConfig cfg;
  cfg.humans = 20;
  cfg.agents = 20;
  cfg.actions_per_session = 8;
  cfg.seed = seed;
  return cfg;
}

double feature(const ActionTrace& t, Feature f) {
  return extract_features(t, 1080, 1920).values[static_cast<std::size_t>(f)];
}

}  // namespace

TEST_CASE("generated corpus shape and validity") {
  const SynthConfig cfg = small_config();
  const LabeledCorpus c = gen_corpus(cfg);
  REQUIRE(c.sessions.size() == 40);
  CHECK_NOTHROW(validate_corpus(c));
  CHECK(c.split.size() == 40);
  int human = 0;
  for (std::size_t i = 0; i < c.sessions.size(); ++i) {
    const Session& s = c.sessions[i];
    CHECK(s.actions.size() == 8);
    human += s.actor == Actor::Human;
    CHECK(s.cluster == static_cast<int>((i % 20) % 5));
  }
  CHECK(human == 20);
}

TEST_CASE("generation is reproducible") {
  std::ostringstream a, b, c;
  write_jsonl(gen_corpus(small_config(11)), a);
  write_jsonl(gen_corpus(small_config(11)), b);
  write_jsonl(gen_corpus(small_config(12)), c);
  CHECK(a.str() == b.str());
  CHECK(a.str() != c.str());
}

TEST_CASE("agent signatures") {
  const LabeledCorpus c = gen_corpus(small_config());
  int swipes = 0;
  for (const Session& s : c.sessions) {
    if (s.actor != Actor::Agent) continue;
    const bool slow = s.source == "mobile-agent-e-like";
    for (double v : action_intervals(s)) {
      CHECK(v >= (slow ? 50.0 : 5.0));
      CHECK(v <= (slow ? 80.0 : 10.0));
    }
    for (const ActionTrace& a : s.actions) {
      if (a.kind == ActionKind::Tap) {
        CHECK(a.duration_ms() <= 5.0);
        continue;
      }
      ++swipes;
      CHECK(feature(a, Feature::ratio_end_to_length) == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(feature(a, Feature::meanResultantLength) == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(feature(a, Feature::maxDev) <= 1e-9);
      for (std::size_t k = 1; k < a.events.size(); ++k) {
        CHECK(a.events[k].t_ms - a.events[k - 1].t_ms == doctest::Approx(11.0));
      }
    }
  }
  CHECK(swipes > 0);
}

TEST_CASE("human signatures") {
  SynthConfig cfg = small_config(5);
  cfg.humans = 200;
  cfg.agents = 1;
  const LabeledCorpus c = gen_corpus(cfg);
  std::vector<double> taps;
  int swipes = 0, curved = 0;
  for (const Session& s : c.sessions) {
    if (s.actor != Actor::Human) continue;
    for (const ActionTrace& a : s.actions) {
      if (a.kind == ActionKind::Tap) {
        taps.push_back(a.duration_ms());
      } else {
        ++swipes;
        curved += feature(a, Feature::maxDev) > 0.0;
      }
    }
  }
  REQUIRE(taps.size() > 300);
  double sum = 0;
  std::size_t above = 0;
  for (double t : taps) {
    sum += t;
    above += t >= 10.0;
  }
  const double mean_s = sum / static_cast<double>(taps.size()) / 1000.0;
  CHECK(mean_s >= 0.05);
  CHECK(mean_s <= 0.10);
  CHECK(above == taps.size());
  CHECK(static_cast<double>(curved) >= 0.99 * swipes);
}

TEST_CASE("human tap durations over ten thousand samples") {
  HumanProfile p;
  Rng rng(8);
  double sum = 0;
  int at_least_10 = 0;
  for (int i = 0; i < 10000; ++i) {
    const double d = human_tap({100, 100}, p, rng, 0.0, 1080, 1920).duration_ms();
    sum += d;
    at_least_10 += d >= 10.0;
  }
  CHECK(sum / 10000 / 1000 >= 0.05);
  CHECK(sum / 10000 / 1000 <= 0.10);
  CHECK(at_least_10 >= 9990);
}

TEST_CASE("human swipes follow a bell-shaped speed profile") {
  HumanProfile p;
  p.jitter_px = 1e-6;
  p.swipe_duration.log_sd = 1e-6;
  Rng rng(9);
  const auto t = human_swipe({100, 1500}, {100, 500}, p, rng, 0.0, 1080, 1920);
  auto speed = [&](std::size_t i) {
    return std::hypot(t.events[i + 1].x - t.events[i].x, t.events[i + 1].y - t.events[i].y) /
           (t.events[i + 1].t_ms - t.events[i].t_ms);
  };
  const std::size_t m = t.events.size();
  CHECK(speed(0) < 0.3 * speed(m / 2));
  CHECK(speed(m - 2) < 0.3 * speed(m / 2));
}

TEST_CASE("reference database from human swipes") {
  const LabeledCorpus c = gen_corpus(small_config());
  const ReferenceDB db = build_reference_db(c);
  std::size_t human_swipes = 0;
  for (const Session& s : c.sessions) {
    if (s.actor != Actor::Human) continue;
    for (const ActionTrace& a : s.actions) human_swipes += a.kind == ActionKind::Swipe;
  }
  CHECK(db.entries.size() == human_swipes);
  CHECK(build_reference_db(c, true).entries.size() < human_swipes);

  // Single-swipe corpus: the entry chord equals the displacement feature and
  // history matching on its own chord gives the swipe back.
  LabeledCorpus one;
  for (const Session& s : c.sessions) {
    if (s.actor != Actor::Human) continue;
    for (const ActionTrace& a : s.actions) {
      if (a.kind != ActionKind::Swipe) continue;
      Session only = s;
      only.actions = {a};
      only.actions[0].start_offset_ms.reset();
      one.sessions.push_back(only);
      break;
    }
    if (!one.sessions.empty()) break;
  }
  const ReferenceDB single = build_reference_db(one);
  REQUIRE(single.entries.size() == 1);
  const ActionTrace& a = one.sessions[0].actions[0];
  CHECK(single.entries[0].chord_length ==
        doctest::Approx(feature(a, Feature::displacement)).epsilon(1e-12));
  Rng rng(1);
  const auto m = history_match_swipe({a.events.front().x, a.events.front().y},
                                     {a.events.back().x, a.events.back().y}, single, {}, rng);
  for (std::size_t i = 0; i < a.events.size(); ++i) {
    CHECK(m.trace.events[i].x == doctest::Approx(a.events[i].x).epsilon(1e-12));
    CHECK(m.trace.events[i].y == doctest::Approx(a.events[i].y).epsilon(1e-12));
  }

  LabeledCorpus agents_only;
  for (const Session& s : c.sessions) {
    if (s.actor == Actor::Agent) agents_only.sessions.push_back(s);
  }
  try {
    build_reference_db(agents_only);
    FAIL("expected NoHumanSwipes");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoHumanSwipes);
  }
}

TEST_CASE("profile validation and key-value round-trip") {
  SynthConfig cfg = small_config();
  cfg.humans = 0;
  try {
    gen_corpus(cfg);
    FAIL("expected InvalidProfile");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidProfile);
  }
  cfg = small_config();
  cfg.agent_profiles[0].interval_lo_s = 12.0;
  CHECK_THROWS_AS(gen_corpus(cfg), Error);

  cfg = small_config();
  cfg.human.interval_median_s = 1.1;
  std::istringstream in(synth_config_to_string(cfg));
  const SynthConfig back = parse_synth_config(in);
  CHECK(synth_config_to_string(back) == synth_config_to_string(cfg));
  std::istringstream bad("agent.x.colour = 1\n");
  CHECK_THROWS_AS(parse_synth_config(bad), ParseError);
}
