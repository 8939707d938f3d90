#include "touchbench/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "touchbench/error.hpp"
#include "touchbench/kvconfig.hpp"
#include "touchbench/numeric.hpp"

namespace touchbench {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kMarginPx = 8.0;

Point clamp_point(Point p, int w, int h) {
  return {std::clamp(p.x, kMarginPx, w - kMarginPx), std::clamp(p.y, kMarginPx, h - kMarginPx)};
}

// Each cluster (app category) nudges where content sits on screen; both
// classes see the same shift.
TargetModel for_cluster(TargetModel t, int cluster, int clusters) {
  const double centered = cluster - (clusters - 1) / 2.0;
  t.center_y_frac = std::clamp(t.center_y_frac + 0.03 * centered, 0.2, 0.8);
  t.vertical_share = std::clamp(t.vertical_share - 0.05 * centered, 0.0, 1.0);
  return t;
}

std::string session_name(char prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%c%05zu", prefix, i);
  return buf;
}

}  // namespace

Point TargetModel::sample_point(Rng& rng, int w, int h) const {
  return clamp_point({rng.normal(center_x_frac * w, spread_x_frac * w),
                      rng.normal(center_y_frac * h, spread_y_frac * h)},
                     w, h);
}

std::pair<Point, Point> TargetModel::sample_chord(Rng& rng, int w, int h) const {
  for (;;) {
    const Point s = sample_point(rng, w, h);
    const double len = rng.lognormal(std::log(chord_median_px), chord_log_sd);
    double base = rng.bernoulli(vertical_share) ? kPi / 2 : 0.0;
    if (rng.bernoulli(0.5)) base += kPi;
    const double ang = base + rng.normal(0.0, direction_sd_rad);
    const Point e = clamp_point({s.x + len * std::cos(ang), s.y + len * std::sin(ang)}, w, h);
    if (std::hypot(e.x - s.x, e.y - s.y) >= 20.0) return {s, e};
  }
}

AgentProfile ui_tars_like() { return AgentProfile{}; }

AgentProfile mobile_agent_e_like() {
  AgentProfile p;
  p.name = "mobile-agent-e-like";
  p.interval_lo_s = 50.0;
  p.interval_hi_s = 80.0;
  return p;
}

void validate(const SynthConfig& cfg) {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::InvalidProfile, msg); };
  if (cfg.humans < 1 || cfg.agents < 1) fail("session counts must be >= 1");
  if (cfg.actions_per_session < 1) fail("actions_per_session must be >= 1");
  if (cfg.clusters < 1) fail("clusters must be >= 1");
  if (cfg.screen_w < 100 || cfg.screen_h < 100) fail("screen must be at least 100x100 px");
  if (!(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0)) fail("train_fraction must lie in (0, 1)");
  const HumanProfile& h = cfg.human;
  if (!(h.tap_mean_s > 0 && h.tap_std_s > 0 && h.interval_median_s > 0 && h.interval_log_sd > 0 &&
        h.swipe_duration.median_ms > 0 && h.swipe_duration.log_sd > 0 && h.arc_scale_px > 0 &&
        h.jitter_px > 0 && h.event_period_ms > 0)) {
    fail("human profile scales must be > 0");
  }
  if (!(h.swipe_share >= 0 && h.swipe_share <= 1)) fail("human swipe_share must lie in [0, 1]");
  if (cfg.agent_profiles.empty()) fail("at least one agent profile is required");
  for (const AgentProfile& a : cfg.agent_profiles) {
    if (!(a.interval_lo_s >= 0 && a.interval_lo_s < a.interval_hi_s)) {
      fail("agent \"" + a.name + "\" interval band needs 0 <= lo < hi");
    }
    if (!(a.tap_duration_ms > 0 && a.event_period_ms > 0 && a.swipe_duration_ms > 0)) {
      fail("agent \"" + a.name + "\" timings must be > 0");
    }
    if (!(a.swipe_share >= 0 && a.swipe_share <= 1)) fail("agent swipe_share must lie in [0, 1]");
  }
  const TargetModel& t = cfg.targets;
  if (!(t.spread_x_frac > 0 && t.spread_y_frac > 0 && t.chord_median_px > 0 && t.chord_log_sd >= 0 &&
        t.direction_sd_rad >= 0 && t.vertical_share >= 0 && t.vertical_share <= 1)) {
    fail("target model scales must be positive");
  }
}

// ---------------------------------------------------------------------------
// Actions

ActionTrace human_swipe(Point start, Point end, const HumanProfile& p, Rng& rng, double t0_ms,
                        int w, int h) {
  const double dx = end.x - start.x, dy = end.y - start.y;
  const double len = std::hypot(dx, dy);
  if (!(len > 0.0)) throw Error(ErrorCode::DegenerateChord, "swipe start equals end");
  const double nx = -dy / len, ny = dx / len;
  const double duration = p.swipe_duration.sample(rng);
  const int events = std::max(static_cast<int>(kSwipeMinEvents),
                              static_cast<int>(std::lround(duration / p.event_period_ms)) + 1);
  // Bow plus a smaller S-shaped component, so paths are not all symmetric arcs.
  const double bow = rng.normal(0.0, p.arc_scale_px);
  const double wiggle = rng.normal(0.0, 0.3 * p.arc_scale_px);
  ActionTrace trace;
  trace.kind = ActionKind::Swipe;
  for (int k = 0; k < events; ++k) {
    const double tau = static_cast<double>(k) / (events - 1);
    const double s = tau * tau * tau * (10.0 - 15.0 * tau + 6.0 * tau * tau);
    double t = t0_ms + duration * tau;
    Point pt;
    if (k == 0) {
      pt = start;
    } else if (k == events - 1) {
      pt = end;
    } else {
      const double off = bow * std::sin(kPi * s) + wiggle * std::sin(2.0 * kPi * s);
      pt = {start.x + s * dx + off * nx + rng.normal(0.0, p.jitter_px),
            start.y + s * dy + off * ny + rng.normal(0.0, p.jitter_px)};
      pt.x = std::clamp(pt.x, 0.0, static_cast<double>(w));
      pt.y = std::clamp(pt.y, 0.0, static_cast<double>(h));
      // Sampling jitter well inside half a period keeps times increasing.
      t += rng.uniform(-0.2, 0.2) * std::min(p.event_period_ms, duration / (events - 1));
    }
    trace.events.push_back({pt.x, pt.y, t});
  }
  return trace;
}

ActionTrace human_tap(Point at, const HumanProfile& p, Rng& rng, double t0_ms, int w, int h) {
  double duration = 0.0;
  do {
    duration = rng.normal(p.tap_mean_s, p.tap_std_s) * 1000.0;
  } while (duration < 10.0);
  const int events = 2 + static_cast<int>(rng.index(3));
  ActionTrace trace;
  trace.kind = ActionKind::Tap;
  for (int k = 0; k < events; ++k) {
    const double x = k == 0 ? at.x : at.x + rng.normal(0.0, 1.0);
    const double y = k == 0 ? at.y : at.y + rng.normal(0.0, 1.0);
    trace.events.push_back({std::clamp(x, 0.0, static_cast<double>(w)),
                            std::clamp(y, 0.0, static_cast<double>(h)),
                            t0_ms + duration * k / (events - 1)});
  }
  return trace;
}

ActionTrace agent_swipe(Point start, Point end, const AgentProfile& p, double t0_ms) {
  const int events = std::max(static_cast<int>(kSwipeMinEvents),
                              static_cast<int>(std::lround(p.swipe_duration_ms / p.event_period_ms)) + 1);
  ActionTrace trace;
  trace.kind = ActionKind::Swipe;
  for (int k = 0; k < events; ++k) {
    const double f = static_cast<double>(k) / (events - 1);
    trace.events.push_back({k == events - 1 ? end.x : start.x + f * (end.x - start.x),
                            k == events - 1 ? end.y : start.y + f * (end.y - start.y),
                            t0_ms + k * p.event_period_ms});
  }
  return trace;
}

ActionTrace agent_tap(Point at, const AgentProfile& p, double t0_ms) {
  ActionTrace trace;
  trace.kind = ActionKind::Tap;
  trace.events = {{at.x, at.y, t0_ms}, {at.x, at.y, t0_ms + p.tap_duration_ms}};
  return trace;
}

// ---------------------------------------------------------------------------
// Sessions

Session gen_human_session(const std::string& id, int cluster, const SynthConfig& cfg) {
  Rng rng = derive_rng(cfg.seed, "synth.human", id);
  const TargetModel targets = for_cluster(cfg.targets, cluster, cfg.clusters);
  Session s;
  s.session_id = id;
  s.actor = Actor::Human;
  s.source = "synth-human";
  s.cluster = cluster;
  s.screen_w = cfg.screen_w;
  s.screen_h = cfg.screen_h;
  double t = 0.0;
  for (int i = 0; i < cfg.actions_per_session; ++i) {
    if (i > 0) t += rng.lognormal(std::log(cfg.human.interval_median_s), cfg.human.interval_log_sd) * 1000.0;
    ActionTrace a;
    if (rng.bernoulli(cfg.human.swipe_share)) {
      const auto [p0, p1] = targets.sample_chord(rng, s.screen_w, s.screen_h);
      a = human_swipe(p0, p1, cfg.human, rng, t, s.screen_w, s.screen_h);
    } else {
      a = human_tap(targets.sample_point(rng, s.screen_w, s.screen_h), cfg.human, rng, t,
                    s.screen_w, s.screen_h);
    }
    t = a.events.back().t_ms;
    s.actions.push_back(std::move(a));
  }
  recompute_offsets(s);
  return s;
}

Session gen_agent_session(const std::string& id, int cluster, const AgentProfile& profile,
                          const SynthConfig& cfg) {
  Rng rng = derive_rng(cfg.seed, "synth.agent", id);
  const TargetModel targets = for_cluster(cfg.targets, cluster, cfg.clusters);
  Session s;
  s.session_id = id;
  s.actor = Actor::Agent;
  s.source = profile.name;
  s.cluster = cluster;
  s.screen_w = cfg.screen_w;
  s.screen_h = cfg.screen_h;
  double t = 0.0;
  for (int i = 0; i < cfg.actions_per_session; ++i) {
    if (i > 0) t += rng.uniform(profile.interval_lo_s, profile.interval_hi_s) * 1000.0;
    ActionTrace a;
    if (rng.bernoulli(profile.swipe_share)) {
      const auto [p0, p1] = targets.sample_chord(rng, s.screen_w, s.screen_h);
      a = agent_swipe(p0, p1, profile, t);
    } else {
      a = agent_tap(targets.sample_point(rng, s.screen_w, s.screen_h), profile, t);
    }
    t = a.events.back().t_ms;
    s.actions.push_back(std::move(a));
  }
  recompute_offsets(s);
  return s;
}

LabeledCorpus gen_corpus(const SynthConfig& cfg) {
  validate(cfg);
  LabeledCorpus corpus;
  corpus.sessions.reserve(cfg.humans + cfg.agents);
  for (std::size_t i = 0; i < cfg.humans; ++i) {
    corpus.sessions.push_back(
        gen_human_session(session_name('h', i), static_cast<int>(i % cfg.clusters), cfg));
  }
  for (std::size_t i = 0; i < cfg.agents; ++i) {
    const AgentProfile& profile = cfg.agent_profiles[i % cfg.agent_profiles.size()];
    corpus.sessions.push_back(
        gen_agent_session(session_name('a', i), static_cast<int>(i % cfg.clusters), profile, cfg));
  }
  corpus.split = stratified_split(corpus.sessions, cfg.train_fraction, derive_seed(cfg.seed, "split"));
  return corpus;
}

ReferenceDB build_reference_db(const LabeledCorpus& corpus, bool train_only) {
  ReferenceDB db;
  for (const Session& s : corpus.sessions) {
    if (s.actor != Actor::Human) continue;
    if (train_only) {
      auto it = corpus.split.find(s.session_id);
      if (it == corpus.split.end() || it->second != Split::Train) continue;
    }
    for (const ActionTrace& a : s.actions) {
      if (a.kind != ActionKind::Swipe) continue;
      const FingerEvent& f = a.events.front();
      const FingerEvent& l = a.events.back();
      if (f.x == l.x && f.y == l.y) continue;
      db.entries.push_back(make_reference_entry(a));
    }
  }
  if (db.entries.empty()) throw Error(ErrorCode::NoHumanSwipes, "corpus has no human swipes");
  return db;
}

// ---------------------------------------------------------------------------
// Key-value form

SynthConfig parse_synth_config(std::istream& in) {
  SynthConfig cfg;
  std::vector<AgentProfile> agents;
  auto agent = [&](const std::string& name) -> AgentProfile& {
    for (AgentProfile& a : agents) {
      if (a.name == name) return a;
    }
    AgentProfile a = name == "mobile-agent-e-like" ? mobile_agent_e_like() : ui_tars_like();
    a.name = name;
    agents.push_back(a);
    return agents.back();
  };
  for (const KeyValue& kv : parse_key_values(in)) {
    const std::string& k = kv.key;
    if (k == "humans") cfg.humans = kv_u64(kv);
    else if (k == "agents") cfg.agents = kv_u64(kv);
    else if (k == "actions") cfg.actions_per_session = kv_int(kv);
    else if (k == "clusters") cfg.clusters = kv_int(kv);
    else if (k == "screen_w") cfg.screen_w = kv_int(kv);
    else if (k == "screen_h") cfg.screen_h = kv_int(kv);
    else if (k == "train_fraction") cfg.train_fraction = kv_double(kv);
    else if (k == "seed") cfg.seed = kv_u64(kv);
    else if (k == "human.tap_mean_s") cfg.human.tap_mean_s = kv_double(kv);
    else if (k == "human.tap_std_s") cfg.human.tap_std_s = kv_double(kv);
    else if (k == "human.interval_median_s") cfg.human.interval_median_s = kv_double(kv);
    else if (k == "human.interval_log_sd") cfg.human.interval_log_sd = kv_double(kv);
    else if (k == "human.swipe_median_ms") cfg.human.swipe_duration.median_ms = kv_double(kv);
    else if (k == "human.swipe_log_sd") cfg.human.swipe_duration.log_sd = kv_double(kv);
    else if (k == "human.arc_scale_px") cfg.human.arc_scale_px = kv_double(kv);
    else if (k == "human.jitter_px") cfg.human.jitter_px = kv_double(kv);
    else if (k == "human.event_period_ms") cfg.human.event_period_ms = kv_double(kv);
    else if (k == "human.swipe_share") cfg.human.swipe_share = kv_double(kv);
    else if (k.starts_with("agent.")) {
      const auto dot = k.find('.', 6);
      if (dot == std::string::npos) throw ParseError(kv.line_no, "expected agent.<name>.<field>");
      AgentProfile& a = agent(k.substr(6, dot - 6));
      const std::string field = k.substr(dot + 1);
      if (field == "interval_lo_s") a.interval_lo_s = kv_double(kv);
      else if (field == "interval_hi_s") a.interval_hi_s = kv_double(kv);
      else if (field == "tap_duration_ms") a.tap_duration_ms = kv_double(kv);
      else if (field == "event_period_ms") a.event_period_ms = kv_double(kv);
      else if (field == "swipe_duration_ms") a.swipe_duration_ms = kv_double(kv);
      else if (field == "swipe_share") a.swipe_share = kv_double(kv);
      else throw ParseError(kv.line_no, "unknown agent field \"" + field + "\"");
    } else {
      throw ParseError(kv.line_no, "unknown synth key \"" + k + "\"");
    }
  }
  if (!agents.empty()) cfg.agent_profiles = std::move(agents);
  validate(cfg);
  return cfg;
}

std::string synth_config_to_string(const SynthConfig& cfg) {
  std::ostringstream out;
  auto d = [](double v) { return format_double(v); };
  out << "humans = " << cfg.humans << '\n'
      << "agents = " << cfg.agents << '\n'
      << "actions = " << cfg.actions_per_session << '\n'
      << "clusters = " << cfg.clusters << '\n'
      << "screen_w = " << cfg.screen_w << '\n'
      << "screen_h = " << cfg.screen_h << '\n'
      << "train_fraction = " << d(cfg.train_fraction) << '\n'
      << "seed = " << cfg.seed << '\n'
      << "human.tap_mean_s = " << d(cfg.human.tap_mean_s) << '\n'
      << "human.tap_std_s = " << d(cfg.human.tap_std_s) << '\n'
      << "human.interval_median_s = " << d(cfg.human.interval_median_s) << '\n'
      << "human.interval_log_sd = " << d(cfg.human.interval_log_sd) << '\n'
      << "human.swipe_median_ms = " << d(cfg.human.swipe_duration.median_ms) << '\n'
      << "human.swipe_log_sd = " << d(cfg.human.swipe_duration.log_sd) << '\n'
      << "human.arc_scale_px = " << d(cfg.human.arc_scale_px) << '\n'
      << "human.jitter_px = " << d(cfg.human.jitter_px) << '\n'
      << "human.event_period_ms = " << d(cfg.human.event_period_ms) << '\n'
      << "human.swipe_share = " << d(cfg.human.swipe_share) << '\n';
  for (const AgentProfile& a : cfg.agent_profiles) {
    const std::string k = "agent." + a.name + ".";
    out << k << "interval_lo_s = " << d(a.interval_lo_s) << '\n'
        << k << "interval_hi_s = " << d(a.interval_hi_s) << '\n'
        << k << "tap_duration_ms = " << d(a.tap_duration_ms) << '\n'
        << k << "event_period_ms = " << d(a.event_period_ms) << '\n'
        << k << "swipe_duration_ms = " << d(a.swipe_duration_ms) << '\n'
        << k << "swipe_share = " << d(a.swipe_share) << '\n';
  }
  return out.str();
}

}  // namespace touchbench
