#include "touchbench/humanize.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <fstream>
#include <numbers>
#include <sstream>
#include <thread>

#include "touchbench/error.hpp"
#include "touchbench/kvconfig.hpp"
#include "touchbench/numeric.hpp"

namespace touchbench {

namespace {

constexpr double kPi = std::numbers::pi;

double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * kPi);
  return a <= -kPi ? a + 2.0 * kPi : a;
}

void clamp_to_screen(ActionTrace& trace, int w, int h) {
  for (FingerEvent& e : trace.events) {
    e.x = std::clamp(e.x, 0.0, static_cast<double>(w));
    e.y = std::clamp(e.y, 0.0, static_cast<double>(h));
  }
}

void shift_time(ActionTrace& trace, double dt) {
  for (FingerEvent& e : trace.events) e.t_ms += dt;
}

}  // namespace

std::string_view to_string(SwipeMode mode) {
  switch (mode) {
    case SwipeMode::None: return "none";
    case SwipeMode::BSpline: return "bspline";
    case SwipeMode::HistoryMatch: return "history";
  }
  return "none";
}

SwipeMode parse_swipe_mode(std::string_view s) {
  if (s == "none") return SwipeMode::None;
  if (s == "bspline") return SwipeMode::BSpline;
  if (s == "history") return SwipeMode::HistoryMatch;
  throw Error(ErrorCode::InvalidConfig,
              "unknown swipe mode \"" + std::string(s) + "\" (none|bspline|history)");
}

double SwipeDurationModel::sample(Rng& rng) const {
  return rng.lognormal(std::log(median_ms), log_sd);
}

// ---------------------------------------------------------------------------
// Reference database

ReferenceEntry make_reference_entry(const ActionTrace& swipe) {
  if (swipe.events.size() < kSwipeMinEvents) {
    throw Error(ErrorCode::NotASwipe, "reference entries need at least 5 events");
  }
  const FingerEvent& first = swipe.events.front();
  const FingerEvent& last = swipe.events.back();
  const double dx = last.x - first.x, dy = last.y - first.y;
  ReferenceEntry e;
  e.chord_length = std::hypot(dx, dy);
  if (!(e.chord_length > 0.0)) {
    throw Error(ErrorCode::DegenerateChord, "reference swipe starts and ends at the same point");
  }
  e.chord_angle = std::atan2(dy, dx);
  e.points.reserve(swipe.events.size());
  for (const FingerEvent& ev : swipe.events) {
    e.points.push_back({ev.x - first.x, ev.y - first.y, ev.t_ms - first.t_ms});
  }
  return e;
}

void write_reference_db(const ReferenceDB& db, std::ostream& out) {
  for (const ReferenceEntry& e : db.entries) {
    Json pts = Json::array();
    for (const FingerEvent& p : e.points) pts.push_back(Json::array({p.x, p.y, p.t_ms}));
    Json rec = Json::object();
    rec["chord_length"] = e.chord_length;
    rec["chord_angle"] = e.chord_angle;
    rec["points"] = std::move(pts);
    out << rec.dump() << '\n';
  }
}

void save_reference_db(const ReferenceDB& db, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  write_reference_db(db, out);
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

ReferenceDB read_reference_db(std::istream& in) {
  ReferenceDB db;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Json rec;
    try {
      rec = Json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(line_no, e.what());
    }
    ReferenceEntry e;
    try {
      e.chord_length = rec.at("chord_length").get<double>();
      e.chord_angle = rec.at("chord_angle").get<double>();
      for (const Json& p : rec.at("points")) {
        if (!p.is_array() || p.size() != 3) throw SchemaViolation("points", "expected [x, y, t]", line_no);
        e.points.push_back({p[0].get<double>(), p[1].get<double>(), p[2].get<double>()});
      }
    } catch (const nlohmann::json::exception& ex) {
      throw SchemaViolation("reference entry", ex.what(), line_no);
    }
    if (e.points.size() < kSwipeMinEvents) {
      throw SchemaViolation("points", "entry has fewer than 5 points", line_no);
    }
    if (!(e.chord_length > 0.0)) throw SchemaViolation("chord_length", "must be > 0", line_no);
    db.entries.push_back(std::move(e));
  }
  return db;
}

ReferenceDB load_reference_db(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return read_reference_db(in);
}

// ---------------------------------------------------------------------------
// Config

void validate(const WrapperConfig& cfg) {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::InvalidConfig, msg); };
  const BSplineConfig& b = cfg.bspline;
  if (b.degree < 2) fail("bspline.degree must be >= 2");
  if (b.control_points < b.degree + 1) fail("bspline.control_points must be >= degree + 1");
  if (b.noise_sigma && !(*b.noise_sigma >= 0.0)) fail("bspline.noise_sigma must be >= 0");
  if (!(b.noise_fraction >= 0.0)) fail("bspline.noise_fraction must be >= 0");
  if (!(b.event_period_ms > 0.0)) fail("bspline.event_period_ms must be > 0");
  if (!(b.default_duration_ms > 0.0)) fail("bspline.default_duration_ms must be > 0");
  const HistoryConfig& h = cfg.history;
  if (!(h.ratio_lo > 0.0 && h.ratio_lo < h.ratio_hi)) fail("history ratio band needs 0 < lo < hi");
  if (!(h.angle_band_rad > 0.0)) fail("history.angle_band must be > 0");
  if (cfg.swipe_mode == SwipeMode::HistoryMatch && !h.db) {
    fail("swipe_mode = history needs a reference database");
  }
  const FakeActionConfig& f = cfg.fake;
  if (!(f.rate_hz > 0.0)) fail("fake.rate_hz must be > 0");
  if (!(f.radius_px > 0.0)) fail("fake.radius_px must be > 0");
  if (f.points < static_cast<int>(kSwipeMinEvents)) fail("fake.points must be >= 5");
  if (!(f.duration.median_ms > 0.0 && f.duration.log_sd >= 0.0)) {
    fail("fake duration model needs median > 0 and log_sd >= 0");
  }
  if (!(cfg.longpress.mean_s > 0.0)) fail("longpress.mean_s must be > 0");
  if (!(cfg.longpress.std_s >= 0.0)) fail("longpress.std_s must be >= 0");
}

namespace {

WrapperConfig parse_wrapper_config_impl(std::istream& in, const std::filesystem::path& base) {
  WrapperConfig cfg;
  for (const KeyValue& kv : parse_key_values(in)) {
    const std::string& k = kv.key;
    if (k == "swipe_mode") cfg.swipe_mode = parse_swipe_mode(kv.value);
    else if (k == "seed") cfg.seed = kv_u64(kv);
    else if (k == "bspline.degree") cfg.bspline.degree = kv_int(kv);
    else if (k == "bspline.control_points") cfg.bspline.control_points = kv_int(kv);
    else if (k == "bspline.noise_sigma") cfg.bspline.noise_sigma = kv_double(kv);
    else if (k == "bspline.noise_fraction") cfg.bspline.noise_fraction = kv_double(kv);
    else if (k == "bspline.event_period_ms") cfg.bspline.event_period_ms = kv_double(kv);
    else if (k == "bspline.default_duration_ms") cfg.bspline.default_duration_ms = kv_double(kv);
    else if (k == "history.db") cfg.history.db_path = kv.value;
    else if (k == "history.ratio_lo") cfg.history.ratio_lo = kv_double(kv);
    else if (k == "history.ratio_hi") cfg.history.ratio_hi = kv_double(kv);
    else if (k == "history.angle_band_deg") cfg.history.angle_band_rad = kv_double(kv) * kPi / 180.0;
    else if (k == "history.rescale_time") cfg.history.rescale_time = kv_bool(kv);
    else if (k == "fake.enabled") cfg.fake.enabled = kv_bool(kv);
    else if (k == "fake.rate_hz") cfg.fake.rate_hz = kv_double(kv);
    else if (k == "fake.radius_px") cfg.fake.radius_px = kv_double(kv);
    else if (k == "fake.points") cfg.fake.points = kv_int(kv);
    else if (k == "fake.duration_median_ms") cfg.fake.duration.median_ms = kv_double(kv);
    else if (k == "fake.duration_log_sd") cfg.fake.duration.log_sd = kv_double(kv);
    else if (k == "longpress.enabled") cfg.longpress.enabled = kv_bool(kv);
    else if (k == "longpress.mean_s") cfg.longpress.mean_s = kv_double(kv);
    else if (k == "longpress.std_s") cfg.longpress.std_s = kv_double(kv);
    else throw ParseError(kv.line_no, "unknown wrapper key \"" + k + "\"");
  }
  if (!cfg.history.db_path.empty()) {
    std::filesystem::path p = cfg.history.db_path;
    if (p.is_relative()) p = base / p;
    cfg.history.db = std::make_shared<const ReferenceDB>(load_reference_db(p));
  }
  validate(cfg);
  return cfg;
}

}  // namespace

WrapperConfig parse_wrapper_config(std::istream& in) {
  return parse_wrapper_config_impl(in, std::filesystem::current_path());
}

WrapperConfig load_wrapper_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return parse_wrapper_config_impl(in, path.parent_path());
}

std::string wrapper_config_to_string(const WrapperConfig& cfg) {
  std::ostringstream out;
  auto b = [](bool v) { return v ? "true" : "false"; };
  auto d = [](double v) { return format_double(v); };
  out << "swipe_mode = " << to_string(cfg.swipe_mode) << '\n'
      << "seed = " << cfg.seed << '\n'
      << "bspline.degree = " << cfg.bspline.degree << '\n'
      << "bspline.control_points = " << cfg.bspline.control_points << '\n';
  if (cfg.bspline.noise_sigma) out << "bspline.noise_sigma = " << d(*cfg.bspline.noise_sigma) << '\n';
  out << "bspline.noise_fraction = " << d(cfg.bspline.noise_fraction) << '\n'
      << "bspline.event_period_ms = " << d(cfg.bspline.event_period_ms) << '\n'
      << "bspline.default_duration_ms = " << d(cfg.bspline.default_duration_ms) << '\n';
  if (!cfg.history.db_path.empty()) out << "history.db = " << cfg.history.db_path << '\n';
  out << "history.ratio_lo = " << d(cfg.history.ratio_lo) << '\n'
      << "history.ratio_hi = " << d(cfg.history.ratio_hi) << '\n'
      << "history.angle_band_deg = " << d(cfg.history.angle_band_rad * 180.0 / kPi) << '\n'
      << "history.rescale_time = " << b(cfg.history.rescale_time) << '\n'
      << "fake.enabled = " << b(cfg.fake.enabled) << '\n'
      << "fake.rate_hz = " << d(cfg.fake.rate_hz) << '\n'
      << "fake.radius_px = " << d(cfg.fake.radius_px) << '\n'
      << "fake.points = " << cfg.fake.points << '\n'
      << "fake.duration_median_ms = " << d(cfg.fake.duration.median_ms) << '\n'
      << "fake.duration_log_sd = " << d(cfg.fake.duration.log_sd) << '\n'
      << "longpress.enabled = " << b(cfg.longpress.enabled) << '\n'
      << "longpress.mean_s = " << d(cfg.longpress.mean_s) << '\n'
      << "longpress.std_s = " << d(cfg.longpress.std_s) << '\n';
  return out.str();
}

// ---------------------------------------------------------------------------
// B-spline

Point bspline_point(std::span<const Point> control, int degree, double u) {
  const int n = static_cast<int>(control.size());
  const int p = degree;
  if (p < 1 || n < p + 1) throw Error(ErrorCode::InvalidConfig, "need degree + 1 control points");
  u = std::clamp(u, 0.0, 1.0);
  // Clamped uniform knots: p+1 zeros, n-p-1 interior knots, p+1 ones.
  const int segments = n - p;
  auto knot = [&](int i) -> double {
    if (i <= p) return 0.0;
    if (i >= n) return 1.0;
    return static_cast<double>(i - p) / segments;
  };
  int k = p + std::min(static_cast<int>(u * segments), segments - 1);
  // de Boor's recursion on the affected control points.
  std::vector<Point> d(control.begin() + (k - p), control.begin() + k + 1);
  for (int r = 1; r <= p; ++r) {
    for (int j = p; j >= r; --j) {
      const int i = j + k - p;
      const double denom = knot(i + p - r + 1) - knot(i);
      const double alpha = denom > 0.0 ? (u - knot(i)) / denom : 0.0;
      d[j].x = (1.0 - alpha) * d[j - 1].x + alpha * d[j].x;
      d[j].y = (1.0 - alpha) * d[j - 1].y + alpha * d[j].y;
    }
  }
  return d[p];
}

ActionTrace bspline_swipe(Point start, Point end, const BSplineConfig& cfg, Rng& rng,
                          std::optional<double> duration_ms) {
  const double dx = end.x - start.x, dy = end.y - start.y;
  const double chord = std::hypot(dx, dy);
  if (!(chord > 0.0)) throw Error(ErrorCode::DegenerateChord, "swipe start equals end");
  if (cfg.degree < 2 || cfg.control_points < cfg.degree + 1) {
    throw Error(ErrorCode::InvalidConfig, "bspline needs degree >= 2 and control_points >= degree + 1");
  }
  const double sigma = cfg.noise_sigma.value_or(cfg.noise_fraction * chord);
  const double nx = -dy / chord, ny = dx / chord;
  const int n = cfg.control_points;
  std::vector<Point> control(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double f = static_cast<double>(i) / (n - 1);
    const double off = (i == 0 || i == n - 1) ? 0.0 : rng.normal(0.0, sigma);
    control[static_cast<std::size_t>(i)] = {start.x + f * dx + off * nx, start.y + f * dy + off * ny};
  }
  const double duration = duration_ms.value_or(cfg.default_duration_ms);
  if (!(duration > 0.0)) throw Error(ErrorCode::InvalidConfig, "swipe duration must be > 0");
  const int events = std::max(static_cast<int>(kSwipeMinEvents),
                              static_cast<int>(std::lround(duration / cfg.event_period_ms)) + 1);
  ActionTrace trace;
  trace.kind = ActionKind::Swipe;
  trace.events.reserve(static_cast<std::size_t>(events));
  for (int k = 0; k < events; ++k) {
    const double s = static_cast<double>(k) / (events - 1);
    const double u = s * s * (3.0 - 2.0 * s);
    Point pt = k == 0 ? start : k == events - 1 ? end : bspline_point(control, cfg.degree, u);
    trace.events.push_back({pt.x, pt.y, duration * s});
  }
  return trace;
}

// ---------------------------------------------------------------------------
// History matching

ActionTrace map_reference(const ReferenceEntry& ref, Point start, Point end, bool rescale_time) {
  const double dx = end.x - start.x, dy = end.y - start.y;
  const double len = std::hypot(dx, dy);
  if (!(len > 0.0)) throw Error(ErrorCode::DegenerateChord, "swipe start equals end");
  const double s = len / ref.chord_length;
  const double theta = std::atan2(dy, dx) - ref.chord_angle;
  const double c = s * std::cos(theta), sn = s * std::sin(theta);
  const double time_scale = rescale_time ? s : 1.0;
  ActionTrace trace;
  trace.kind = ActionKind::Swipe;
  trace.events.reserve(ref.points.size());
  for (const FingerEvent& p : ref.points) {
    trace.events.push_back({start.x + c * p.x - sn * p.y, start.y + sn * p.x + c * p.y,
                            p.t_ms * time_scale});
  }
  trace.events.front().x = start.x;
  trace.events.front().y = start.y;
  trace.events.back().x = end.x;
  trace.events.back().y = end.y;
  return trace;
}

HistoryMatch history_match_swipe(Point start, Point end, const ReferenceDB& db,
                                 const HistoryConfig& cfg, Rng& rng) {
  if (db.entries.empty()) throw Error(ErrorCode::EmptyDB, "reference database is empty");
  const double dx = end.x - start.x, dy = end.y - start.y;
  const double len = std::hypot(dx, dy);
  if (!(len > 0.0)) throw Error(ErrorCode::DegenerateChord, "swipe start equals end");
  const double angle = std::atan2(dy, dx);

  std::vector<std::size_t> candidates;
  std::size_t nearest = 0;
  double nearest_dist = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < db.entries.size(); ++i) {
    const ReferenceEntry& e = db.entries[i];
    const double ratio = e.chord_length / len;
    const double dtheta = wrap_angle(e.chord_angle - angle);
    if (ratio >= cfg.ratio_lo && ratio <= cfg.ratio_hi && std::abs(dtheta) <= cfg.angle_band_rad) {
      candidates.push_back(i);
    }
    const double lr = std::log(ratio);
    const double dist = lr * lr + dtheta * dtheta;
    if (dist < nearest_dist) {
      nearest_dist = dist;
      nearest = i;
    }
  }
  HistoryMatch out;
  if (candidates.empty()) {
    out.entry = nearest;
    out.fallback = true;
  } else {
    out.entry = candidates[rng.index(candidates.size())];
  }
  out.trace = map_reference(db.entries[out.entry], start, end, cfg.rescale_time);
  return out;
}

// ---------------------------------------------------------------------------
// Taps and fake actions

double long_press_duration(const LongPressConfig& cfg, Rng& rng) {
  constexpr double kFloorMs = 10.0;
  const double mean_ms = cfg.mean_s * 1000.0, sd_ms = cfg.std_s * 1000.0;
  if (sd_ms == 0.0) return std::max(mean_ms, kFloorMs);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    const double d = rng.normal(mean_ms, sd_ms);
    if (d >= kFloorMs) return d;
  }
  return kFloorMs;
}

ActionTrace stretch_tap(const ActionTrace& tap, double duration_ms) {
  if (tap.events.empty()) throw Error(ErrorCode::EmptyTrace, "tap has no events");
  ActionTrace out = tap;
  if (out.events.size() == 1) out.events.push_back(out.events.front());
  const double t0 = out.events.front().t_ms;
  const auto m = static_cast<double>(out.events.size() - 1);
  for (std::size_t k = 0; k < out.events.size(); ++k) {
    out.events[k].t_ms = t0 + duration_ms * static_cast<double>(k) / m;
  }
  out.kind = classify_action(out.events);
  return out;
}

Session inject_fake_actions(const Session& session, const FakeActionConfig& cfg, Rng& rng) {
  if (!cfg.enabled || session.actions.size() < 2) return session;
  Session out = session;
  out.actions.clear();
  std::optional<Point> last_tap;
  const Point center{session.screen_w / 2.0, session.screen_h / 2.0};
  for (std::size_t i = 0; i < session.actions.size(); ++i) {
    const ActionTrace& a = session.actions[i];
    if (i > 0) {
      const double gap_start = session.actions[i - 1].events.back().t_ms;
      const double gap_s = (a.events.front().t_ms - gap_start) / 1000.0;
      std::vector<double> arrivals;
      for (double t = rng.exponential(cfg.rate_hz); t < gap_s; t += rng.exponential(cfg.rate_hz)) {
        arrivals.push_back(t);
      }
      const Point origin = last_tap.value_or(center);
      for (std::size_t j = 0; j < arrivals.size(); ++j) {
        const double next = j + 1 < arrivals.size() ? arrivals[j + 1] : gap_s;
        // Clipping keeps the arrival count exactly Poisson and leaves a gap
        // before the next action.
        const double dur = std::min(cfg.duration.sample(rng), 0.8 * (next - arrivals[j]) * 1000.0);
        const double phase = rng.uniform(0.0, 2.0 * kPi);
        ActionTrace fake;
        fake.kind = ActionKind::Swipe;
        fake.synthetic = true;
        const double t0 = gap_start + arrivals[j] * 1000.0;
        for (int k = 0; k < cfg.points; ++k) {
          const double ang = phase + 2.0 * kPi * k / cfg.points;
          fake.events.push_back({origin.x + cfg.radius_px * std::cos(ang),
                                 origin.y + cfg.radius_px * std::sin(ang),
                                 t0 + dur * k / (cfg.points - 1)});
        }
        clamp_to_screen(fake, session.screen_w, session.screen_h);
        out.actions.push_back(std::move(fake));
      }
    }
    out.actions.push_back(a);
    if (a.kind == ActionKind::Tap) last_tap = Point{a.events.front().x, a.events.front().y};
  }
  recompute_offsets(out);
  // Original offsets are recomputed too, but their events stay untouched.
  return out;
}

// ---------------------------------------------------------------------------
// Wrapper pipeline

Session humanize_session(const Session& session, const WrapperConfig& cfg) {
  validate(cfg);
  if (cfg.swipe_mode == SwipeMode::HistoryMatch && cfg.history.db->entries.empty()) {
    throw Error(ErrorCode::EmptyDB, "reference database is empty");
  }
  Rng rng = derive_rng(cfg.seed, "humanize", session.session_id);
  Session out = session;
  out.actor = Actor::Humanized;

  // Rebuild the timeline: each action keeps its original gap to the previous
  // one, so changed durations push later actions along.
  double drift = 0.0;
  bool changed = false;
  for (std::size_t i = 0; i < out.actions.size(); ++i) {
    const ActionTrace& orig = session.actions[i];
    ActionTrace next;
    bool regenerated = true;
    if (orig.kind == ActionKind::Swipe && cfg.swipe_mode != SwipeMode::None) {
      const Point s{orig.events.front().x, orig.events.front().y};
      const Point e{orig.events.back().x, orig.events.back().y};
      if (cfg.swipe_mode == SwipeMode::BSpline) {
        next = bspline_swipe(s, e, cfg.bspline, rng, orig.duration_ms());
      } else {
        next = history_match_swipe(s, e, *cfg.history.db, cfg.history, rng).trace;
      }
      clamp_to_screen(next, session.screen_w, session.screen_h);
    } else if (orig.kind == ActionKind::Tap && cfg.longpress.enabled) {
      next = stretch_tap(orig, long_press_duration(cfg.longpress, rng));
      shift_time(next, -orig.events.front().t_ms);
    } else {
      next = orig;
      regenerated = false;
    }
    if (regenerated) {
      next.synthetic = orig.synthetic;
      next.start_offset_ms = orig.start_offset_ms;
      shift_time(next, orig.events.front().t_ms + drift);
      changed = true;
    } else if (drift != 0.0) {
      shift_time(next, drift);
    }
    drift = next.events.back().t_ms - orig.events.back().t_ms;
    out.actions[i] = std::move(next);
  }
  if (changed) recompute_offsets(out);
  if (cfg.fake.enabled) out = inject_fake_actions(out, cfg.fake, rng);
  return out;
}

LabeledCorpus humanize_corpus(const LabeledCorpus& corpus, const WrapperConfig& cfg, int threads) {
  validate(cfg);
  LabeledCorpus out = corpus;
  const std::size_t n = corpus.sessions.size();
  const auto workers = static_cast<std::size_t>(std::max(1, threads));
  std::vector<std::exception_ptr> errors(workers);
  auto work = [&](std::size_t begin) {
    try {
      for (std::size_t i = begin; i < n; i += workers) {
        if (corpus.sessions[i].actor == Actor::Agent) {
          out.sessions[i] = humanize_session(corpus.sessions[i], cfg);
        }
      }
    } catch (...) {
      errors[begin] = std::current_exception();
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace touchbench
