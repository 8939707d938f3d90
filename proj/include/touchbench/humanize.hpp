#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "touchbench/events.hpp"
#include "touchbench/rng.hpp"

namespace touchbench {

enum class SwipeMode { None, BSpline, HistoryMatch };

std::string_view to_string(SwipeMode mode);
SwipeMode parse_swipe_mode(std::string_view s);

// Log-normal swipe durations; shared by the human generator and by the fake
// actions, which should look like ordinary human swipes.
struct SwipeDurationModel {
  double median_ms = 280.0;
  double log_sd = 0.35;

  double sample(Rng& rng) const;
};

struct BSplineConfig {
  int degree = 3;
  int control_points = 6;
  // Perpendicular noise in px; when unset, noise_fraction * chord length.
  std::optional<double> noise_sigma;
  double noise_fraction = 0.04;
  double event_period_ms = 8.0;
  // Used when the caller has no original duration to keep.
  double default_duration_ms = 300.0;
};

struct ReferenceEntry {
  double chord_length = 0.0;
  double chord_angle = 0.0;
  // Relative to the first event: positions in px, times in ms.
  std::vector<FingerEvent> points;

  bool operator==(const ReferenceEntry&) const = default;
};

struct ReferenceDB {
  std::vector<ReferenceEntry> entries;

  bool operator==(const ReferenceDB&) const = default;
};

// Normalizes a swipe into a reference entry. Throws NotASwipe or
// DegenerateChord.
ReferenceEntry make_reference_entry(const ActionTrace& swipe);

void write_reference_db(const ReferenceDB& db, std::ostream& out);
void save_reference_db(const ReferenceDB& db, const std::filesystem::path& path);
ReferenceDB read_reference_db(std::istream& in);
ReferenceDB load_reference_db(const std::filesystem::path& path);

struct HistoryConfig {
  std::shared_ptr<const ReferenceDB> db;
  std::string db_path;  // only used for config round-trips
  double ratio_lo = 0.5;
  double ratio_hi = 2.0;
  double angle_band_rad = 0.7853981633974483;  // 45 degrees
  // Scale reference timestamps by the chord ratio instead of copying them.
  bool rescale_time = false;
};

struct FakeActionConfig {
  bool enabled = false;
  double rate_hz = 0.9;
  double radius_px = 50.0;
  int points = 12;
  SwipeDurationModel duration;
};

struct LongPressConfig {
  bool enabled = false;
  double mean_s = 0.075;
  double std_s = 0.015;
};

struct WrapperConfig {
  SwipeMode swipe_mode = SwipeMode::None;
  BSplineConfig bspline;
  HistoryConfig history;
  FakeActionConfig fake;
  LongPressConfig longpress;
  std::uint64_t seed = 0;
};

// Throws InvalidConfig on the first violated constraint.
void validate(const WrapperConfig& cfg);

// Key-value form (`swipe_mode = history`, `bspline.degree = 3`, ...). The
// history database is loaded from `history.db` when present.
WrapperConfig parse_wrapper_config(std::istream& in);
WrapperConfig load_wrapper_config(const std::filesystem::path& path);
std::string wrapper_config_to_string(const WrapperConfig& cfg);

// Clamped uniform B-spline through perturbed chord points, sampled with a
// smoothstep time warp. Times start at 0.
ActionTrace bspline_swipe(Point start, Point end, const BSplineConfig& cfg, Rng& rng,
                          std::optional<double> duration_ms = std::nullopt);

// Evaluates the clamped uniform B-spline of the given degree at u in [0, 1].
Point bspline_point(std::span<const Point> control, int degree, double u);

struct HistoryMatch {
  ActionTrace trace;
  std::size_t entry = 0;
  bool fallback = false;  // no entry fell inside the candidate bands
};

HistoryMatch history_match_swipe(Point start, Point end, const ReferenceDB& db,
                                 const HistoryConfig& cfg, Rng& rng);

// Maps one reference entry onto the task chord. Times start at 0.
ActionTrace map_reference(const ReferenceEntry& ref, Point start, Point end,
                          bool rescale_time = false);

// Gaussian tap duration in ms, truncated below at 10 ms by resampling.
double long_press_duration(const LongPressConfig& cfg, Rng& rng);

// Re-times a tap to the given duration; a single-event tap gets its point
// duplicated.
ActionTrace stretch_tap(const ActionTrace& tap, double duration_ms);

Session inject_fake_actions(const Session& session, const FakeActionConfig& cfg, Rng& rng);

// Agent session to Humanized session. The random stream is derived from
// (cfg.seed, session_id) so results do not depend on processing order.
Session humanize_session(const Session& session, const WrapperConfig& cfg);

LabeledCorpus humanize_corpus(const LabeledCorpus& corpus, const WrapperConfig& cfg,
                              int threads = 1);

}  // namespace touchbench
