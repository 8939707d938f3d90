#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace touchbench {

using Json = nlohmann::ordered_json;

// One touch sample. Coordinates in raw pixels, time in ms since session start.
struct FingerEvent {
  double x = 0.0;
  double y = 0.0;
  double t_ms = 0.0;

  bool operator==(const FingerEvent&) const = default;
};

struct Point {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Point&) const = default;
};

enum class ActionKind { Tap, Swipe };
enum class Actor { Human, Agent, Humanized };
enum class Split { Train, Test };
enum class SensorKind { Accel, Gyro, RotVec, Grav, LinAcc, Mag, Light, Prox };

std::string_view to_string(ActionKind kind);
std::string_view to_string(Actor actor);
std::string_view to_string(Split split);
std::string_view to_string(SensorKind kind);
ActionKind parse_action_kind(std::string_view s);
Actor parse_actor(std::string_view s);
Split parse_split(std::string_view s);
SensorKind parse_sensor_kind(std::string_view s);

// Light and Prox are scalar; the motion sensors are 3-vectors.
std::size_t sensor_arity(SensorKind kind);

struct SensorSample {
  SensorKind kind = SensorKind::Accel;
  double t_ms = 0.0;
  std::vector<double> values;

  bool operator==(const SensorSample&) const = default;
};

// Fewer than 5 finger events is a tap, otherwise a swipe.
inline constexpr std::size_t kSwipeMinEvents = 5;

struct ActionTrace {
  ActionKind kind = ActionKind::Tap;
  // Gap since the previous action's last event; absent for the first action.
  std::optional<double> start_offset_ms;
  std::vector<FingerEvent> events;
  // Set on micro-gestures injected by the humanization wrapper.
  bool synthetic = false;

  double duration_ms() const { return events.back().t_ms - events.front().t_ms; }
  Point start() const { return {events.front().x, events.front().y}; }
  Point end() const { return {events.back().x, events.back().y}; }

  bool operator==(const ActionTrace&) const = default;
};

struct Session {
  std::string session_id;
  Actor actor = Actor::Human;
  std::string source;
  int cluster = 0;
  int screen_w = 0;
  int screen_h = 0;
  std::vector<ActionTrace> actions;
  std::vector<SensorSample> sensors;
  // Unknown top-level keys, kept in their original order for round-trips.
  Json extra = Json::object();

  bool operator==(const Session&) const = default;
};

struct LabeledCorpus {
  std::vector<Session> sessions;
  // Empty when the corpus has not been split yet.
  std::map<std::string, Split> split;

  bool operator==(const LabeledCorpus&) const = default;
};

ActionKind classify_action(std::span<const FingerEvent> events);

// Throws SchemaViolation on the first broken invariant.
void validate_session(const Session& session, std::size_t line_no = 0);
void validate_corpus(const LabeledCorpus& corpus);

LabeledCorpus ingest_jsonl(const std::filesystem::path& path);
LabeledCorpus read_jsonl(std::istream& in);
void emit_jsonl(const LabeledCorpus& corpus, const std::filesystem::path& path);
void write_jsonl(const LabeledCorpus& corpus, std::ostream& out);

Session session_from_json(const Json& record, std::size_t line_no = 0);
Json session_to_json(const Session& session, std::optional<Split> split = std::nullopt);

// Inter-action gaps in seconds for actions 2..n.
std::vector<double> action_intervals(const Session& session);

// Recomputes start_offset_ms from the absolute event times.
void recompute_offsets(Session& session);

// Stratified by (actor, cluster); deterministic for a given seed.
std::map<std::string, Split> stratified_split(const std::vector<Session>& sessions,
                                              double train_fraction, std::uint64_t seed);

// Drops earlier samples sharing a timestamp, keeping the last one.
std::vector<FingerEvent> collapse_time_ties(std::span<const FingerEvent> events);

inline bool is_human(Actor a) { return a == Actor::Human; }

// Field mapping for converting foreign session dumps (one JSON object per
// line) into the canonical model. Every key name is configurable.
struct FieldMapping {
  std::string session_id = "session_id";
  std::string actor = "actor";
  std::string source = "source";
  std::string cluster = "cluster";
  std::string screen_w = "screen_w";
  std::string screen_h = "screen_h";
  std::string actions = "actions";
  std::string events = "events";
  std::string x = "x";
  std::string y = "y";
  std::string t = "t";
  // Multiplier from the source time unit to milliseconds.
  double time_scale_ms = 1.0;
  int default_screen_w = 1080;
  int default_screen_h = 1920;
  int default_cluster = 0;
  std::vector<std::string> human_labels{"human"};
  std::vector<std::string> humanized_labels{"humanized"};
};

// Parses `key = value` lines; list values are comma separated.
FieldMapping load_field_mapping(const std::filesystem::path& path);
FieldMapping parse_field_mapping(std::istream& in);

// Rebases time to the first event, recomputes kinds and offsets, clamps
// nothing: out-of-bounds coordinates are a SchemaViolation.
LabeledCorpus convert_records(std::istream& in, const FieldMapping& mapping);

}  // namespace touchbench
