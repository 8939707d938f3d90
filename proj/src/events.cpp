#include "touchbench/events.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "touchbench/error.hpp"
#include "touchbench/rng.hpp"

namespace touchbench {

std::string_view to_string(ActionKind kind) {
  return kind == ActionKind::Tap ? "tap" : "swipe";
}

std::string_view to_string(Actor actor) {
  switch (actor) {
    case Actor::Human: return "human";
    case Actor::Agent: return "agent";
    case Actor::Humanized: return "humanized";
  }
  return "?";
}

std::string_view to_string(Split split) {
  return split == Split::Train ? "train" : "test";
}

namespace {

constexpr std::string_view kSensorNames[] = {"Accel", "Gyro", "RotVec", "Grav",
                                             "LinAcc", "Mag", "Light", "Prox"};

}  // namespace

std::string_view to_string(SensorKind kind) { return kSensorNames[static_cast<int>(kind)]; }

ActionKind parse_action_kind(std::string_view s) {
  if (s == "tap") return ActionKind::Tap;
  if (s == "swipe") return ActionKind::Swipe;
  throw SchemaViolation("kind", "expected \"tap\" or \"swipe\", got \"" + std::string(s) + "\"");
}

Actor parse_actor(std::string_view s) {
  if (s == "human") return Actor::Human;
  if (s == "agent") return Actor::Agent;
  if (s == "humanized") return Actor::Humanized;
  throw SchemaViolation("actor", "unknown actor \"" + std::string(s) + "\"");
}

Split parse_split(std::string_view s) {
  if (s == "train") return Split::Train;
  if (s == "test") return Split::Test;
  throw SchemaViolation("split", "expected \"train\" or \"test\", got \"" + std::string(s) + "\"");
}

SensorKind parse_sensor_kind(std::string_view s) {
  for (std::size_t i = 0; i < std::size(kSensorNames); ++i) {
    if (kSensorNames[i] == s) return static_cast<SensorKind>(i);
  }
  throw SchemaViolation("sensors.kind", "unknown sensor kind \"" + std::string(s) + "\"");
}

std::size_t sensor_arity(SensorKind kind) {
  return (kind == SensorKind::Light || kind == SensorKind::Prox) ? 1 : 3;
}

ActionKind classify_action(std::span<const FingerEvent> events) {
  if (events.empty()) throw Error(ErrorCode::EmptyTrace, "action has no finger events");
  for (std::size_t i = 1; i < events.size(); ++i) {
    if (events[i].t_ms < events[i - 1].t_ms) {
      throw Error(ErrorCode::NonMonotonicTime,
                  "t_ms decreases at event " + std::to_string(i));
    }
  }
  return events.size() < kSwipeMinEvents ? ActionKind::Tap : ActionKind::Swipe;
}

void validate_session(const Session& s, std::size_t line_no) {
  if (s.session_id.empty()) throw SchemaViolation("session_id", "must be non-empty", line_no);
  if (s.cluster < 0 || s.cluster > 4) {
    throw SchemaViolation("cluster", "must be in 0..4, got " + std::to_string(s.cluster), line_no);
  }
  if (s.screen_w <= 0 || s.screen_h <= 0) {
    throw SchemaViolation("screen_w/screen_h", "screen dimensions must be positive", line_no);
  }
  double prev_end = -1.0;
  for (std::size_t i = 0; i < s.actions.size(); ++i) {
    const ActionTrace& a = s.actions[i];
    const std::string where = "actions[" + std::to_string(i) + "]";
    if (a.events.empty()) throw SchemaViolation(where + ".events", "must be non-empty", line_no);
    for (std::size_t k = 0; k < a.events.size(); ++k) {
      const FingerEvent& e = a.events[k];
      if (!std::isfinite(e.x) || !std::isfinite(e.y) || !std::isfinite(e.t_ms)) {
        throw SchemaViolation(where + ".events", "non-finite value", line_no);
      }
      if (e.x < 0.0 || e.y < 0.0 || e.x > s.screen_w || e.y > s.screen_h) {
        std::ostringstream msg;
        msg << "point (" << e.x << ", " << e.y << ") outside screen " << s.screen_w << "x"
            << s.screen_h;
        throw SchemaViolation(where + ".events", msg.str(), line_no);
      }
      if (e.t_ms < 0.0) throw SchemaViolation(where + ".events.t_ms", "negative time", line_no);
      if (k > 0 && e.t_ms < a.events[k - 1].t_ms) {
        throw ParseError(line_no, where + ": t_ms decreases at event " + std::to_string(k));
      }
    }
    if (a.events.front().t_ms < prev_end) {
      throw ParseError(line_no, where + ": starts before the previous action ends");
    }
    prev_end = a.events.back().t_ms;
    const ActionKind expected = classify_action(a.events);
    if (a.kind != expected) {
      throw SchemaViolation(where + ".kind",
                            "stored \"" + std::string(to_string(a.kind)) + "\" but " +
                                std::to_string(a.events.size()) + " events make it a " +
                                std::string(to_string(expected)),
                            line_no);
    }
    if (i == 0 && a.start_offset_ms) {
      throw SchemaViolation(where + ".start_offset_ms", "must be null for the first action",
                            line_no);
    }
    if (i > 0) {
      if (!a.start_offset_ms) {
        throw SchemaViolation(where + ".start_offset_ms", "required after the first action",
                              line_no);
      }
      if (!(*a.start_offset_ms >= 0.0) || !std::isfinite(*a.start_offset_ms)) {
        throw SchemaViolation(where + ".start_offset_ms", "must be a finite value >= 0", line_no);
      }
    }
  }
  for (std::size_t i = 0; i < s.sensors.size(); ++i) {
    const SensorSample& smp = s.sensors[i];
    if (smp.values.size() != sensor_arity(smp.kind)) {
      throw SchemaViolation("sensors[" + std::to_string(i) + "].values",
                            "arity " + std::to_string(smp.values.size()) + " does not match " +
                                std::string(to_string(smp.kind)),
                            line_no);
    }
  }
}

void validate_corpus(const LabeledCorpus& corpus) {
  std::map<std::string, int> seen;
  for (const Session& s : corpus.sessions) {
    validate_session(s);
    if (++seen[s.session_id] > 1) {
      throw SchemaViolation("session_id", "duplicate id \"" + s.session_id + "\"");
    }
  }
  if (!corpus.split.empty()) {
    if (corpus.split.size() != corpus.sessions.size()) {
      throw SchemaViolation("split", "every session must appear exactly once in the split");
    }
    for (const Session& s : corpus.sessions) {
      if (!corpus.split.count(s.session_id)) {
        throw SchemaViolation("split", "session \"" + s.session_id + "\" has no split");
      }
    }
  }
}

namespace {

std::string dump_value(const Json& v) { return v.dump(); }

double require_number(const Json& obj, const char* key, const std::string& where,
                      std::size_t line_no) {
  auto it = obj.find(key);
  if (it == obj.end()) throw SchemaViolation(where + "." + key, "missing", line_no);
  if (!it->is_number()) {
    throw SchemaViolation(where + "." + key, "expected number, got " + dump_value(*it), line_no);
  }
  return it->get<double>();
}

int require_int(const Json& obj, const char* key, std::size_t line_no) {
  auto it = obj.find(key);
  if (it == obj.end()) throw SchemaViolation(key, "missing", line_no);
  if (!it->is_number_integer()) {
    throw SchemaViolation(key, "expected integer, got " + dump_value(*it), line_no);
  }
  return it->get<int>();
}

std::string require_string(const Json& obj, const char* key, std::size_t line_no) {
  auto it = obj.find(key);
  if (it == obj.end()) throw SchemaViolation(key, "missing", line_no);
  if (!it->is_string()) {
    throw SchemaViolation(key, "expected string, got " + dump_value(*it), line_no);
  }
  return it->get<std::string>();
}

void reject_unknown_keys(const Json& obj, std::initializer_list<std::string_view> allowed,
                         const std::string& where, std::size_t line_no) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end()) {
      throw SchemaViolation(where + "." + it.key(), "unknown key", line_no);
    }
  }
}

constexpr std::array<std::string_view, 9> kTopLevelKeys = {
    "session_id", "actor", "source", "cluster", "screen_w",
    "screen_h",   "actions", "sensors", "split"};

}  // namespace

Session session_from_json(const Json& rec, std::size_t line_no) {
  if (!rec.is_object()) throw ParseError(line_no, "record is not a JSON object");
  Session s;
  s.session_id = require_string(rec, "session_id", line_no);
  try {
    s.actor = parse_actor(require_string(rec, "actor", line_no));
  } catch (const SchemaViolation& e) {
    if (e.line_no() != 0) throw;
    throw SchemaViolation("actor", rec.at("actor").dump() + " is not a known actor", line_no);
  }
  s.source = require_string(rec, "source", line_no);
  s.cluster = require_int(rec, "cluster", line_no);
  s.screen_w = require_int(rec, "screen_w", line_no);
  s.screen_h = require_int(rec, "screen_h", line_no);

  auto acts = rec.find("actions");
  if (acts == rec.end() || !acts->is_array()) {
    throw SchemaViolation("actions", "missing or not an array", line_no);
  }
  for (std::size_t i = 0; i < acts->size(); ++i) {
    const Json& ja = (*acts)[i];
    const std::string where = "actions[" + std::to_string(i) + "]";
    if (!ja.is_object()) throw SchemaViolation(where, "expected object", line_no);
    reject_unknown_keys(ja, {"kind", "start_offset_ms", "events", "synthetic"}, where, line_no);
    ActionTrace a;
    auto kind = ja.find("kind");
    if (kind == ja.end() || !kind->is_string()) {
      throw SchemaViolation(where + ".kind", "missing or not a string", line_no);
    }
    try {
      a.kind = parse_action_kind(kind->get<std::string>());
    } catch (const SchemaViolation&) {
      throw SchemaViolation(where + ".kind", kind->dump() + " is not tap/swipe", line_no);
    }
    auto off = ja.find("start_offset_ms");
    if (off != ja.end() && !off->is_null()) {
      if (!off->is_number()) {
        throw SchemaViolation(where + ".start_offset_ms", "expected number or null, got " +
                                                              off->dump(),
                              line_no);
      }
      a.start_offset_ms = off->get<double>();
    }
    auto syn = ja.find("synthetic");
    if (syn != ja.end()) {
      if (!syn->is_boolean()) {
        throw SchemaViolation(where + ".synthetic", "expected boolean", line_no);
      }
      a.synthetic = syn->get<bool>();
    }
    auto evs = ja.find("events");
    if (evs == ja.end() || !evs->is_array()) {
      throw SchemaViolation(where + ".events", "missing or not an array", line_no);
    }
    a.events.reserve(evs->size());
    for (const Json& je : *evs) {
      if (!je.is_object()) throw SchemaViolation(where + ".events", "expected object", line_no);
      reject_unknown_keys(je, {"x", "y", "t_ms"}, where + ".events", line_no);
      a.events.push_back({require_number(je, "x", where, line_no),
                          require_number(je, "y", where, line_no),
                          require_number(je, "t_ms", where, line_no)});
    }
    s.actions.push_back(std::move(a));
  }

  auto sens = rec.find("sensors");
  if (sens != rec.end()) {
    if (!sens->is_array()) throw SchemaViolation("sensors", "expected array", line_no);
    for (std::size_t i = 0; i < sens->size(); ++i) {
      const Json& js = (*sens)[i];
      const std::string where = "sensors[" + std::to_string(i) + "]";
      if (!js.is_object()) throw SchemaViolation(where, "expected object", line_no);
      reject_unknown_keys(js, {"kind", "t_ms", "values"}, where, line_no);
      SensorSample smp;
      auto kind = js.find("kind");
      if (kind == js.end() || !kind->is_string()) {
        throw SchemaViolation(where + ".kind", "missing or not a string", line_no);
      }
      try {
        smp.kind = parse_sensor_kind(kind->get<std::string>());
      } catch (const SchemaViolation&) {
        throw SchemaViolation(where + ".kind", kind->dump() + " is not a sensor kind", line_no);
      }
      smp.t_ms = require_number(js, "t_ms", where, line_no);
      auto vals = js.find("values");
      if (vals == js.end() || !vals->is_array()) {
        throw SchemaViolation(where + ".values", "missing or not an array", line_no);
      }
      for (const Json& v : *vals) {
        if (!v.is_number()) throw SchemaViolation(where + ".values", v.dump(), line_no);
        smp.values.push_back(v.get<double>());
      }
      s.sensors.push_back(std::move(smp));
    }
  }

  for (auto it = rec.begin(); it != rec.end(); ++it) {
    if (std::find(kTopLevelKeys.begin(), kTopLevelKeys.end(), it.key()) == kTopLevelKeys.end()) {
      s.extra[it.key()] = it.value();
    }
  }

  validate_session(s, line_no);
  return s;
}

Json session_to_json(const Session& s, std::optional<Split> split) {
  Json rec = Json::object();
  rec["session_id"] = s.session_id;
  rec["actor"] = std::string(to_string(s.actor));
  rec["source"] = s.source;
  rec["cluster"] = s.cluster;
  rec["screen_w"] = s.screen_w;
  rec["screen_h"] = s.screen_h;
  if (split) rec["split"] = std::string(to_string(*split));
  Json acts = Json::array();
  for (const ActionTrace& a : s.actions) {
    Json ja = Json::object();
    ja["kind"] = std::string(to_string(a.kind));
    ja["start_offset_ms"] = a.start_offset_ms ? Json(*a.start_offset_ms) : Json(nullptr);
    if (a.synthetic) ja["synthetic"] = true;
    Json evs = Json::array();
    for (const FingerEvent& e : a.events) {
      Json je = Json::object();
      je["x"] = e.x;
      je["y"] = e.y;
      je["t_ms"] = e.t_ms;
      evs.push_back(std::move(je));
    }
    ja["events"] = std::move(evs);
    acts.push_back(std::move(ja));
  }
  rec["actions"] = std::move(acts);
  Json sens = Json::array();
  for (const SensorSample& smp : s.sensors) {
    Json js = Json::object();
    js["kind"] = std::string(to_string(smp.kind));
    js["t_ms"] = smp.t_ms;
    js["values"] = smp.values;
    sens.push_back(std::move(js));
  }
  rec["sensors"] = std::move(sens);
  for (auto it = s.extra.begin(); it != s.extra.end(); ++it) rec[it.key()] = it.value();
  return rec;
}

LabeledCorpus read_jsonl(std::istream& in) {
  LabeledCorpus corpus;
  std::string line;
  std::size_t line_no = 0;
  std::size_t with_split = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Json rec;
    try {
      rec = Json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(line_no, e.what());
    }
    Session s = session_from_json(rec, line_no);
    auto sp = rec.find("split");
    if (sp != rec.end()) {
      if (!sp->is_string()) throw SchemaViolation("split", sp->dump(), line_no);
      try {
        corpus.split[s.session_id] = parse_split(sp->get<std::string>());
      } catch (const SchemaViolation&) {
        throw SchemaViolation("split", sp->dump() + " is not train/test", line_no);
      }
      ++with_split;
    }
    for (const Session& prior : corpus.sessions) {
      if (prior.session_id == s.session_id) {
        throw SchemaViolation("session_id", "duplicate id \"" + s.session_id + "\"", line_no);
      }
    }
    corpus.sessions.push_back(std::move(s));
  }
  if (with_split != 0 && with_split != corpus.sessions.size()) {
    throw SchemaViolation("split", "present on some records but not all");
  }
  return corpus;
}

LabeledCorpus ingest_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return read_jsonl(in);
}

void write_jsonl(const LabeledCorpus& corpus, std::ostream& out) {
  for (const Session& s : corpus.sessions) {
    std::optional<Split> split;
    if (auto it = corpus.split.find(s.session_id); it != corpus.split.end()) split = it->second;
    out << session_to_json(s, split).dump() << '\n';
  }
}

void emit_jsonl(const LabeledCorpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  write_jsonl(corpus, out);
  out.flush();
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

std::vector<double> action_intervals(const Session& session) {
  if (session.actions.size() < 2) {
    throw Error(ErrorCode::TooFewActions, "session " + session.session_id +
                                              " needs at least 2 actions for intervals");
  }
  std::vector<double> out;
  out.reserve(session.actions.size() - 1);
  for (std::size_t i = 1; i < session.actions.size(); ++i) {
    out.push_back(session.actions[i].start_offset_ms.value_or(0.0) / 1000.0);
  }
  return out;
}

void recompute_offsets(Session& session) {
  for (std::size_t i = 0; i < session.actions.size(); ++i) {
    if (i == 0) {
      session.actions[i].start_offset_ms.reset();
    } else {
      const double gap =
          session.actions[i].events.front().t_ms - session.actions[i - 1].events.back().t_ms;
      session.actions[i].start_offset_ms = std::max(0.0, gap);
    }
  }
}

std::map<std::string, Split> stratified_split(const std::vector<Session>& sessions,
                                              double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "train fraction must be in (0, 1)");
  }
  std::map<std::pair<int, int>, std::vector<std::string>> strata;
  for (const Session& s : sessions) {
    strata[{static_cast<int>(s.actor), s.cluster}].push_back(s.session_id);
  }
  std::map<std::string, Split> out;
  for (auto& [key, ids] : strata) {
    std::sort(ids.begin(), ids.end());
    Rng rng = derive_rng(seed, "split",
                         std::to_string(key.first) + ":" + std::to_string(key.second));
    for (std::size_t i = ids.size(); i > 1; --i) {
      std::swap(ids[i - 1], ids[rng.index(i)]);
    }
    std::size_t n_train = static_cast<std::size_t>(std::llround(train_fraction * ids.size()));
    // Keep both sides populated whenever the stratum allows it.
    if (ids.size() >= 2) n_train = std::clamp<std::size_t>(n_train, 1, ids.size() - 1);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      out[ids[i]] = i < n_train ? Split::Train : Split::Test;
    }
  }
  return out;
}

std::vector<FingerEvent> collapse_time_ties(std::span<const FingerEvent> events) {
  std::vector<FingerEvent> out;
  out.reserve(events.size());
  for (const FingerEvent& e : events) {
    if (!out.empty() && out.back().t_ms == e.t_ms) {
      out.back() = e;
    } else {
      out.push_back(e);
    }
  }
  return out;
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\"");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\"");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const auto comma = s.find(',', pos);
    const auto piece = s.substr(pos, comma == std::string_view::npos ? s.npos : comma - pos);
    if (auto t = trim(piece); !t.empty()) out.push_back(t);
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

}  // namespace

FieldMapping parse_field_mapping(std::istream& in) {
  FieldMapping m;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.erase(hash);
    if (trim(line).empty() || trim(line).front() == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(line_no, "expected key = value");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    try {
      if (key == "session_id") m.session_id = value;
      else if (key == "actor") m.actor = value;
      else if (key == "source") m.source = value;
      else if (key == "cluster") m.cluster = value;
      else if (key == "screen_w") m.screen_w = value;
      else if (key == "screen_h") m.screen_h = value;
      else if (key == "actions") m.actions = value;
      else if (key == "events") m.events = value;
      else if (key == "x") m.x = value;
      else if (key == "y") m.y = value;
      else if (key == "t") m.t = value;
      else if (key == "time_scale_ms") m.time_scale_ms = std::stod(value);
      else if (key == "default_screen_w") m.default_screen_w = std::stoi(value);
      else if (key == "default_screen_h") m.default_screen_h = std::stoi(value);
      else if (key == "default_cluster") m.default_cluster = std::stoi(value);
      else if (key == "human_labels") m.human_labels = split_list(value);
      else if (key == "humanized_labels") m.humanized_labels = split_list(value);
      else throw ParseError(line_no, "unknown mapping key \"" + key + "\"");
    } catch (const std::logic_error&) {
      throw ParseError(line_no, "bad numeric value for \"" + key + "\"");
    }
  }
  return m;
}

FieldMapping load_field_mapping(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return parse_field_mapping(in);
}

LabeledCorpus convert_records(std::istream& in, const FieldMapping& m) {
  LabeledCorpus corpus;
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
    if (!rec.is_object()) throw ParseError(line_no, "record is not a JSON object");
    auto get_str = [&](const std::string& key) -> std::string {
      auto it = rec.find(key);
      if (it == rec.end()) throw SchemaViolation(key, "missing", line_no);
      return it->is_string() ? it->get<std::string>() : it->dump();
    };
    auto get_int = [&](const std::string& key, int fallback) {
      auto it = rec.find(key);
      if (it == rec.end()) return fallback;
      if (!it->is_number()) throw SchemaViolation(key, it->dump(), line_no);
      return static_cast<int>(it->get<double>());
    };

    Session s;
    s.session_id = get_str(m.session_id);
    const std::string label = get_str(m.actor);
    auto contains = [](const std::vector<std::string>& v, const std::string& x) {
      return std::find(v.begin(), v.end(), x) != v.end();
    };
    s.actor = contains(m.human_labels, label)       ? Actor::Human
              : contains(m.humanized_labels, label) ? Actor::Humanized
                                                    : Actor::Agent;
    s.source = rec.contains(m.source) ? get_str(m.source) : label;
    s.cluster = get_int(m.cluster, m.default_cluster);
    s.screen_w = get_int(m.screen_w, m.default_screen_w);
    s.screen_h = get_int(m.screen_h, m.default_screen_h);

    auto acts = rec.find(m.actions);
    if (acts == rec.end() || !acts->is_array()) {
      throw SchemaViolation(m.actions, "missing or not an array", line_no);
    }
    double t0 = 0.0;
    bool have_t0 = false;
    for (const Json& ja : *acts) {
      const Json* evs = &ja;
      if (ja.is_object()) {
        auto it = ja.find(m.events);
        if (it == ja.end()) throw SchemaViolation(m.events, "missing in action", line_no);
        evs = &*it;
      }
      if (!evs->is_array()) throw SchemaViolation(m.events, "not an array", line_no);
      ActionTrace a;
      for (const Json& je : *evs) {
        if (!je.is_object() || !je.contains(m.x) || !je.contains(m.y) || !je.contains(m.t)) {
          throw SchemaViolation(m.events, "event lacks " + m.x + "/" + m.y + "/" + m.t, line_no);
        }
        const double t = je.at(m.t).get<double>() * m.time_scale_ms;
        if (!have_t0) {
          t0 = t;
          have_t0 = true;
        }
        a.events.push_back({je.at(m.x).get<double>(), je.at(m.y).get<double>(), t - t0});
      }
      if (a.events.empty()) continue;
      try {
        a.kind = classify_action(a.events);
      } catch (const Error& e) {
        throw ParseError(line_no, e.what());
      }
      s.actions.push_back(std::move(a));
    }
    recompute_offsets(s);
    validate_session(s, line_no);
    corpus.sessions.push_back(std::move(s));
  }
  return corpus;
}

}  // namespace touchbench
