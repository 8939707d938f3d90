#include "touchbench/bench.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "touchbench/error.hpp"
#include "touchbench/numeric.hpp"
#include "touchbench/rng.hpp"

namespace touchbench {

namespace {

std::vector<std::string> split_plus(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto plus = s.find('+', start);
    out.emplace_back(s.substr(start, plus == std::string_view::npos ? s.npos : plus - start));
    if (plus == std::string_view::npos) break;
    start = plus + 1;
  }
  return out;
}

}  // namespace

BenchMode make_mode(std::string_view name, std::shared_ptr<const ReferenceDB> db,
                    std::uint64_t seed) {
  BenchMode m;
  m.name = std::string(name);
  m.wrapper.seed = derive_seed(seed, "mode", name);
  for (const std::string& part : split_plus(name)) {
    if (part == "raw" || part == "RAW") {
      continue;
    } else if (part == "bspline") {
      m.wrapper.swipe_mode = SwipeMode::BSpline;
    } else if (part == "history") {
      m.wrapper.swipe_mode = SwipeMode::HistoryMatch;
      m.wrapper.history.db = db;
    } else if (part == "fake") {
      m.wrapper.fake.enabled = true;
    } else if (part == "long") {
      m.wrapper.longpress.enabled = true;
    } else if (part == "online") {
      m.online_latency_s = std::pair{5.0, 10.0};
    } else {
      throw Error(ErrorCode::InvalidConfig,
                  "unknown mode component \"" + part + "\" (raw|bspline|history|fake|long|online)");
    }
  }
  if (m.wrapper.swipe_mode == SwipeMode::HistoryMatch && !db) {
    throw Error(ErrorCode::InvalidConfig, "mode \"" + m.name + "\" needs a reference database");
  }
  return m;
}

std::vector<BenchMode> default_modes(std::shared_ptr<const ReferenceDB> db, std::uint64_t seed) {
  std::vector<BenchMode> modes;
  for (const char* name : {"RAW", "bspline", "history", "history+fake+long"}) {
    modes.push_back(make_mode(name, db, seed));
  }
  return modes;
}

UtilityAnnotation load_utility(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(0, e.what());
  }
  UtilityAnnotation out;
  try {
    if (doc.is_object()) {
      for (const auto& [k, v] : doc.items()) out[k] = v.get<bool>();
    } else if (doc.is_array()) {
      for (const Json& rec : doc) out[rec.at("session_id").get<std::string>()] = rec.at("task_success").get<bool>();
    } else {
      throw SchemaViolation("utility", "expected an object or an array");
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaViolation("utility", e.what());
  }
  return out;
}

const BenchRow* BenchReport::find(std::string_view cluster, std::string_view mode) const {
  for (const BenchRow& r : rows) {
    if (r.cluster == cluster && r.mode == mode) return &r;
  }
  return nullptr;
}

// ---------------------------------------------------------------------------
// Verdicts and utility

bool session_verdict(std::span<const double> action_scores, double tau) {
  if (action_scores.empty()) throw Error(ErrorCode::EmptySession, "no scored actions");
  if (!(tau > 0.0 && tau < 1.0)) throw Error(ErrorCode::InvalidConfig, "tau must lie in (0, 1)");
  std::size_t human = 0;
  for (double s : action_scores) human += s >= tau;
  return 2 * human > action_scores.size();
}

bool session_verdict(const DetectorModel& detector, const Session& session, double tau) {
  std::vector<double> scores;
  for (const ActionTrace& a : session.actions) {
    if (a.kind != ActionKind::Swipe) continue;
    ActionTrace clean = a;
    clean.events = collapse_time_ties(a.events);
    if (clean.events.size() < kSwipeMinEvents) continue;
    const FeatureVector fv = extract_features(clean, session.screen_w, session.screen_h);
    std::visit(
        [&](const auto& m) {
          using M = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<M, ThresholdDetector>) {
            scores.push_back(predict(m, fv.values[feature_index(m.feature)]));
          } else {
            scores.push_back(predict(m, fv.values));
          }
        },
        detector);
  }
  return session_verdict(scores, tau);
}

std::optional<double> utility_summary(const UtilityAnnotation& annotations,
                                      std::span<const Session> sessions) {
  if (annotations.empty()) return std::nullopt;
  std::set<std::string_view> ids;
  for (const Session& s : sessions) ids.insert(s.session_id);
  std::size_t ok = 0;
  for (const auto& [id, success] : annotations) {
    if (!ids.contains(id)) throw Error(ErrorCode::UnknownSessionId, "unknown session id " + id);
    ok += success;
  }
  return static_cast<double>(ok) / static_cast<double>(annotations.size());
}

// ---------------------------------------------------------------------------
// Benchmark

namespace {

struct GroupData {
  FeatureMatrix train, test;
  ChannelValues interval_train, interval_test, tap_train, tap_test;
};

struct DetectorBundle {
  std::array<std::optional<ThresholdDetector>, kFeatureCount> single;
  std::optional<ThresholdDetector> interval, tap;
  std::optional<LinearMarginModel> linear;
  std::optional<BoostedTreeEnsemble> boosted;
};

bool has_both(const ChannelValues& v) { return !v.human.empty() && !v.other.empty(); }

bool has_both(const FeatureMatrix& m) {
  bool h = false, o = false;
  for (const FeatureRow& r : m.rows) (is_human(r.actor) ? h : o) = true;
  return h && o;
}

ChannelValues session_channel(std::span<const Session> sessions, RuleChannel channel) {
  return channel_values(sessions, channel);
}

GroupData make_group(std::span<const Session> train, std::span<const Session> test) {
  GroupData g;
  g.train = build_feature_matrix(train);
  g.test = build_feature_matrix(test);
  g.interval_train = session_channel(train, RuleChannel::Interval);
  g.interval_test = session_channel(test, RuleChannel::Interval);
  g.tap_train = session_channel(train, RuleChannel::TapDuration);
  g.tap_test = session_channel(test, RuleChannel::TapDuration);
  return g;
}

DetectorBundle fit_bundle(const GroupData& g, const DetectorOptions& opts) {
  DetectorBundle b;
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    const ChannelValues v = channel_values(g.train, f);
    if (has_both(v)) b.single[f] = fit_threshold(v.human, v.other, std::string(feature_names()[f]));
  }
  if (has_both(g.interval_train)) {
    b.interval = fit_threshold(g.interval_train.human, g.interval_train.other, "interval_s");
  }
  if (has_both(g.tap_train)) {
    b.tap = fit_threshold(g.tap_train.human, g.tap_train.other, "tap_duration_ms");
  }
  if (has_both(g.train) && g.train.rows.size() >= 10) {
    b.linear = fit_linear(g.train, opts.linear);
    b.boosted = fit_boosted(g.train, opts.boost);
  }
  return b;
}

std::optional<double> score(const std::optional<ThresholdDetector>& d, const ChannelValues& test) {
  if (!d || !has_both(test)) return std::nullopt;
  return threshold_accuracy(*d, test.human, test.other);
}

void evaluate(const DetectorBundle& b, const GroupData& g, BenchRow& row) {
  row.train_swipes = g.train.rows.size();
  row.test_swipes = g.test.rows.size();
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    row.feature_acc[f] = score(b.single[f], channel_values(g.test, f));
    if (row.feature_acc[f] && (!row.max_single || *row.feature_acc[f] > *row.max_single)) {
      row.max_single = row.feature_acc[f];
      row.best_feature = std::string(feature_names()[f]);
    }
  }
  row.interval_acc = score(b.interval, g.interval_test);
  row.tap_acc = score(b.tap, g.tap_test);
  if (has_both(g.test)) {
    if (b.linear) row.svm_acc = model_accuracy(*b.linear, g.test);
    if (b.boosted) row.gbt_acc = model_accuracy(*b.boosted, g.test);
  }
}

Session add_latency(const Session& s, std::pair<double, double> band, std::uint64_t seed) {
  Session out = s;
  Rng rng = derive_rng(seed, "online-latency", s.session_id);
  double shift = 0.0;
  for (std::size_t i = 0; i < out.actions.size(); ++i) {
    if (i > 0) shift += rng.uniform(band.first, band.second) * 1000.0;
    for (FingerEvent& e : out.actions[i].events) e.t_ms += shift;
  }
  recompute_offsets(out);
  return out;
}

HistogramSeries histogram(std::string plot, std::string mode, std::string cls,
                          std::vector<double> edges, std::span<const double> values) {
  HistogramSeries h{std::move(plot), std::move(mode), std::move(cls), std::move(edges), {}};
  h.counts.assign(h.edges.size() - 1, 0);
  for (double v : values) {
    auto it = std::upper_bound(h.edges.begin(), h.edges.end(), v);
    std::size_t bin = it == h.edges.begin() ? 0 : static_cast<std::size_t>(it - h.edges.begin()) - 1;
    bin = std::min(bin, h.counts.size() - 1);
    ++h.counts[bin];
  }
  return h;
}

std::vector<double> log_edges(double lo, double hi, int bins) {
  std::vector<double> e;
  for (int i = 0; i <= bins; ++i) e.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / bins));
  return e;
}

std::vector<double> linear_edges(double lo, double hi, int bins) {
  std::vector<double> e;
  for (int i = 0; i <= bins; ++i) e.push_back(lo + (hi - lo) * i / bins);
  return e;
}

std::string options_text(const BenchOptions& o, std::span<const BenchMode> modes) {
  std::ostringstream s;
  s << "seed=" << o.seed << "\nretrain=" << o.retrain << "\nper_cluster=" << o.per_cluster
    << "\nlinear=" << format_double(o.detectors.linear.regularization) << ','
    << o.detectors.linear.iterations << ',' << format_double(o.detectors.linear.step0)
    << "\nboost=" << o.detectors.boost.rounds << ',' << o.detectors.boost.max_depth << ','
    << format_double(o.detectors.boost.learning_rate) << "\ncurve=";
  for (std::size_t k : o.curve_sizes) s << k << ' ';
  s << o.curve_trials << ' ' << static_cast<int>(o.curve_model) << '\n';
  for (const BenchMode& m : modes) {
    s << "[mode " << m.name << "]\n" << wrapper_config_to_string(m.wrapper);
    if (m.online_latency_s) {
      s << "online = " << format_double(m.online_latency_s->first) << ','
        << format_double(m.online_latency_s->second) << '\n';
    }
  }
  return s.str();
}

char hex_digit(unsigned v) { return "0123456789abcdef"[v & 15u]; }

std::string hex64(std::uint64_t v) {
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = hex_digit(static_cast<unsigned>(v));
  return s;
}

}  // namespace

BenchReport run_benchmark(const LabeledCorpus& corpus, std::span<const BenchMode> modes,
                          const BenchOptions& options, const UtilityAnnotation* utility) {
  if (corpus.split.empty()) throw Error(ErrorCode::MissingSplit, "corpus has no train/test split");
  if (modes.empty()) throw Error(ErrorCode::InvalidConfig, "no benchmark modes given");
  bool any_human = false, any_other = false;
  for (const Session& s : corpus.sessions) {
    (is_human(s.actor) ? any_human : any_other) = true;
    if (!corpus.split.contains(s.session_id)) {
      throw Error(ErrorCode::MissingSplit, "session " + s.session_id + " has no split");
    }
  }
  if (!any_human || !any_other) throw Error(ErrorCode::SingleClass, "corpus needs both classes");
  std::set<std::string> names;
  for (const BenchMode& m : modes) {
    if (!names.insert(m.name).second) throw Error(ErrorCode::InvalidConfig, "duplicate mode " + m.name);
    validate(m.wrapper);
  }
  if (utility) utility_summary(*utility, corpus.sessions);

  std::vector<int> clusters;
  for (const Session& s : corpus.sessions) clusters.push_back(s.cluster);
  std::sort(clusters.begin(), clusters.end());
  clusters.erase(std::unique(clusters.begin(), clusters.end()), clusters.end());

  struct Group {
    std::string name;
    std::optional<int> cluster;
  };
  std::vector<Group> groups;
  if (options.per_cluster) {
    for (int c : clusters) groups.push_back({std::to_string(c), c});
  }
  groups.push_back({"all", std::nullopt});

  auto partition = [&](const std::vector<Session>& sessions, const Group& g) {
    std::pair<std::vector<Session>, std::vector<Session>> tt;
    for (const Session& s : sessions) {
      if (g.cluster && s.cluster != *g.cluster) continue;
      (corpus.split.at(s.session_id) == Split::Train ? tt.first : tt.second).push_back(s);
    }
    return tt;
  };

  // Frozen detectors are fit once per group on the unmodified corpus.
  std::vector<std::optional<DetectorBundle>> frozen(groups.size());
  if (!options.retrain) {
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
      auto [train, test] = partition(corpus.sessions, groups[gi]);
      frozen[gi] = fit_bundle(make_group(train, test), options.detectors);
    }
  }

  struct ModeResult {
    std::vector<BenchRow> rows;
    std::vector<SubsetCurvePoint> curve;
    std::vector<HistogramSeries> histograms;
    std::vector<std::string> warnings;
  };
  std::vector<ModeResult> results(modes.size());

  auto run_mode = [&](std::size_t mi) {
    const BenchMode& mode = modes[mi];
    LabeledCorpus transformed = corpus;
    if (mode.online_latency_s) {
      for (Session& s : transformed.sessions) {
        if (s.actor == Actor::Agent) s = add_latency(s, *mode.online_latency_s, mode.wrapper.seed);
      }
    }
    transformed = humanize_corpus(transformed, mode.wrapper, 1);
    ModeResult& res = results[mi];
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
      auto [train, test] = partition(transformed.sessions, groups[gi]);
      const GroupData data = make_group(train, test);
      BenchRow row;
      row.cluster = groups[gi].name;
      row.mode = mode.name;
      const DetectorBundle bundle =
          options.retrain ? fit_bundle(data, options.detectors) : *frozen[gi];
      evaluate(bundle, data, row);
      if (utility && !utility->empty()) {
        std::vector<Session> agents;
        for (const Session& s : transformed.sessions) {
          if (!is_human(s.actor) && (!groups[gi].cluster || s.cluster == *groups[gi].cluster)) {
            agents.push_back(s);
          }
        }
        UtilityAnnotation relevant;
        for (const Session& s : agents) {
          if (auto it = utility->find(s.session_id); it != utility->end()) relevant.insert(*it);
        }
        if (!relevant.empty()) row.task_acc = utility_summary(relevant, agents);
      }
      if (!groups[gi].cluster) {
        if (!options.curve_sizes.empty() && has_both(data.train) && has_both(data.test) &&
            data.train.rows.size() >= 10) {
          res.curve = feature_subset_curve(data.train, data.test, options.curve_model,
                                           options.curve_sizes, options.curve_trials,
                                           derive_seed(options.seed, "curve", mode.name),
                                           options.detectors);
        }
        const ChannelValues iv = session_channel(transformed.sessions, RuleChannel::Interval);
        const ChannelValues tv = session_channel(transformed.sessions, RuleChannel::TapDuration);
        const auto iedges = log_edges(0.01, 1000.0, 50);
        const auto tedges = linear_edges(0.0, 200.0, 40);
        res.histograms.push_back(histogram("interval_s", mode.name, "human", iedges, iv.human));
        res.histograms.push_back(histogram("interval_s", mode.name, "agent", iedges, iv.other));
        res.histograms.push_back(histogram("tap_duration_ms", mode.name, "human", tedges, tv.human));
        res.histograms.push_back(histogram("tap_duration_ms", mode.name, "agent", tedges, tv.other));
      }
      res.rows.push_back(std::move(row));
    }
  };

  const auto workers = static_cast<std::size_t>(std::clamp(options.threads, 1, static_cast<int>(modes.size())));
  std::vector<std::exception_ptr> errors(modes.size());
  auto guarded = [&](std::size_t mi) {
    try {
      run_mode(mi);
    } catch (...) {
      errors[mi] = std::current_exception();
    }
  };
  if (workers == 1) {
    for (std::size_t mi = 0; mi < modes.size(); ++mi) guarded(mi);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t mi = w; mi < modes.size(); mi += workers) guarded(mi);
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  BenchReport report;
  report.seed = options.seed;
  report.retrain = options.retrain;
  report.sessions = corpus.sessions.size();
  report.config_hash = hex64(fnv1a64(options_text(options, modes)));
  for (std::size_t mi = 0; mi < modes.size(); ++mi) {
    report.mode_order.push_back(modes[mi].name);
    report.mode_configs[modes[mi].name] = wrapper_config_to_string(modes[mi].wrapper);
    if (!results[mi].curve.empty()) report.curves[modes[mi].name] = results[mi].curve;
    for (auto& h : results[mi].histograms) report.histograms.push_back(std::move(h));
  }
  // Rows grouped by cluster, modes in the given order.
  for (const Group& g : groups) {
    for (std::size_t mi = 0; mi < modes.size(); ++mi) {
      for (const BenchRow& r : results[mi].rows) {
        if (r.cluster == g.name) report.rows.push_back(r);
      }
    }
  }
  // RAW dominance is monitored, not enforced.
  for (const Group& g : groups) {
    const BenchRow* raw = report.find(g.name, modes.front().name);
    for (std::size_t mi = 1; mi < modes.size(); ++mi) {
      const BenchRow* r = report.find(g.name, modes[mi].name);
      if (raw && r && raw->gbt_acc && r->gbt_acc && *r->gbt_acc > *raw->gbt_acc + 0.01) {
        report.warnings.push_back("cluster " + g.name + ": mode " + modes[mi].name +
                                  " raises gbt_acc above " + modes.front().name + " (" +
                                  format_double(*r->gbt_acc) + " > " +
                                  format_double(*raw->gbt_acc) + ")");
      }
    }
  }
  return report;
}

PerFeatureTable per_feature_table(const BenchReport& report) {
  PerFeatureTable t;
  for (const std::string& mode : report.mode_order) {
    const BenchRow* r = report.find("all", mode);
    if (!r) continue;
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
      t[std::string(feature_names()[f])][mode] = r->feature_acc[f];
    }
    t["svm"][mode] = r->svm_acc;
    t["gbt"][mode] = r->gbt_acc;
  }
  return t;
}

PerFeatureTable per_feature_table(const LabeledCorpus& corpus, std::span<const BenchMode> modes,
                                  const BenchOptions& options) {
  BenchOptions o = options;
  o.per_cluster = false;
  o.curve_sizes.clear();
  return per_feature_table(run_benchmark(corpus, modes, o));
}

// ---------------------------------------------------------------------------
// Output

namespace {

Json opt(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

std::string cell(const std::optional<double>& v) {
  if (!v) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", *v);
  return buf;
}

}  // namespace

Json report_to_json(const BenchReport& report) {
  Json doc = Json::object();
  doc["schema"] = "touchbench.bench/v1";
  Json meta = Json::object();
  meta["seed"] = report.seed;
  meta["config_hash"] = report.config_hash;
  meta["retrain"] = report.retrain;
  meta["sessions"] = report.sessions;
  meta["modes"] = report.mode_order;
  Json cfgs = Json::object();
  for (const std::string& m : report.mode_order) cfgs[m] = report.mode_configs.at(m);
  meta["mode_configs"] = std::move(cfgs);
  doc["metadata"] = std::move(meta);

  Json rows = Json::array();
  for (const BenchRow& r : report.rows) {
    Json j = Json::object();
    j["cluster"] = r.cluster;
    j["mode"] = r.mode;
    j["max_single"] = opt(r.max_single);
    j["best_feature"] = r.best_feature;
    j["svm_acc"] = opt(r.svm_acc);
    j["gbt_acc"] = opt(r.gbt_acc);
    j["interval_acc"] = opt(r.interval_acc);
    j["tap_acc"] = opt(r.tap_acc);
    j["task_acc"] = opt(r.task_acc);
    j["train_swipes"] = r.train_swipes;
    j["test_swipes"] = r.test_swipes;
    Json fa = Json::object();
    for (std::size_t f = 0; f < kFeatureCount; ++f) fa[std::string(feature_names()[f])] = opt(r.feature_acc[f]);
    j["feature_acc"] = std::move(fa);
    rows.push_back(std::move(j));
  }
  doc["rows"] = std::move(rows);

  Json curves = Json::object();
  for (const std::string& m : report.mode_order) {
    auto it = report.curves.find(m);
    if (it == report.curves.end()) continue;
    Json pts = Json::array();
    for (const SubsetCurvePoint& p : it->second) {
      pts.push_back({{"size", p.size}, {"mean_accuracy", p.mean_accuracy}, {"stddev", p.stddev},
                     {"trials", p.trials}});
    }
    curves[m] = std::move(pts);
  }
  doc["feature_count_curves"] = std::move(curves);
  doc["warnings"] = report.warnings;
  return doc;
}

void write_summary_csv(const BenchReport& report, std::ostream& out) {
  out << "cluster,mode,max_single,best_feature,svm_acc,gbt_acc,interval_acc,tap_acc,task_acc\n";
  for (const BenchRow& r : report.rows) {
    out << r.cluster << ',' << r.mode << ',' << cell(r.max_single) << ',' << r.best_feature << ','
        << cell(r.svm_acc) << ',' << cell(r.gbt_acc) << ',' << cell(r.interval_acc) << ','
        << cell(r.tap_acc) << ',' << cell(r.task_acc) << '\n';
  }
}

void write_per_feature_csv(const BenchReport& report, std::ostream& out) {
  const PerFeatureTable t = per_feature_table(report);
  out << "feature";
  for (const std::string& m : report.mode_order) out << ',' << m;
  out << '\n';
  std::vector<std::string> order;
  for (std::string_view f : feature_names()) order.emplace_back(f);
  order.emplace_back("svm");
  order.emplace_back("gbt");
  for (const std::string& f : order) {
    auto it = t.find(f);
    out << f;
    for (const std::string& m : report.mode_order) {
      std::optional<double> v;
      if (it != t.end()) {
        if (auto jt = it->second.find(m); jt != it->second.end()) v = jt->second;
      }
      out << ',' << cell(v);
    }
    out << '\n';
  }
}

void write_histogram_csv(const BenchReport& report, std::ostream& out) {
  out << "plot,mode,class,bin_lo,bin_hi,count\n";
  for (const HistogramSeries& h : report.histograms) {
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
      out << h.plot << ',' << h.mode << ',' << h.actor_class << ',' << format_double(h.edges[i])
          << ',' << format_double(h.edges[i + 1]) << ',' << h.counts[i] << '\n';
    }
  }
}

void write_curve_csv(const BenchReport& report, std::ostream& out) {
  out << "mode,features,mean_accuracy,stddev,trials\n";
  for (const std::string& m : report.mode_order) {
    auto it = report.curves.find(m);
    if (it == report.curves.end()) continue;
    for (const SubsetCurvePoint& p : it->second) {
      out << m << ',' << p.size << ',' << format_double(p.mean_accuracy) << ','
          << format_double(p.stddev) << ',' << p.trials << '\n';
    }
  }
}

}  // namespace touchbench
