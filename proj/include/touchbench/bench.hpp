#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "touchbench/detectors.hpp"
#include "touchbench/events.hpp"
#include "touchbench/features.hpp"
#include "touchbench/humanize.hpp"

namespace touchbench {

struct BenchMode {
  std::string name;
  WrapperConfig wrapper;
  // Online runs: extra inference latency (seconds, uniform band) added to
  // every agent gap before humanization.
  std::optional<std::pair<double, double>> online_latency_s;
};

// RAW, bspline, history, history+fake+long. The database feeds the history
// modes; mode seeds derive from `seed`.
std::vector<BenchMode> default_modes(std::shared_ptr<const ReferenceDB> db, std::uint64_t seed);

// Mode by name: raw, bspline, history, fake, long, or '+'-joined
// combinations such as history+fake+long.
BenchMode make_mode(std::string_view name, std::shared_ptr<const ReferenceDB> db,
                    std::uint64_t seed);

using UtilityAnnotation = std::map<std::string, bool>;

// Accepts {"id": true, ...} or [{"session_id": "id", "task_success": true}, ...].
UtilityAnnotation load_utility(const std::filesystem::path& path);

struct BenchOptions {
  DetectorOptions detectors;
  // Retrain detectors on each mode's humanized train split. When false the
  // detectors are trained once on RAW data and frozen.
  bool retrain = true;
  std::uint64_t seed = 7;
  int threads = 1;
  bool per_cluster = true;
  std::vector<std::size_t> curve_sizes{1, 2, 4, 8, 16, 24};
  int curve_trials = 3;
  ModelKind curve_model = ModelKind::Boosted;
};

struct BenchRow {
  std::string cluster;  // cluster id, or "all" for the pooled row
  std::string mode;
  std::optional<double> max_single;
  std::string best_feature;
  std::optional<double> svm_acc;
  std::optional<double> gbt_acc;
  std::optional<double> interval_acc;
  std::optional<double> tap_acc;
  std::optional<double> task_acc;
  // Test accuracy of the optimal threshold on each swipe feature.
  std::array<std::optional<double>, kFeatureCount> feature_acc{};
  std::size_t train_swipes = 0;
  std::size_t test_swipes = 0;
};

struct HistogramSeries {
  std::string plot;  // "interval_s" or "tap_duration_ms"
  std::string mode;
  std::string actor_class;  // "human" or "agent"
  std::vector<double> edges;
  std::vector<std::size_t> counts;
};

struct BenchReport {
  std::vector<BenchRow> rows;
  std::map<std::string, std::vector<SubsetCurvePoint>> curves;
  std::vector<HistogramSeries> histograms;
  std::vector<std::string> mode_order;
  std::map<std::string, std::string> mode_configs;
  std::vector<std::string> warnings;
  std::uint64_t seed = 0;
  std::string config_hash;
  bool retrain = true;
  std::size_t sessions = 0;

  const BenchRow* find(std::string_view cluster, std::string_view mode) const;
};

// Needs both classes and a train/test split (MissingSplit otherwise).
BenchReport run_benchmark(const LabeledCorpus& corpus, std::span<const BenchMode> modes,
                          const BenchOptions& options,
                          const UtilityAnnotation* utility = nullptr);

// Pooled per-feature accuracies: feature name (plus "svm", "gbt") -> mode -> accuracy.
using PerFeatureTable = std::map<std::string, std::map<std::string, std::optional<double>>>;
PerFeatureTable per_feature_table(const BenchReport& report);
PerFeatureTable per_feature_table(const LabeledCorpus& corpus, std::span<const BenchMode> modes,
                                  const BenchOptions& options);

// Majority vote of per-action human scores; a vote counts as human when its
// score is >= tau, and ties go to agent. Throws EmptySession.
bool session_verdict(std::span<const double> action_scores, double tau);
bool session_verdict(const DetectorModel& detector, const Session& session, double tau);

// Share of annotated sessions marked successful, or nothing without
// annotations. Throws UnknownSessionId for ids outside the session set.
std::optional<double> utility_summary(const UtilityAnnotation& annotations,
                                      std::span<const Session> sessions);

Json report_to_json(const BenchReport& report);
void write_summary_csv(const BenchReport& report, std::ostream& out);
void write_per_feature_csv(const BenchReport& report, std::ostream& out);
void write_histogram_csv(const BenchReport& report, std::ostream& out);
void write_curve_csv(const BenchReport& report, std::ostream& out);

}  // namespace touchbench
