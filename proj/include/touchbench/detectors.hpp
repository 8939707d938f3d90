#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "touchbench/events.hpp"
#include "touchbench/features.hpp"

namespace touchbench {

// Which side of the threshold is classified human. A value exactly at the
// threshold always lands on the non-human side.
enum class Polarity { HumanBelow, HumanAbove };

struct ThresholdDetector {
  std::string feature;  // swipe feature name, "interval_s" or "tap_duration_ms"
  double threshold = 0.0;
  Polarity polarity = Polarity::HumanBelow;
  double train_accuracy = 0.5;
};

// Optimal-ROC cut: maximizes balanced accuracy over midpoints between
// adjacent distinct values plus +-infinity. Ties go to the smaller threshold.
ThresholdDetector fit_threshold(std::span<const double> human, std::span<const double> agent,
                                std::string feature = {});

// Mean of per-class recalls; labels are 1 for human.
double balanced_accuracy(std::span<const int> truth, std::span<const int> predicted);
double threshold_accuracy(const ThresholdDetector& det, std::span<const double> human,
                          std::span<const double> agent);

enum class RuleChannel { SwipeFeature, Interval, TapDuration };

struct ChannelSpec {
  RuleChannel channel = RuleChannel::SwipeFeature;
  // Feature name for SwipeFeature; "ALL" takes the best of the 24.
  std::string feature = "ALL";
};

struct ChannelValues {
  std::vector<double> human;
  std::vector<double> other;
};

// Per-action values of a rule channel: inter-action intervals in seconds or
// tap durations in ms.
ChannelValues channel_values(std::span<const Session> sessions, RuleChannel channel);
ChannelValues channel_values(const FeatureMatrix& matrix, std::size_t feature);

// Fits on the train split and reports balanced accuracy on the test split.
double rule_accuracy(const LabeledCorpus& corpus, const ChannelSpec& spec);

struct LinearOptions {
  double regularization = 1e-3;
  int iterations = 300;
  double step0 = 0.5;
};

struct LinearMarginModel {
  std::array<double, kFeatureCount> weights{};
  double bias = 0.0;
  std::array<double, kFeatureCount> feature_means{};
  std::array<double, kFeatureCount> feature_stds{};
  double regularization = 1e-3;
  int iterations = 0;
};

// Class-balanced hinge loss + L2, deterministic full-batch subgradient
// descent from zero; the best-objective iterate is returned.
LinearMarginModel fit_linear(const FeatureMatrix& train, const LinearOptions& options = {},
                             std::span<const std::size_t> features = {});

struct BoostOptions {
  int rounds = 50;
  int max_depth = 3;
  double learning_rate = 0.3;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
};

struct RegressionTree {
  std::vector<TreeNode> nodes;

  double predict(std::span<const double> x) const;
};

struct BoostedTreeEnsemble {
  std::vector<RegressionTree> trees;
  double base_score = 0.0;
  double learning_rate = 0.3;
  int rounds = 0;
  int max_depth = 0;
  // Weighted logistic loss on the training rows after each round
  // (index 0 is the loss of the base score alone).
  std::vector<double> train_loss;
};

// Gradient boosting on class-balanced logistic loss; each round fits one
// depth-limited tree to the negative gradients by exact greedy variance
// reduction, with Newton leaf values.
BoostedTreeEnsemble fit_boosted(const FeatureMatrix& train, const BoostOptions& options = {},
                                std::span<const std::size_t> features = {});

// Probability-of-human scores.
double predict(const LinearMarginModel& model, std::span<const double> x);
double predict(const BoostedTreeEnsemble& model, std::span<const double> x);
double predict(const ThresholdDetector& model, double value);

// Balanced accuracy of a model on labelled rows (score >= 0.5 is human).
double model_accuracy(const LinearMarginModel& model, const FeatureMatrix& rows);
double model_accuracy(const BoostedTreeEnsemble& model, const FeatureMatrix& rows);

enum class ModelKind { Threshold, Linear, Boosted };

struct DetectorOptions {
  LinearOptions linear;
  BoostOptions boost;
};

struct SubsetCurvePoint {
  std::size_t size = 0;
  double mean_accuracy = 0.0;
  double stddev = 0.0;
  std::size_t trials = 0;
};

// Test accuracy averaged over random feature subsets of each size. The
// threshold kind picks the subset member with the best train accuracy.
std::vector<SubsetCurvePoint> feature_subset_curve(const FeatureMatrix& train,
                                                   const FeatureMatrix& test, ModelKind kind,
                                                   std::span<const std::size_t> subset_sizes,
                                                   int trials, std::uint64_t seed,
                                                   const DetectorOptions& options = {});

using DetectorModel = std::variant<ThresholdDetector, LinearMarginModel, BoostedTreeEnsemble>;

inline constexpr std::string_view kModelSchema = "touchbench.detector/v1";
Json model_to_json(const DetectorModel& model);
DetectorModel model_from_json(const Json& doc);

}  // namespace touchbench
