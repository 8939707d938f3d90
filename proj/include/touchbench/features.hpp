#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "touchbench/events.hpp"

namespace touchbench {

inline constexpr std::size_t kFeatureCount = 24;

// Column order of FeatureVector::values and of the CSV export.
enum class Feature : std::size_t {
  v20, v50, v80, speed, v_last3_median,
  a20, a50, a80, acc_first5pct_median,
  dev20, dev50, dev80, maxDev,
  length, displacement, ratio_end_to_length, meanResultantLength,
  direction, avgDirection,
  startX, startY, endX, endY,
  duration,
};

const std::array<std::string_view, kFeatureCount>& feature_names();
std::string_view feature_name(Feature f);
// Throws UnknownFeature.
std::size_t feature_index(std::string_view name);

// The 24 swipe statistics. Velocities in px/ms, accelerations in px/ms^2,
// lengths in px, angles in radians within (-pi, pi], duration in ms.
struct FeatureVector {
  std::array<double, kFeatureCount> values{};

  // Zero displacement: deviations are measured from the start point and
  // direction/ratio are 0.
  bool degenerate_chord = false;
  // Zero resultant of the segment unit vectors: avgDirection is 0.
  bool degenerate_direction = false;
  // Perpendicular deviation of largest magnitude, sign = side of the chord
  // (positive to the left of start->end in screen coordinates). Diagnostic
  // only; maxDev uses the absolute distance.
  double signed_max_dev = 0.0;

  double operator[](Feature f) const { return values[static_cast<std::size_t>(f)]; }
  double& operator[](Feature f) { return values[static_cast<std::size_t>(f)]; }
};

struct ExtractOptions {
  // Divide x by screen_w and y by screen_h before extraction.
  bool normalize = false;
};

// Requires a swipe (>= 5 events) with strictly increasing timestamps.
FeatureVector extract_features(const ActionTrace& trace, int screen_w, int screen_h,
                               const ExtractOptions& options = {});

struct FeatureRow {
  std::string session_id;
  std::size_t action_index = 0;
  Actor actor = Actor::Human;
  int cluster = 0;
  FeatureVector features;
};

// One row per swipe action; taps are excluded.
struct FeatureMatrix {
  std::vector<FeatureRow> rows;

  std::vector<double> column(std::size_t feature) const;
  // 1 for human rows, 0 otherwise.
  std::vector<int> human_labels() const;
};

FeatureMatrix build_feature_matrix(const LabeledCorpus& corpus, const ExtractOptions& options = {});
FeatureMatrix build_feature_matrix(std::span<const Session> sessions,
                                   const ExtractOptions& options = {});

// Normalized mutual information 1 - H(U|F)/H(U) between a feature and the
// human/non-human label, with equal-frequency discretization.
inline constexpr int kDefaultIgBins = 20;
double information_gain(const FeatureMatrix& matrix, std::string_view feature,
                        int bins = kDefaultIgBins);
double information_gain(std::span<const double> values, std::span<const int> labels,
                        int bins = kDefaultIgBins);

using CorrelationMatrix = std::array<std::array<double, kFeatureCount>, kFeatureCount>;
// Pearson coefficients; constant columns correlate 0 with everything,
// including themselves.
CorrelationMatrix correlation_matrix(const FeatureMatrix& matrix);

void write_feature_csv(const FeatureMatrix& matrix, std::ostream& out);

}  // namespace touchbench
