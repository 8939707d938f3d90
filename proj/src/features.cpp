#include "touchbench/features.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <ostream>

#include "touchbench/error.hpp"
#include "touchbench/numeric.hpp"

namespace touchbench {

namespace {

constexpr std::array<std::string_view, kFeatureCount> kNames = {
    "v20",    "v50",    "v80",    "speed",        "v_last3_median",      "a20",
    "a50",    "a80",    "acc_first5pct_median",     "dev20",               "dev50",
    "dev80",  "maxDev", "length", "displacement", "ratio_end_to_length", "meanResultantLength",
    "direction", "avgDirection", "startX", "startY", "endX",           "endY",
    "duration"};

double wrap_angle(double a) {
  // atan2 already lands in [-pi, pi]; fold -pi onto pi.
  return a <= -std::numbers::pi ? a + 2.0 * std::numbers::pi : a;
}

}  // namespace

const std::array<std::string_view, kFeatureCount>& feature_names() { return kNames; }

std::string_view feature_name(Feature f) { return kNames[static_cast<std::size_t>(f)]; }

std::size_t feature_index(std::string_view name) {
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (kNames[i] == name) return i;
  }
  throw Error(ErrorCode::UnknownFeature, "no feature named \"" + std::string(name) + "\"");
}

FeatureVector extract_features(const ActionTrace& trace, int screen_w, int screen_h,
                               const ExtractOptions& options) {
  const auto& ev = trace.events;
  if (ev.size() < kSwipeMinEvents) {
    throw Error(ErrorCode::NotASwipe,
                "feature extraction needs >= 5 events, got " + std::to_string(ev.size()));
  }
  const double sx = options.normalize ? 1.0 / screen_w : 1.0;
  const double sy = options.normalize ? 1.0 / screen_h : 1.0;
  const std::size_t n = ev.size();
  std::vector<double> x(n), y(n), t(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = ev[i].x * sx;
    y[i] = ev[i].y * sy;
    t[i] = ev[i].t_ms;
    if (i > 0 && !(t[i] > t[i - 1])) {
      throw Error(ErrorCode::NonMonotonicTime,
                  "feature extraction needs strictly increasing timestamps (event " +
                      std::to_string(i) + ")");
    }
  }

  FeatureVector fv;
  using F = Feature;

  // Segment geometry and pairwise velocities.
  std::vector<double> vel(n - 1);
  double length = 0.0;
  double sum_cos = 0.0, sum_sin = 0.0;
  std::size_t directed_segments = 0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double dx = x[i + 1] - x[i];
    const double dy = y[i + 1] - y[i];
    const double seg = std::hypot(dx, dy);
    length += seg;
    vel[i] = seg / (t[i + 1] - t[i]);
    if (seg > 0.0) {
      sum_cos += dx / seg;
      sum_sin += dy / seg;
      ++directed_segments;
    }
  }

  // Accelerations between consecutive velocities, each velocity placed at
  // the midpoint of its segment in time.
  std::vector<double> acc(n - 2);
  for (std::size_t j = 0; j + 2 < n; ++j) {
    acc[j] = (vel[j + 1] - vel[j]) / (0.5 * (t[j + 2] - t[j]));
  }

  std::vector<double> vel_sorted = vel;
  std::sort(vel_sorted.begin(), vel_sorted.end());
  fv[F::v20] = percentile_sorted(vel_sorted, 0.2);
  fv[F::v50] = percentile_sorted(vel_sorted, 0.5);
  fv[F::v80] = percentile_sorted(vel_sorted, 0.8);
  const double duration = t[n - 1] - t[0];
  fv[F::duration] = duration;
  fv[F::speed] = length / duration;
  fv[F::v_last3_median] = median(std::span(vel).last(3));

  std::vector<double> acc_sorted = acc;
  std::sort(acc_sorted.begin(), acc_sorted.end());
  fv[F::a20] = percentile_sorted(acc_sorted, 0.2);
  fv[F::a50] = percentile_sorted(acc_sorted, 0.5);
  fv[F::a80] = percentile_sorted(acc_sorted, 0.8);
  const auto head = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(0.05 * static_cast<double>(acc.size()))));
  fv[F::acc_first5pct_median] = median(std::span(acc).first(std::min(head, acc.size())));

  // Deviation from the start->end chord.
  const double cx = x[n - 1] - x[0];
  const double cy = y[n - 1] - y[0];
  const double displacement = std::hypot(cx, cy);
  fv.degenerate_chord = displacement == 0.0;
  std::vector<double> dev(n);
  double signed_best = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double px = x[i] - x[0];
    const double py = y[i] - y[0];
    double d;
    if (fv.degenerate_chord) {
      d = std::hypot(px, py);
    } else {
      d = (cx * py - cy * px) / displacement;
    }
    if (std::abs(d) > std::abs(signed_best)) signed_best = d;
    dev[i] = std::abs(d);
  }
  fv.signed_max_dev = signed_best;
  std::sort(dev.begin(), dev.end());
  fv[F::dev20] = percentile_sorted(dev, 0.2);
  fv[F::dev50] = percentile_sorted(dev, 0.5);
  fv[F::dev80] = percentile_sorted(dev, 0.8);
  fv[F::maxDev] = dev.back();

  // The path can never be shorter than its chord; guard against rounding.
  length = std::max(length, displacement);
  fv[F::length] = length;
  fv[F::displacement] = displacement;
  fv[F::ratio_end_to_length] =
      (fv.degenerate_chord || length == 0.0) ? 0.0 : std::min(1.0, displacement / length);

  const double resultant = std::hypot(sum_cos, sum_sin);
  fv[F::meanResultantLength] =
      directed_segments == 0 ? 0.0
                             : std::min(1.0, resultant / static_cast<double>(directed_segments));
  fv.degenerate_direction = resultant == 0.0;
  fv[F::avgDirection] = fv.degenerate_direction ? 0.0 : wrap_angle(std::atan2(sum_sin, sum_cos));
  fv[F::direction] = fv.degenerate_chord ? 0.0 : wrap_angle(std::atan2(cy, cx));

  fv[F::startX] = x[0];
  fv[F::startY] = y[0];
  fv[F::endX] = x[n - 1];
  fv[F::endY] = y[n - 1];
  return fv;
}

std::vector<double> FeatureMatrix::column(std::size_t feature) const {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const FeatureRow& r : rows) out.push_back(r.features.values.at(feature));
  return out;
}

std::vector<int> FeatureMatrix::human_labels() const {
  std::vector<int> out;
  out.reserve(rows.size());
  for (const FeatureRow& r : rows) out.push_back(is_human(r.actor) ? 1 : 0);
  return out;
}

FeatureMatrix build_feature_matrix(std::span<const Session> sessions,
                                   const ExtractOptions& options) {
  FeatureMatrix m;
  for (const Session& s : sessions) {
    for (std::size_t i = 0; i < s.actions.size(); ++i) {
      const ActionTrace& a = s.actions[i];
      if (a.kind != ActionKind::Swipe) continue;
      FeatureRow row{s.session_id, i, s.actor, s.cluster, {}};
      if (std::adjacent_find(a.events.begin(), a.events.end(), [](const auto& l, const auto& r) {
            return l.t_ms == r.t_ms;
          }) != a.events.end()) {
        ActionTrace cleaned = a;
        cleaned.events = collapse_time_ties(a.events);
        if (cleaned.events.size() < kSwipeMinEvents) continue;
        row.features = extract_features(cleaned, s.screen_w, s.screen_h, options);
      } else {
        row.features = extract_features(a, s.screen_w, s.screen_h, options);
      }
      m.rows.push_back(std::move(row));
    }
  }
  return m;
}

FeatureMatrix build_feature_matrix(const LabeledCorpus& corpus, const ExtractOptions& options) {
  return build_feature_matrix(std::span<const Session>(corpus.sessions), options);
}

namespace {

double entropy_nats(std::span<const double> counts, double total) {
  double h = 0.0;
  for (double c : counts) {
    if (c > 0.0) {
      const double p = c / total;
      h -= p * std::log(p);
    }
  }
  return h;
}

}  // namespace

double information_gain(std::span<const double> values, std::span<const int> labels, int bins) {
  if (values.size() != labels.size()) {
    throw Error(ErrorCode::DimensionMismatch, "values and labels differ in length");
  }
  if (bins < 2) throw Error(ErrorCode::InvalidConfig, "information gain needs bins >= 2");
  const std::size_t n = values.size();
  double class_counts[2] = {0.0, 0.0};
  for (int l : labels) class_counts[l ? 1 : 0] += 1.0;
  if (class_counts[0] == 0.0 || class_counts[1] == 0.0) {
    throw Error(ErrorCode::SingleClass, "information gain needs both classes present");
  }
  const double h_u = entropy_nats(class_counts, static_cast<double>(n));

  // Equal-frequency bins by rank; tied values always share a bin so the
  // result depends only on the ordering of distinct values.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<std::array<double, 2>> table(static_cast<std::size_t>(bins), {0.0, 0.0});
  std::size_t group_start = 0;
  for (std::size_t r = 0; r < n; ++r) {
    if (r > 0 && values[order[r]] != values[order[r - 1]]) group_start = r;
    const auto bin = std::min<std::size_t>(bins - 1, group_start * bins / n);
    table[bin][labels[order[r]] ? 1 : 0] += 1.0;
  }
  double h_cond = 0.0;
  for (const auto& cell : table) {
    const double cnt = cell[0] + cell[1];
    if (cnt > 0.0) h_cond += cnt / static_cast<double>(n) * entropy_nats(cell, cnt);
  }
  return std::clamp(1.0 - h_cond / h_u, 0.0, 1.0);
}

double information_gain(const FeatureMatrix& matrix, std::string_view feature, int bins) {
  const auto values = matrix.column(feature_index(feature));
  const auto labels = matrix.human_labels();
  return information_gain(values, labels, bins);
}

CorrelationMatrix correlation_matrix(const FeatureMatrix& matrix) {
  if (matrix.rows.size() < 2) {
    throw Error(ErrorCode::TooFewRows, "correlation needs at least 2 rows");
  }
  const double n = static_cast<double>(matrix.rows.size());
  std::array<std::vector<double>, kFeatureCount> centered;
  std::array<double, kFeatureCount> norm{};
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    centered[f] = matrix.column(f);
    double m = 0.0;
    for (double v : centered[f]) m += v;
    m /= n;
    double ss = 0.0;
    for (double& v : centered[f]) {
      v -= m;
      ss += v * v;
    }
    norm[f] = std::sqrt(ss);
  }
  CorrelationMatrix c{};
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    for (std::size_t j = i; j < kFeatureCount; ++j) {
      double r = 0.0;
      if (norm[i] > 0.0 && norm[j] > 0.0) {
        if (i == j) {
          r = 1.0;
        } else {
          double dot = 0.0;
          for (std::size_t k = 0; k < centered[i].size(); ++k) {
            dot += centered[i][k] * centered[j][k];
          }
          r = std::clamp(dot / (norm[i] * norm[j]), -1.0, 1.0);
        }
      }
      c[i][j] = r;
      c[j][i] = r;
    }
  }
  return c;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

}  // namespace

void write_feature_csv(const FeatureMatrix& matrix, std::ostream& out) {
  out << "session_id,action_index,actor,cluster";
  for (auto name : kNames) out << ',' << name;
  out << '\n';
  for (const FeatureRow& r : matrix.rows) {
    out << csv_field(r.session_id) << ',' << r.action_index << ',' << to_string(r.actor) << ','
        << r.cluster;
    for (double v : r.features.values) out << ',' << format_double(v);
    out << '\n';
  }
}

}  // namespace touchbench
