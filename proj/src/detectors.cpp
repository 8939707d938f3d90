#include "touchbench/detectors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "touchbench/error.hpp"
#include "touchbench/numeric.hpp"
#include "touchbench/rng.hpp"

namespace touchbench {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<std::size_t> all_features() {
  std::vector<std::size_t> f(kFeatureCount);
  std::iota(f.begin(), f.end(), 0);
  return f;
}

std::vector<std::size_t> resolve_features(std::span<const std::size_t> features) {
  if (features.empty()) return all_features();
  std::vector<std::size_t> out(features.begin(), features.end());
  for (std::size_t f : out) {
    if (f >= kFeatureCount) {
      throw Error(ErrorCode::DimensionMismatch, "feature index " + std::to_string(f) +
                                                    " out of range");
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

void require_two_classes(const FeatureMatrix& m, std::size_t min_rows) {
  if (m.rows.size() < min_rows) {
    throw Error(ErrorCode::TooFewRows, "need at least " + std::to_string(min_rows) +
                                           " rows, got " + std::to_string(m.rows.size()));
  }
  bool human = false, other = false;
  for (const FeatureRow& r : m.rows) {
    (is_human(r.actor) ? human : other) = true;
    for (double v : r.features.values) {
      if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "non-finite feature value");
    }
  }
  if (!human || !other) throw Error(ErrorCode::SingleClass, "training rows hold a single class");
}

}  // namespace

ThresholdDetector fit_threshold(std::span<const double> human, std::span<const double> agent,
                                std::string feature) {
  if (human.empty() || agent.empty()) {
    throw Error(ErrorCode::EmptyClass, "threshold fitting needs both classes");
  }
  struct Item {
    double v;
    bool human;
  };
  std::vector<Item> items;
  items.reserve(human.size() + agent.size());
  for (double v : human) items.push_back({v, true});
  for (double v : agent) items.push_back({v, false});
  for (const Item& it : items) {
    if (std::isnan(it.v)) throw Error(ErrorCode::NonFinite, "NaN in threshold input");
  }
  std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) { return a.v < b.v; });

  // Balanced accuracy scaled by 2*nh*na stays an exact integer, so ties are
  // detected exactly.
  const auto nh = static_cast<std::int64_t>(human.size());
  const auto na = static_cast<std::int64_t>(agent.size());
  auto score_below = [&](std::int64_t h_le, std::int64_t a_le) {
    return h_le * na + (na - a_le) * nh;
  };
  const std::int64_t total = 2 * nh * na;

  std::int64_t best = -1;
  double best_thr = 0.0;
  Polarity best_pol = Polarity::HumanBelow;
  auto consider = [&](double thr, std::int64_t h_le, std::int64_t a_le) {
    const std::int64_t below = score_below(h_le, a_le);
    const std::int64_t above = total - below;
    if (below > best) {
      best = below;
      best_thr = thr;
      best_pol = Polarity::HumanBelow;
    }
    if (above > best) {
      best = above;
      best_thr = thr;
      best_pol = Polarity::HumanAbove;
    }
  };

  consider(-kInf, 0, 0);
  std::int64_t h_le = 0, a_le = 0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    (items[i].human ? h_le : a_le)++;
    const bool last_of_value = i + 1 == items.size() || items[i + 1].v != items[i].v;
    if (!last_of_value) continue;
    const double thr = i + 1 == items.size() ? kInf
                                              : items[i].v + 0.5 * (items[i + 1].v - items[i].v);
    consider(thr, h_le, a_le);
  }

  ThresholdDetector det;
  det.feature = std::move(feature);
  det.threshold = best_thr;
  det.polarity = best_pol;
  det.train_accuracy = static_cast<double>(best) / static_cast<double>(total);
  return det;
}

double predict(const ThresholdDetector& model, double value) {
  if (std::isnan(value)) throw Error(ErrorCode::NonFinite, "NaN input to threshold detector");
  const bool human = model.polarity == Polarity::HumanBelow ? value < model.threshold
                                                            : value > model.threshold;
  return human ? 1.0 : 0.0;
}

double balanced_accuracy(std::span<const int> truth, std::span<const int> predicted) {
  if (truth.size() != predicted.size()) {
    throw Error(ErrorCode::DimensionMismatch, "truth and prediction lengths differ");
  }
  double tp = 0, pos = 0, tn = 0, neg = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i]) {
      ++pos;
      tp += predicted[i] != 0;
    } else {
      ++neg;
      tn += predicted[i] == 0;
    }
  }
  if (pos == 0 || neg == 0) {
    throw Error(ErrorCode::EmptyClass, "balanced accuracy needs both classes");
  }
  return 0.5 * (tp / pos + tn / neg);
}

double threshold_accuracy(const ThresholdDetector& det, std::span<const double> human,
                          std::span<const double> agent) {
  if (human.empty() || agent.empty()) {
    throw Error(ErrorCode::EmptyClass, "threshold evaluation needs both classes");
  }
  double h = 0, a = 0;
  for (double v : human) h += predict(det, v);
  for (double v : agent) a += 1.0 - predict(det, v);
  return 0.5 * (h / static_cast<double>(human.size()) + a / static_cast<double>(agent.size()));
}

ChannelValues channel_values(std::span<const Session> sessions, RuleChannel channel) {
  ChannelValues out;
  for (const Session& s : sessions) {
    auto& dst = is_human(s.actor) ? out.human : out.other;
    if (channel == RuleChannel::Interval) {
      if (s.actions.size() < 2) continue;
      for (double v : action_intervals(s)) dst.push_back(v);
    } else if (channel == RuleChannel::TapDuration) {
      for (const ActionTrace& a : s.actions) {
        if (a.kind == ActionKind::Tap) dst.push_back(a.duration_ms());
      }
    } else {
      throw Error(ErrorCode::InvalidConfig, "swipe channels are read from a feature matrix");
    }
  }
  return out;
}

ChannelValues channel_values(const FeatureMatrix& matrix, std::size_t feature) {
  ChannelValues out;
  for (const FeatureRow& r : matrix.rows) {
    (is_human(r.actor) ? out.human : out.other).push_back(r.features.values.at(feature));
  }
  return out;
}

namespace {

double fit_and_score(const ChannelValues& train, const ChannelValues& test, const std::string& name) {
  if (train.human.empty() || train.other.empty() || test.human.empty() || test.other.empty()) {
    throw Error(ErrorCode::MissingChannelData,
                "channel \"" + name + "\" lacks data for one class in train or test");
  }
  const ThresholdDetector det = fit_threshold(train.human, train.other, name);
  return threshold_accuracy(det, test.human, test.other);
}

}  // namespace

double rule_accuracy(const LabeledCorpus& corpus, const ChannelSpec& spec) {
  if (corpus.split.empty()) throw Error(ErrorCode::MissingSplit, "corpus has no train/test split");
  std::vector<Session> train, test;
  for (const Session& s : corpus.sessions) {
    auto it = corpus.split.find(s.session_id);
    if (it == corpus.split.end()) {
      throw Error(ErrorCode::MissingSplit, "session " + s.session_id + " has no split");
    }
    (it->second == Split::Train ? train : test).push_back(s);
  }
  if (spec.channel == RuleChannel::Interval) {
    return fit_and_score(channel_values(train, RuleChannel::Interval),
                         channel_values(test, RuleChannel::Interval), "interval_s");
  }
  if (spec.channel == RuleChannel::TapDuration) {
    return fit_and_score(channel_values(train, RuleChannel::TapDuration),
                         channel_values(test, RuleChannel::TapDuration), "tap_duration_ms");
  }
  const FeatureMatrix mtrain = build_feature_matrix(train);
  const FeatureMatrix mtest = build_feature_matrix(test);
  if (spec.feature == "ALL") {
    double best = 0.0;
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
      best = std::max(best, fit_and_score(channel_values(mtrain, f), channel_values(mtest, f),
                                          std::string(feature_names()[f])));
    }
    return best;
  }
  const std::size_t f = feature_index(spec.feature);
  return fit_and_score(channel_values(mtrain, f), channel_values(mtest, f), spec.feature);
}

// ---------------------------------------------------------------------------
// Linear max-margin model

namespace {

struct Standardized {
  std::vector<std::array<double, kFeatureCount>> x;
  std::vector<double> y;  // +1 human, -1 other
  std::vector<double> weight;
};

}  // namespace

LinearMarginModel fit_linear(const FeatureMatrix& train, const LinearOptions& options,
                             std::span<const std::size_t> features) {
  require_two_classes(train, 10);
  if (!(options.regularization > 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "regularization must be > 0");
  }
  if (options.iterations < 1) throw Error(ErrorCode::InvalidConfig, "iterations must be >= 1");
  const auto used = resolve_features(features);
  const std::size_t n = train.rows.size();

  LinearMarginModel model;
  model.regularization = options.regularization;
  model.iterations = options.iterations;
  std::array<bool, kFeatureCount> active{};
  for (std::size_t f : used) {
    double m = 0.0;
    for (const FeatureRow& r : train.rows) m += r.features.values[f];
    m /= static_cast<double>(n);
    double ss = 0.0;
    for (const FeatureRow& r : train.rows) {
      ss += (r.features.values[f] - m) * (r.features.values[f] - m);
    }
    const double sd = std::sqrt(ss / static_cast<double>(n));
    model.feature_means[f] = m;
    model.feature_stds[f] = sd > 0.0 ? sd : 1.0;
    active[f] = sd > 0.0;
  }
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    if (!active[f]) model.feature_stds[f] = model.feature_stds[f] > 0.0 ? model.feature_stds[f] : 1.0;
  }

  Standardized data;
  data.x.resize(n);
  data.y.resize(n);
  data.weight.resize(n);
  double n_h = 0.0;
  for (const FeatureRow& r : train.rows) n_h += is_human(r.actor);
  const double n_o = static_cast<double>(n) - n_h;
  for (std::size_t i = 0; i < n; ++i) {
    const FeatureRow& r = train.rows[i];
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
      data.x[i][f] = active[f]
                         ? (r.features.values[f] - model.feature_means[f]) / model.feature_stds[f]
                         : 0.0;
    }
    data.y[i] = is_human(r.actor) ? 1.0 : -1.0;
    // Each class carries half of the total weight.
    data.weight[i] = 0.5 / (is_human(r.actor) ? n_h : n_o);
  }

  const double lambda = options.regularization;
  std::array<double, kFeatureCount> w{};
  double b = 0.0;
  auto objective = [&](const std::array<double, kFeatureCount>& wv, double bv) {
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double m = bv;
      for (std::size_t f = 0; f < kFeatureCount; ++f) m += wv[f] * data.x[i][f];
      loss += data.weight[i] * std::max(0.0, 1.0 - data.y[i] * m);
    }
    double reg = 0.0;
    for (double v : wv) reg += v * v;
    return loss + 0.5 * lambda * reg;
  };

  double best_obj = objective(w, b);
  std::array<double, kFeatureCount> best_w = w;
  double best_b = b;
  for (int t = 1; t <= options.iterations; ++t) {
    std::array<double, kFeatureCount> grad{};
    double grad_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double m = b;
      for (std::size_t f = 0; f < kFeatureCount; ++f) m += w[f] * data.x[i][f];
      if (data.y[i] * m < 1.0) {
        const double c = data.weight[i] * data.y[i];
        for (std::size_t f = 0; f < kFeatureCount; ++f) grad[f] -= c * data.x[i][f];
        grad_b -= c;
      }
    }
    const double step = options.step0 / std::sqrt(static_cast<double>(t));
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
      w[f] -= step * (grad[f] + lambda * w[f]);
      if (!active[f]) w[f] = 0.0;
    }
    b -= step * grad_b;
    const double obj = objective(w, b);
    if (obj < best_obj) {
      best_obj = obj;
      best_w = w;
      best_b = b;
    }
  }
  model.weights = best_w;
  model.bias = best_b;
  return model;
}

double predict(const LinearMarginModel& model, std::span<const double> x) {
  if (x.size() != kFeatureCount) {
    throw Error(ErrorCode::DimensionMismatch,
                "expected 24 features, got " + std::to_string(x.size()));
  }
  double m = model.bias;
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    if (!std::isfinite(x[f])) throw Error(ErrorCode::NonFinite, "non-finite model input");
    if (model.weights[f] != 0.0) {
      m += model.weights[f] * (x[f] - model.feature_means[f]) / model.feature_stds[f];
    }
  }
  return logistic(m);
}

// ---------------------------------------------------------------------------
// Boosted trees

double RegressionTree::predict(std::span<const double> x) const {
  int i = 0;
  while (nodes[static_cast<std::size_t>(i)].feature >= 0) {
    const TreeNode& node = nodes[static_cast<std::size_t>(i)];
    i = x[static_cast<std::size_t>(node.feature)] < node.threshold ? node.left : node.right;
  }
  return nodes[static_cast<std::size_t>(i)].value;
}

namespace {

double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

class TreeBuilder {
 public:
  TreeBuilder(const std::vector<std::array<double, kFeatureCount>>& x,
              const std::vector<std::vector<std::size_t>>& sorted_by_feature,
              const std::vector<std::size_t>& features, const std::vector<double>& weight,
              const std::vector<double>& residual, const std::vector<double>& hessian,
              int max_depth, double learning_rate)
      : x_(x),
        sorted_(sorted_by_feature),
        features_(features),
        w_(weight),
        r_(residual),
        h_(hessian),
        max_depth_(max_depth),
        lr_(learning_rate),
        member_(x.size(), 0) {}

  RegressionTree build() {
    RegressionTree tree;
    std::vector<std::size_t> all(x_.size());
    std::iota(all.begin(), all.end(), 0);
    grow(tree, all, 0);
    return tree;
  }

 private:
  int grow(RegressionTree& tree, const std::vector<std::size_t>& idx, int depth) {
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    double sw = 0.0, sr = 0.0, sh = 0.0;
    for (std::size_t i : idx) {
      sw += w_[i];
      sr += w_[i] * r_[i];
      sh += w_[i] * h_[i];
    }
    tree.nodes[static_cast<std::size_t>(id)].value = lr_ * sr / std::max(sh, 1e-12);
    if (depth >= max_depth_ || idx.size() < 2) return id;

    // Mark membership so each feature's global ordering can be filtered in
    // linear time.
    ++stamp_;
    for (std::size_t i : idx) member_[i] = stamp_;
    const double parent = sr * sr / sw;
    double best_gain = -std::numeric_limits<double>::infinity();
    int best_feature = -1;
    double best_thr = 0.0;
    for (std::size_t f : features_) {
      double lw = 0.0, lr = 0.0;
      std::size_t seen = 0;
      const auto& order = sorted_[f];
      double prev = 0.0;
      bool have_prev = false;
      for (std::size_t i : order) {
        if (member_[i] != stamp_) continue;
        const double v = x_[i][f];
        if (have_prev && v != prev && seen > 0) {
          const double rw = sw - lw;
          const double rr = sr - lr;
          const double gain = lr * lr / lw + rr * rr / rw - parent;
          if (gain > best_gain + 1e-12) {
            best_gain = gain;
            best_feature = static_cast<int>(f);
            best_thr = prev + 0.5 * (v - prev);
          }
        }
        lw += w_[i];
        lr += w_[i] * r_[i];
        ++seen;
        prev = v;
        have_prev = true;
      }
    }
    if (best_feature < 0) return id;

    std::vector<std::size_t> left, right;
    for (std::size_t i : idx) {
      (x_[i][static_cast<std::size_t>(best_feature)] < best_thr ? left : right).push_back(i);
    }
    tree.nodes[static_cast<std::size_t>(id)].feature = best_feature;
    tree.nodes[static_cast<std::size_t>(id)].threshold = best_thr;
    const int l = grow(tree, left, depth + 1);
    const int r = grow(tree, right, depth + 1);
    tree.nodes[static_cast<std::size_t>(id)].left = l;
    tree.nodes[static_cast<std::size_t>(id)].right = r;
    return id;
  }

  const std::vector<std::array<double, kFeatureCount>>& x_;
  const std::vector<std::vector<std::size_t>>& sorted_;
  const std::vector<std::size_t>& features_;
  const std::vector<double>& w_;
  const std::vector<double>& r_;
  const std::vector<double>& h_;
  int max_depth_;
  double lr_;
  std::vector<std::uint64_t> member_;
  std::uint64_t stamp_ = 0;
};

}  // namespace

BoostedTreeEnsemble fit_boosted(const FeatureMatrix& train, const BoostOptions& options,
                                std::span<const std::size_t> features) {
  require_two_classes(train, 10);
  if (options.rounds < 1 || options.max_depth < 1 ||
      !(options.learning_rate > 0.0 && options.learning_rate <= 1.0)) {
    throw Error(ErrorCode::InvalidConfig,
                "boosting needs rounds >= 1, max_depth >= 1, learning_rate in (0, 1]");
  }
  const auto used = resolve_features(features);
  const std::size_t n = train.rows.size();
  std::vector<std::array<double, kFeatureCount>> x(n);
  std::vector<double> y(n), w(n);
  double n_h = 0.0;
  for (const FeatureRow& r : train.rows) n_h += is_human(r.actor);
  const double n_o = static_cast<double>(n) - n_h;
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = train.rows[i].features.values;
    y[i] = is_human(train.rows[i].actor) ? 1.0 : 0.0;
    w[i] = 0.5 / (y[i] > 0 ? n_h : n_o);
  }
  std::vector<std::vector<std::size_t>> sorted(kFeatureCount);
  for (std::size_t f : used) {
    sorted[f].resize(n);
    std::iota(sorted[f].begin(), sorted[f].end(), 0);
    std::stable_sort(sorted[f].begin(), sorted[f].end(),
                     [&](std::size_t a, std::size_t b) { return x[a][f] < x[b][f]; });
  }

  BoostedTreeEnsemble model;
  model.learning_rate = options.learning_rate;
  model.rounds = options.rounds;
  model.max_depth = options.max_depth;
  // Class-balanced weights make the weighted prior 0.5, so the base logit is 0.
  model.base_score = 0.0;

  std::vector<double> score(n, model.base_score);
  auto loss_of = [&](const std::vector<double>& s) {
    double l = 0.0;
    for (std::size_t i = 0; i < n; ++i) l += w[i] * (softplus(s[i]) - y[i] * s[i]);
    return l;
  };
  double loss = loss_of(score);
  model.train_loss.push_back(loss);

  std::vector<double> residual(n), hessian(n), trial(n);
  for (int round = 0; round < options.rounds; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      const double p = logistic(score[i]);
      residual[i] = y[i] - p;
      hessian[i] = p * (1.0 - p);
    }
    TreeBuilder builder(x, sorted, used, w, residual, hessian, options.max_depth,
                        options.learning_rate);
    RegressionTree tree = builder.build();

    // Backtrack on the leaf scale so the training loss never increases.
    double scale = 1.0;
    double new_loss = loss;
    for (int attempt = 0; attempt < 30; ++attempt) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = score[i] + scale * tree.predict(x[i]);
      new_loss = loss_of(trial);
      if (new_loss <= loss) break;
      scale *= 0.5;
    }
    if (new_loss > loss) {
      scale = 0.0;
      new_loss = loss;
    }
    if (scale != 1.0) {
      for (TreeNode& node : tree.nodes) node.value *= scale;
    }
    for (std::size_t i = 0; i < n; ++i) score[i] += tree.predict(x[i]);
    loss = loss_of(score);
    model.train_loss.push_back(loss);
    model.trees.push_back(std::move(tree));
  }
  return model;
}

double predict(const BoostedTreeEnsemble& model, std::span<const double> x) {
  if (x.size() != kFeatureCount) {
    throw Error(ErrorCode::DimensionMismatch,
                "expected 24 features, got " + std::to_string(x.size()));
  }
  for (double v : x) {
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "non-finite model input");
  }
  double s = model.base_score;
  for (const RegressionTree& t : model.trees) s += t.predict(x);
  return logistic(s);
}

namespace {

template <class Model>
double accuracy_of(const Model& model, const FeatureMatrix& rows) {
  std::vector<int> truth, pred;
  truth.reserve(rows.rows.size());
  pred.reserve(rows.rows.size());
  for (const FeatureRow& r : rows.rows) {
    truth.push_back(is_human(r.actor));
    pred.push_back(predict(model, r.features.values) >= 0.5);
  }
  return balanced_accuracy(truth, pred);
}

}  // namespace

double model_accuracy(const LinearMarginModel& model, const FeatureMatrix& rows) {
  return accuracy_of(model, rows);
}

double model_accuracy(const BoostedTreeEnsemble& model, const FeatureMatrix& rows) {
  return accuracy_of(model, rows);
}

std::vector<SubsetCurvePoint> feature_subset_curve(const FeatureMatrix& train,
                                                   const FeatureMatrix& test, ModelKind kind,
                                                   std::span<const std::size_t> subset_sizes,
                                                   int trials, std::uint64_t seed,
                                                   const DetectorOptions& options) {
  if (trials < 1) throw Error(ErrorCode::InvalidConfig, "trials must be >= 1");
  std::vector<SubsetCurvePoint> curve;
  for (std::size_t size : subset_sizes) {
    if (size < 1 || size > kFeatureCount) {
      throw Error(ErrorCode::InvalidConfig, "subset sizes must lie in 1..24");
    }
    Rng rng = derive_rng(seed, "feature-subset", std::to_string(size));
    const int runs = size == kFeatureCount ? 1 : trials;
    std::vector<double> acc;
    for (int t = 0; t < runs; ++t) {
      std::vector<std::size_t> pool = all_features();
      for (std::size_t i = 0; i < size; ++i) {
        std::swap(pool[i], pool[i + rng.index(kFeatureCount - i)]);
      }
      std::vector<std::size_t> subset(pool.begin(), pool.begin() + static_cast<long>(size));
      std::sort(subset.begin(), subset.end());
      double a = 0.0;
      switch (kind) {
        case ModelKind::Linear:
          a = model_accuracy(fit_linear(train, options.linear, subset), test);
          break;
        case ModelKind::Boosted:
          a = model_accuracy(fit_boosted(train, options.boost, subset), test);
          break;
        case ModelKind::Threshold: {
          ThresholdDetector best;
          best.train_accuracy = -1.0;
          std::size_t best_f = subset.front();
          for (std::size_t f : subset) {
            const auto cv = channel_values(train, f);
            auto det = fit_threshold(cv.human, cv.other, std::string(feature_names()[f]));
            if (det.train_accuracy > best.train_accuracy) {
              best = det;
              best_f = f;
            }
          }
          const auto tv = channel_values(test, best_f);
          a = threshold_accuracy(best, tv.human, tv.other);
          break;
        }
      }
      acc.push_back(a);
    }
    curve.push_back({size, mean(acc), stddev(acc), acc.size()});
  }
  return curve;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

Json array_json(const std::array<double, kFeatureCount>& a) {
  Json j = Json::array();
  for (double v : a) j.push_back(v);
  return j;
}

std::array<double, kFeatureCount> array_from(const Json& j, const char* field) {
  if (!j.is_array() || j.size() != kFeatureCount) {
    throw SchemaViolation(field, "expected an array of 24 numbers");
  }
  std::array<double, kFeatureCount> a{};
  for (std::size_t i = 0; i < kFeatureCount; ++i) a[i] = j[i].get<double>();
  return a;
}

}  // namespace

Json model_to_json(const DetectorModel& model) {
  Json doc = Json::object();
  doc["schema"] = std::string(kModelSchema);
  if (const auto* t = std::get_if<ThresholdDetector>(&model)) {
    doc["kind"] = "threshold";
    doc["feature"] = t->feature;
    doc["threshold"] = std::isinf(t->threshold) ? Json(t->threshold > 0 ? "inf" : "-inf")
                                                : Json(t->threshold);
    doc["polarity"] = t->polarity == Polarity::HumanBelow ? "human_below" : "human_above";
    doc["train_accuracy"] = t->train_accuracy;
  } else if (const auto* l = std::get_if<LinearMarginModel>(&model)) {
    doc["kind"] = "linear";
    doc["hyperparameters"] = {{"regularization", l->regularization},
                              {"iterations", l->iterations}};
    doc["feature_names"] = feature_names();
    doc["feature_means"] = array_json(l->feature_means);
    doc["feature_stds"] = array_json(l->feature_stds);
    doc["weights"] = array_json(l->weights);
    doc["bias"] = l->bias;
  } else {
    const auto& b = std::get<BoostedTreeEnsemble>(model);
    doc["kind"] = "boosted";
    doc["hyperparameters"] = {{"rounds", b.rounds},
                              {"max_depth", b.max_depth},
                              {"learning_rate", b.learning_rate}};
    doc["feature_names"] = feature_names();
    doc["base_score"] = b.base_score;
    Json trees = Json::array();
    for (const RegressionTree& t : b.trees) {
      Json feat = Json::array(), thr = Json::array(), left = Json::array(),
           right = Json::array(), value = Json::array();
      for (const TreeNode& n : t.nodes) {
        feat.push_back(n.feature);
        thr.push_back(n.threshold);
        left.push_back(n.left);
        right.push_back(n.right);
        value.push_back(n.value);
      }
      trees.push_back({{"feature", feat},
                       {"threshold", thr},
                       {"left", left},
                       {"right", right},
                       {"value", value}});
    }
    doc["trees"] = std::move(trees);
    doc["train_loss"] = b.train_loss;
  }
  return doc;
}

DetectorModel model_from_json(const Json& doc) {
  if (!doc.is_object() || doc.value("schema", "") != kModelSchema) {
    throw SchemaViolation("schema", "expected \"" + std::string(kModelSchema) + "\"");
  }
  const std::string kind = doc.value("kind", "");
  try {
    if (kind == "threshold") {
      ThresholdDetector t;
      t.feature = doc.at("feature").get<std::string>();
      const Json& thr = doc.at("threshold");
      t.threshold = thr.is_string() ? (thr.get<std::string>() == "inf" ? kInf : -kInf)
                                    : thr.get<double>();
      t.polarity = doc.at("polarity") == "human_below" ? Polarity::HumanBelow
                                                        : Polarity::HumanAbove;
      t.train_accuracy = doc.at("train_accuracy").get<double>();
      return t;
    }
    if (kind == "linear") {
      LinearMarginModel l;
      l.regularization = doc.at("hyperparameters").at("regularization").get<double>();
      l.iterations = doc.at("hyperparameters").at("iterations").get<int>();
      l.feature_means = array_from(doc.at("feature_means"), "feature_means");
      l.feature_stds = array_from(doc.at("feature_stds"), "feature_stds");
      l.weights = array_from(doc.at("weights"), "weights");
      l.bias = doc.at("bias").get<double>();
      return l;
    }
    if (kind == "boosted") {
      BoostedTreeEnsemble b;
      const Json& hp = doc.at("hyperparameters");
      b.rounds = hp.at("rounds").get<int>();
      b.max_depth = hp.at("max_depth").get<int>();
      b.learning_rate = hp.at("learning_rate").get<double>();
      b.base_score = doc.at("base_score").get<double>();
      for (const Json& jt : doc.at("trees")) {
        RegressionTree t;
        const std::size_t count = jt.at("feature").size();
        for (std::size_t i = 0; i < count; ++i) {
          TreeNode n{jt.at("feature")[i].get<int>(), jt.at("threshold")[i].get<double>(),
                     jt.at("left")[i].get<int>(), jt.at("right")[i].get<int>(),
                     jt.at("value")[i].get<double>()};
          if (n.feature >= static_cast<int>(kFeatureCount) ||
              (n.feature >= 0 && (n.left < 0 || n.right < 0 ||
                                  n.left >= static_cast<int>(count) ||
                                  n.right >= static_cast<int>(count)))) {
            throw SchemaViolation("trees", "invalid node " + std::to_string(i));
          }
          if (!std::isfinite(n.value)) throw SchemaViolation("trees", "non-finite leaf value");
          t.nodes.push_back(n);
        }
        if (t.nodes.empty()) throw SchemaViolation("trees", "empty tree");
        b.trees.push_back(std::move(t));
      }
      if (doc.contains("train_loss")) b.train_loss = doc.at("train_loss").get<std::vector<double>>();
      return b;
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaViolation(kind, e.what());
  }
  throw SchemaViolation("kind", "unknown model kind \"" + kind + "\"");
}

}  // namespace touchbench
