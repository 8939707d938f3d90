#include "touchbench/theory.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "touchbench/error.hpp"
#include "touchbench/features.hpp"
#include "touchbench/numeric.hpp"

namespace touchbench {

namespace {

const double kLn2 = std::numbers::ln2;
const double kLn4 = 2.0 * std::numbers::ln2;

void check_pair(const SampleSet& p, const SampleSet& q, int bins) {
  if (p.dim != q.dim) {
    throw Error(ErrorCode::DimensionMismatch, "sample sets have dimensions " + std::to_string(p.dim) +
                                                  " and " + std::to_string(q.dim));
  }
  if (p.dim < 1 || p.dim > 2) throw Error(ErrorCode::DimensionMismatch, "only 1D and 2D samples");
  if (p.size() < kMinJsdSamples || q.size() < kMinJsdSamples) {
    throw Error(ErrorCode::TooFewSamples, "divergence estimates need at least 100 points per set");
  }
  if (bins < 1) throw Error(ErrorCode::InvalidConfig, "bins must be >= 1");
  for (const SampleSet* s : {&p, &q}) {
    for (double v : s->values) {
      if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "non-finite sample in " + s->label);
    }
  }
}

// Equal-width grid over the pooled range; returns normalized masses of both
// sets, plus each point's cell index.
struct Histogram {
  std::vector<double> p, q;
  std::vector<std::size_t> cell_p, cell_q;
};

Histogram histogram(const SampleSet& p, const SampleSet& q, int bins) {
  const int d = p.dim;
  std::vector<double> lo(static_cast<std::size_t>(d), INFINITY), hi(static_cast<std::size_t>(d), -INFINITY);
  for (const SampleSet* s : {&p, &q}) {
    for (std::size_t i = 0; i < s->values.size(); ++i) {
      const std::size_t k = i % static_cast<std::size_t>(d);
      lo[k] = std::min(lo[k], s->values[i]);
      hi[k] = std::max(hi[k], s->values[i]);
    }
  }
  auto cell = [&](const SampleSet& s, std::size_t row) {
    std::size_t idx = 0;
    for (int k = 0; k < d; ++k) {
      const auto uk = static_cast<std::size_t>(k);
      const double v = s.values[row * static_cast<std::size_t>(d) + uk];
      std::size_t b = 0;
      if (hi[uk] > lo[uk]) {
        b = static_cast<std::size_t>(std::floor((v - lo[uk]) / (hi[uk] - lo[uk]) * bins));
        b = std::min(b, static_cast<std::size_t>(bins - 1));
      }
      idx = idx * static_cast<std::size_t>(bins) + b;
    }
    return idx;
  };
  std::size_t cells = 1;
  for (int k = 0; k < d; ++k) cells *= static_cast<std::size_t>(bins);
  Histogram h;
  h.p.assign(cells, 0.0);
  h.q.assign(cells, 0.0);
  for (std::size_t i = 0; i < p.size(); ++i) {
    h.cell_p.push_back(cell(p, i));
    h.p[h.cell_p.back()] += 1.0;
  }
  for (std::size_t i = 0; i < q.size(); ++i) {
    h.cell_q.push_back(cell(q, i));
    h.q[h.cell_q.back()] += 1.0;
  }
  for (double& v : h.p) v /= static_cast<double>(p.size());
  for (double& v : h.q) v /= static_cast<double>(q.size());
  return h;
}

// a*log(a/m) with the 0 log 0 = 0 convention.
double xlog(double a, double m) { return a > 0.0 ? a * std::log(a / m) : 0.0; }

double jsd_from(const Histogram& h) {
  double s = 0.0;
  for (std::size_t i = 0; i < h.p.size(); ++i) {
    const double a = h.p[i], b = h.q[i];
    const double m = 0.5 * (a + b);
    // a+b is commutative in IEEE arithmetic, so this is exactly symmetric.
    s += 0.5 * (xlog(a, m) + xlog(b, m));
  }
  return std::clamp(s, 0.0, kLn2);
}

}  // namespace

SampleSet SampleSet::one_d(std::vector<double> v, std::string label) {
  return SampleSet{1, std::move(v), std::move(label)};
}

DivergenceEstimate estimate_jsd(const SampleSet& p, const SampleSet& q, int bins) {
  check_pair(p, q, bins);
  return {jsd_from(histogram(p, q, bins)), DivergenceMethod::Histogram, bins};
}

DetectorValue optimal_detector_value(const SampleSet& p, const SampleSet& q, int bins) {
  check_pair(p, q, bins);
  const Histogram h = histogram(p, q, bins);
  double ep = 0.0, eq = 0.0;
  for (std::size_t c : h.cell_p) ep += std::log(h.p[c] / (h.p[c] + h.q[c]));
  for (std::size_t c : h.cell_q) eq += std::log(h.q[c] / (h.p[c] + h.q[c]));
  DetectorValue out;
  out.value = ep / static_cast<double>(p.size()) + eq / static_cast<double>(q.size());
  out.jsd_nats = jsd_from(h);
  return out;
}

SmoothingResult verify_smoothing(const SampleSet& p, const SampleSet& g, double sigma,
                                 std::uint64_t seed, int bins) {
  if (!(sigma >= 0.0)) throw Error(ErrorCode::InvalidConfig, "sigma must be >= 0");
  SmoothingResult r;
  r.jsd_raw = estimate_jsd(p, g, bins).jsd_nats;
  SampleSet smoothed = g;
  if (sigma > 0.0) {
    Rng rng = derive_rng(seed, "smoothing");
    for (double& v : smoothed.values) v += rng.normal(0.0, sigma);
  }
  r.jsd_smoothed = estimate_jsd(p, smoothed, bins).jsd_nats;
  return r;
}

double wasserstein_1d(std::span<const double> a, std::span<const double> b, std::uint64_t seed) {
  if (a.empty() || b.empty()) throw Error(ErrorCode::EmptyInput, "W1 needs non-empty samples");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  if (x.size() != y.size()) {
    std::vector<double>& big = x.size() > y.size() ? x : y;
    const std::size_t keep = std::min(x.size(), y.size());
    Rng rng = derive_rng(seed, "w1-subsample");
    for (std::size_t i = 0; i < keep; ++i) std::swap(big[i], big[i + rng.index(big.size() - i)]);
    big.resize(keep);
  }
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += std::abs(x[i] - y[i]);
  return s / static_cast<double>(x.size());
}

double wasserstein_1d_exact(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw Error(ErrorCode::EmptyInput, "W1 needs non-empty samples");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double na = static_cast<double>(x.size()), nb = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double prev = std::min(x.front(), y.front());
  double total = 0.0;
  while (i < x.size() || j < y.size()) {
    const double next = j >= y.size() || (i < x.size() && x[i] <= y[j]) ? x[i] : y[j];
    total += std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb) * (next - prev);
    while (i < x.size() && x[i] == next) ++i;
    while (j < y.size() && y[j] == next) ++j;
    prev = next;
  }
  return total;
}

std::vector<ConvergencePoint> verify_history_convergence(const SampleGenerator& reference,
                                                         const SampleGenerator& sample,
                                                         std::span<const std::size_t> sizes,
                                                         int trials, std::uint64_t seed,
                                                         std::size_t reference_size) {
  if (trials < 1) throw Error(ErrorCode::InvalidConfig, "trials must be >= 1");
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (sizes[i] < 1 || (i > 0 && sizes[i] <= sizes[i - 1])) {
      throw Error(ErrorCode::InvalidConfig, "sizes must be positive and increasing");
    }
  }
  Rng ref_rng = derive_rng(seed, "convergence.reference");
  std::vector<double> ref(reference_size);
  for (double& v : ref) v = reference(ref_rng);
  std::vector<ConvergencePoint> out;
  for (std::size_t n : sizes) {
    double sum = 0.0;
    for (int t = 0; t < trials; ++t) {
      Rng rng = derive_rng(seed, "convergence.sample", std::to_string(n) + "/" + std::to_string(t));
      std::vector<double> draw(n);
      for (double& v : draw) v = sample(rng);
      sum += wasserstein_1d_exact(draw, ref);
    }
    out.push_back({n, sum / trials});
  }
  return out;
}

double gaussian_jsd_quadrature(double mu1, double sd1, double mu2, double sd2, int nodes) {
  if (!(sd1 > 0 && sd2 > 0) || nodes < 3) {
    throw Error(ErrorCode::InvalidConfig, "quadrature needs positive sds and >= 3 nodes");
  }
  auto pdf = [](double x, double mu, double sd) {
    const double z = (x - mu) / sd;
    return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
  };
  const double lo = std::min(mu1 - 14 * sd1, mu2 - 14 * sd2);
  const double hi = std::max(mu1 + 14 * sd1, mu2 + 14 * sd2);
  const double h = (hi - lo) / (nodes - 1);
  double s = 0.0;
  for (int i = 0; i < nodes; ++i) {
    const double x = lo + i * h;
    const double a = pdf(x, mu1, sd1), b = pdf(x, mu2, sd2);
    const double m = 0.5 * (a + b);
    const double f = 0.5 * (xlog(a, m) + xlog(b, m));
    s += (i == 0 || i == nodes - 1) ? 0.5 * f : f;
  }
  return std::clamp(s * h, 0.0, kLn2);
}

PipelineDivergence pipeline_divergence_report(std::span<const Session> raw,
                                              std::span<const Session> humanized,
                                              std::span<const Session> human,
                                              std::string_view feature, int bins) {
  const std::size_t f = feature_index(feature);
  auto column = [&](std::span<const Session> sessions, const char* label) {
    SampleSet s;
    s.label = label;
    for (const FeatureRow& r : build_feature_matrix(sessions).rows) {
      s.values.push_back(r.features.values[f]);
    }
    return s;
  };
  const SampleSet r = column(raw, "raw"), z = column(humanized, "humanized"),
                  h = column(human, "human");
  return {estimate_jsd(r, h, bins).jsd_nats, estimate_jsd(z, h, bins).jsd_nats};
}

// ---------------------------------------------------------------------------
// Report

namespace {

SampleSet gaussian_sample(std::uint64_t seed, std::string_view purpose, std::size_t n, double mu,
                          double sd) {
  Rng rng = derive_rng(seed, purpose);
  SampleSet s;
  s.label = std::string(purpose);
  s.values.resize(n);
  for (double& v : s.values) v = rng.normal(mu, sd);
  return s;
}

std::string params(std::initializer_list<std::pair<const char*, std::string>> kv) {
  std::string out;
  for (const auto& [k, v] : kv) {
    if (!out.empty()) out += ';';
    out += std::string(k) + "=" + v;
  }
  return out;
}

}  // namespace

TheoryReport run_theory_checks(const TheoryOptions& o) {
  TheoryReport report;
  const std::string n = std::to_string(o.samples);
  const std::string bins = std::to_string(o.bins);

  // Optimal detector value against quadrature.
  {
    const SampleSet p = gaussian_sample(o.seed, "t1.p", o.samples, 0.0, 1.0);
    const SampleSet q = gaussian_sample(o.seed, "t1.q", o.samples, 1.0, 1.0);
    const double jsd = gaussian_jsd_quadrature(0.0, 1.0, 1.0, 1.0);
    const DetectorValue v = optimal_detector_value(p, q, o.bins);
    const double oracle = -kLn4 + 2.0 * jsd;
    TheoryCheck c{"detector_value_gaussians", params({{"n", n}, {"bins", bins}, {"means", "0|1"}}),
                  v.value, oracle, std::abs(v.value - oracle) <= 0.05};
    const SampleSet p2 = gaussian_sample(o.seed, "t1.same", o.samples, 0.0, 1.0);
    const DetectorValue same = optimal_detector_value(p, p2, o.bins);
    TheoryCheck d{"detector_value_identical", params({{"n", n}, {"bins", bins}}), same.value, -kLn4,
                  std::abs(same.value + kLn4) <= 0.02};
    report.optimal_value_ok = c.pass && d.pass;
    report.checks.push_back(c);
    report.checks.push_back(d);
  }

  // Smoothing a point mass against a Gaussian.
  {
    const SampleSet p = gaussian_sample(o.seed, "t2.p", o.samples, 0.0, 1.0);
    SampleSet g;
    g.label = "point-mass";
    g.values.assign(o.samples, 0.0);
    std::vector<double> sigmas = o.sigmas;
    std::sort(sigmas.begin(), sigmas.end());
    bool ok = !sigmas.empty();
    double prev = INFINITY;
    for (double sigma : sigmas) {
      const SmoothingResult r = verify_smoothing(p, g, sigma, o.seed, o.bins);
      const bool pass = sigma > 0.0 ? r.jsd_smoothed < r.jsd_raw && r.jsd_smoothed < prev
                                    : r.jsd_smoothed == r.jsd_raw;
      const std::optional<double> oracle =
          sigma > 0.0 ? std::optional<double>(gaussian_jsd_quadrature(0.0, 1.0, 0.0, sigma))
                      : std::nullopt;
      report.checks.push_back({"smoothing", params({{"sigma", format_double(sigma)}, {"n", n},
                                                    {"bins", bins},
                                                    {"jsd_raw", format_double(r.jsd_raw)}}),
                               r.jsd_smoothed, oracle, pass});
      ok = ok && pass;
      prev = r.jsd_smoothed;
    }
    report.smoothing_ok = ok;
  }

  // Empirical-measure convergence and the point-mass contrast.
  {
    const SampleGenerator gauss = [](Rng& r) { return r.normal(); };
    const SampleGenerator zero = [](Rng&) { return 0.0; };
    const auto conv = verify_history_convergence(gauss, gauss, o.sizes, o.trials, o.seed);
    const auto contrast = verify_history_convergence(gauss, zero, o.sizes, o.trials, o.seed);
    bool ok = !conv.empty();
    for (std::size_t i = 0; i < conv.size(); ++i) {
      const bool decreasing = i == 0 || conv[i].mean_w1 < conv[i - 1].mean_w1;
      report.checks.push_back({"w1_empirical",
                               params({{"n", std::to_string(conv[i].n)},
                                       {"trials", std::to_string(o.trials)}}),
                               conv[i].mean_w1, std::nullopt, decreasing});
      ok = ok && decreasing;
    }
    if (conv.size() >= 2) {
      // N^{-1/2} scaling, with a factor-two allowance.
      const double predicted = conv.front().mean_w1 *
                               std::sqrt(static_cast<double>(conv.front().n) / conv.back().n);
      const bool pass = conv.back().mean_w1 <= 2.0 * predicted;
      report.checks.push_back({"w1_scaling",
                               params({{"n_first", std::to_string(conv.front().n)},
                                       {"n_last", std::to_string(conv.back().n)}}),
                               conv.back().mean_w1, predicted, pass});
      ok = ok && pass;
    }
    const double expected = std::sqrt(2.0 / std::numbers::pi);
    for (const ConvergencePoint& c : contrast) {
      const bool pass = std::abs(c.mean_w1 - expected) <= 0.02;
      report.checks.push_back({"w1_point_mass", params({{"n", std::to_string(c.n)}}), c.mean_w1,
                               expected, pass});
      ok = ok && pass;
    }
    report.convergence_ok = ok;
  }
  return report;
}

void write_theory_csv(const TheoryReport& report, std::ostream& out) {
  out << "experiment,parameters,estimate,oracle,pass\n";
  for (const TheoryCheck& c : report.checks) {
    out << c.experiment << ',' << c.parameters << ',' << format_double(c.estimate) << ','
        << (c.oracle ? format_double(*c.oracle) : std::string()) << ','
        << (c.pass ? "PASS" : "FAIL") << '\n';
  }
}

Json theory_to_json(const TheoryReport& report) {
  Json checks = Json::array();
  for (const TheoryCheck& c : report.checks) {
    Json j = Json::object();
    j["experiment"] = c.experiment;
    j["parameters"] = c.parameters;
    j["estimate"] = c.estimate;
    j["oracle"] = c.oracle ? Json(*c.oracle) : Json(nullptr);
    j["pass"] = c.pass;
    checks.push_back(std::move(j));
  }
  Json doc = Json::object();
  doc["optimal_value_ok"] = report.optimal_value_ok;
  doc["smoothing_ok"] = report.smoothing_ok;
  doc["convergence_ok"] = report.convergence_ok;
  doc["checks"] = std::move(checks);
  return doc;
}

}  // namespace touchbench
