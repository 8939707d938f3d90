#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "touchbench/events.hpp"
#include "touchbench/rng.hpp"

namespace touchbench {

// Points of dimension 1 or 2, stored row-major.
struct SampleSet {
  int dim = 1;
  std::vector<double> values;
  std::string label;

  std::size_t size() const { return dim > 0 ? values.size() / static_cast<std::size_t>(dim) : 0; }

  static SampleSet one_d(std::vector<double> v, std::string label = {});
};

enum class DivergenceMethod { Histogram, Quadrature };

struct DivergenceEstimate {
  double jsd_nats = 0.0;  // clamped to [0, ln 2]
  DivergenceMethod method = DivergenceMethod::Histogram;
  int bins = 0;  // per dimension, or quadrature nodes
};

inline constexpr int kDefaultJsdBins = 64;
inline constexpr std::size_t kMinJsdSamples = 100;

// Equal-width histogram over the pooled range. Throws DimensionMismatch,
// TooFewSamples, NonFinite.
DivergenceEstimate estimate_jsd(const SampleSet& p, const SampleSet& q, int bins = kDefaultJsdBins);

struct DetectorValue {
  double value = 0.0;  // achieved cross-entropy objective, nats
  double jsd_nats = 0.0;
};

// Plug-in discriminator D = p/(p+q) on the histogram, evaluated on both
// samples: E_p[log D] + E_q[log(1 - D)].
DetectorValue optimal_detector_value(const SampleSet& p, const SampleSet& q,
                                     int bins = kDefaultJsdBins);

struct SmoothingResult {
  double jsd_raw = 0.0;
  double jsd_smoothed = 0.0;
};

// Adds Gaussian(0, sigma^2) noise to every point of g (sigma = 0 keeps g).
SmoothingResult verify_smoothing(const SampleSet& p, const SampleSet& g, double sigma,
                                 std::uint64_t seed, int bins = kDefaultJsdBins);

// W1 of two equal-size empirical measures by sorted matching; the larger set
// is subsampled without replacement (seeded) when sizes differ.
double wasserstein_1d(std::span<const double> a, std::span<const double> b, std::uint64_t seed = 0);

// Exact W1 between empirical measures of any sizes, as the integral of
// |F_a - F_b|.
double wasserstein_1d_exact(std::span<const double> a, std::span<const double> b);

struct ConvergencePoint {
  std::size_t n = 0;
  double mean_w1 = 0.0;
};

using SampleGenerator = std::function<double(Rng&)>;

// Mean W1 between N-point samples of `sample` and a large reference sample
// of `reference`. Passing the same generator twice gives the convergence of
// the empirical measure; a different `sample` gives the contrast case.
std::vector<ConvergencePoint> verify_history_convergence(const SampleGenerator& reference,
                                                         const SampleGenerator& sample,
                                                         std::span<const std::size_t> sizes,
                                                         int trials, std::uint64_t seed,
                                                         std::size_t reference_size = 200000);

// JSD between two 1D Gaussians by trapezoid quadrature of the integrand.
double gaussian_jsd_quadrature(double mu1, double sd1, double mu2, double sd2, int nodes = 40001);

struct PipelineDivergence {
  double jsd_raw_vs_human = 0.0;
  double jsd_humanized_vs_human = 0.0;
};

// Compares the marginal of one swipe feature across three session sets.
PipelineDivergence pipeline_divergence_report(std::span<const Session> raw,
                                              std::span<const Session> humanized,
                                              std::span<const Session> human,
                                              std::string_view feature,
                                              int bins = kDefaultJsdBins);

struct TheoryCheck {
  std::string experiment;
  std::string parameters;
  double estimate = 0.0;
  std::optional<double> oracle;
  bool pass = false;
};

struct TheoryOptions {
  std::uint64_t seed = 7;
  std::size_t samples = 100000;
  std::vector<double> sigmas{0.1, 0.5, 1.0};
  std::vector<std::size_t> sizes{100, 400, 1600, 6400};
  int trials = 50;
  int bins = kDefaultJsdBins;
};

struct TheoryReport {
  std::vector<TheoryCheck> checks;
  // One verdict per check family.
  bool optimal_value_ok = false;
  bool smoothing_ok = false;
  bool convergence_ok = false;

  bool all_pass() const { return optimal_value_ok && smoothing_ok && convergence_ok; }
};

TheoryReport run_theory_checks(const TheoryOptions& options);

void write_theory_csv(const TheoryReport& report, std::ostream& out);
Json theory_to_json(const TheoryReport& report);

}  // namespace touchbench
