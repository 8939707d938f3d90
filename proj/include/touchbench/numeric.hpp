#pragma once

#include <span>
#include <string>
#include <vector>

namespace touchbench {

// Linear interpolation between order statistics (q in [0, 1]).
double percentile(std::span<const double> values, double q);
double percentile_sorted(std::span<const double> sorted, double q);
double median(std::span<const double> values);
double mean(std::span<const double> values);
// Population standard deviation.
double stddev(std::span<const double> values);

double logistic(double z);

// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

}  // namespace touchbench
