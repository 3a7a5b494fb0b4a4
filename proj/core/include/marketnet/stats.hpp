#pragma once

#include <span>
#include <vector>

namespace marketnet::stats {

double mean(std::span<const double> values);

// Percentile with linear interpolation between closest ranks
// (position q/100 * (n-1) in the sorted sample). q in [0, 100].
double percentile(std::span<const double> values, double q);

// Median; even-sized samples average the two middle order statistics.
double median(std::span<const double> values);

// Pearson correlation with population moments. Returns 0 when either
// series has zero variance.
double pearson(std::span<const double> x, std::span<const double> y);

}  // namespace marketnet::stats
