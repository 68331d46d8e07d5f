#pragma once

#include <span>

namespace btud {

struct TTestResult {
    double t = 0.0;
    double df = 0.0;
    double p_value = 1.0;  ///< two-sided
};

/// Welch two-sample t-test (unequal variances). Needs >= 2 values per group.
TTestResult welch_t_test(std::span<const double> a, std::span<const double> b);

double pearson_correlation(std::span<const double> a, std::span<const double> b);

/// Pearson correlation of mid-ranks (ties receive their average rank).
double spearman_correlation(std::span<const double> a, std::span<const double> b);

}  // namespace btud
