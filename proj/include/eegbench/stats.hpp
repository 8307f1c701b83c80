#pragma once

#include <span>
#include <vector>

namespace eegbench {

struct AnovaResult {
  double f = 0;
  double p = 1;
  double df_between = 0;
  double df_within = 0;
};

// One-way ANOVA. Needs at least two groups of at least two values and nonzero
// within-group variation.
AnovaResult anova_oneway(const std::vector<std::vector<double>>& groups);

// Spearman rank correlation with average ranks for ties.
double spearman(std::span<const double> x, std::span<const double> y);

// Ranks starting at 1; ties share their average rank.
std::vector<double> average_ranks(std::span<const double> x);

// Five-number summary; quartiles by linear interpolation between order statistics.
struct Quartiles {
  double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
};
Quartiles quartiles(std::span<const double> x);
double quantile_linear(std::span<const double> sorted, double q);

// Divide-by-(n-1) standard deviation; 0 for fewer than two values.
double sample_std(std::span<const double> x);

}  // namespace eegbench
