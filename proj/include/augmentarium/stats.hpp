#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace augmentarium::stats {

/// Per-repetition accuracies of one experimental arm.
struct RunSet {
  std::vector<double> accuracies;

  /// Throws TooFewRuns when empty, InvalidArgument for values outside [0, 1].
  void validate() const;
};

double mean(std::span<const double> xs);
/// Sample standard deviation (n - 1 denominator); 0 for fewer than two values.
double sample_std(std::span<const double> xs);

/// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double regularized_incomplete_beta(double x, double a, double b);

/// P(|T| >= |t|) for Student's t with df degrees of freedom.
double student_t_two_tailed_p(double t, double df);

struct TTestResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;
};

/// Welch's unequal-variance two-sample test, two-tailed.
///
/// When both samples have zero variance the statistic is degenerate: equal
/// means give t = 0, p = 1; different means give t = +-inf, p = 0. df is then
/// reported as n_a + n_b - 2. Throws TooFewRuns when either side has fewer
/// than two values.
TTestResult welch_ttest(std::span<const double> a, std::span<const double> b);

/// Classic pooled-variance two-sample test, two-tailed (df = n_a + n_b - 2).
TTestResult pooled_ttest(std::span<const double> a, std::span<const double> b);

enum class Outcome { Win, Loss, Tie };

std::string_view to_string(Outcome o);

struct Verdict {
  double p_value = 1.0;
  /// mean(method) - mean(baseline)
  double mean_diff = 0.0;
  Outcome outcome = Outcome::Tie;
};

inline constexpr double kDefaultSignificance = 0.05;

/// Win when p < alpha_sig and the method's mean is higher, Loss when p <
/// alpha_sig and it is lower, Tie otherwise.
Verdict compare(const RunSet& method, const RunSet& baseline, double alpha_sig = kDefaultSignificance,
                bool pooled = false);

struct Tally {
  std::size_t wins = 0;
  std::size_t losses = 0;

  bool operator==(const Tally&) const = default;
};

Tally tally(std::span<const Verdict> verdicts);

/// Signed significance for heatmaps: 1 - p for an improvement, -(1 - p) for a
/// degradation, 0 when p = 1 or the means are equal.
double heatmap_value(const Verdict& v);

}  // namespace augmentarium::stats
