#include "augmentarium/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "augmentarium/error.hpp"

namespace augmentarium::stats {

void RunSet::validate() const {
  if (accuracies.empty()) throw Error(ErrorCode::TooFewRuns, "empty run set");
  for (double a : accuracies) {
    if (!(a >= 0.0 && a <= 1.0)) {
      throw Error(ErrorCode::InvalidArgument, "accuracy " + std::to_string(a) + " outside [0, 1]");
    }
  }
}

double mean(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double sample_std(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

namespace {

// Modified Lentz evaluation of the continued fraction for I_x(a, b); converges
// quickly for x < (a + 1) / (a + b + 2).
double beta_continued_fraction(double x, double a, double b) {
  constexpr int kMaxIter = 10000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

void require_runs(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) {
    throw Error(ErrorCode::TooFewRuns, "a t-test needs at least two runs per side");
  }
}

TTestResult degenerate(double diff, double df) {
  if (diff == 0.0) return {0.0, df, 1.0};
  return {std::copysign(std::numeric_limits<double>::infinity(), diff), df, 0.0};
}

}  // namespace

double regularized_incomplete_beta(double x, double a, double b) {
  if (!(a > 0.0 && b > 0.0)) throw Error(ErrorCode::InvalidArgument, "beta parameters must be positive");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                           b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(x, a, b) / a;
  return 1.0 - front * beta_continued_fraction(1.0 - x, b, a) / b;
}

double student_t_two_tailed_p(double t, double df) {
  if (std::isnan(t) || !(df > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  if (std::isinf(t)) return 0.0;
  if (t == 0.0) return 1.0;
  const double x = df / (df + t * t);
  const double p = regularized_incomplete_beta(x, df / 2.0, 0.5);
  return std::min(1.0, std::max(0.0, p));
}

TTestResult welch_ttest(std::span<const double> a, std::span<const double> b) {
  require_runs(a, b);
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double va = std::pow(sample_std(a), 2) / na;
  const double vb = std::pow(sample_std(b), 2) / nb;
  const double diff = mean(a) - mean(b);
  const double se2 = va + vb;
  if (se2 == 0.0) return degenerate(diff, na + nb - 2.0);
  const double t = diff / std::sqrt(se2);
  const double df = se2 * se2 / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
  return {t, df, student_t_two_tailed_p(t, df)};
}

TTestResult pooled_ttest(std::span<const double> a, std::span<const double> b) {
  require_runs(a, b);
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double df = na + nb - 2.0;
  const double sa = sample_std(a);
  const double sb = sample_std(b);
  const double pooled_var = ((na - 1.0) * sa * sa + (nb - 1.0) * sb * sb) / df;
  const double diff = mean(a) - mean(b);
  const double se2 = pooled_var * (1.0 / na + 1.0 / nb);
  if (se2 == 0.0) return degenerate(diff, df);
  const double t = diff / std::sqrt(se2);
  return {t, df, student_t_two_tailed_p(t, df)};
}

std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::Win: return "win";
    case Outcome::Loss: return "loss";
    case Outcome::Tie: return "tie";
  }
  return "?";
}

Verdict compare(const RunSet& method, const RunSet& baseline, double alpha_sig, bool pooled) {
  method.validate();
  baseline.validate();
  const auto r = pooled ? pooled_ttest(method.accuracies, baseline.accuracies)
                        : welch_ttest(method.accuracies, baseline.accuracies);
  Verdict v;
  v.p_value = r.p;
  v.mean_diff = mean(method.accuracies) - mean(baseline.accuracies);
  if (v.p_value < alpha_sig && v.mean_diff > 0.0) {
    v.outcome = Outcome::Win;
  } else if (v.p_value < alpha_sig && v.mean_diff < 0.0) {
    v.outcome = Outcome::Loss;
  }
  return v;
}

Tally tally(std::span<const Verdict> verdicts) {
  Tally t;
  for (const auto& v : verdicts) {
    if (v.outcome == Outcome::Win) ++t.wins;
    if (v.outcome == Outcome::Loss) ++t.losses;
  }
  return t;
}

double heatmap_value(const Verdict& v) {
  if (v.p_value >= 1.0 || v.mean_diff == 0.0) return 0.0;
  return v.mean_diff > 0.0 ? 1.0 - v.p_value : -(1.0 - v.p_value);
}

}  // namespace augmentarium::stats
