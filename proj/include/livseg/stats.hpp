#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace livseg {

/// One-sided alternative on paired differences d = a - b.
enum class Alternative { greater, less };

struct ShapiroResult {
  double w = 1.0;
  double p = 1.0;
};

/// Shapiro-Wilk normality test, Royston's AS R94 algorithm (3 <= n <= 5000).
/// Throws std::invalid_argument for sizes out of range or a zero range sample.
ShapiroResult shapiro_wilk(std::span<const double> xs);

struct WilcoxonResult {
  double p = 1.0;
  double w_plus = 0.0;       // sum of ranks of positive differences
  std::size_t n_used = 0;    // nonzero differences
  std::size_t zeros_dropped = 0;
  bool exact = false;
};

/// Largest number of nonzero differences handled by the exact null distribution.
inline constexpr std::size_t kWilcoxonExactMaxN = 25;

/// One-sided Wilcoxon signed-rank test. Zero differences are dropped and tied
/// magnitudes share average ranks. Exact null distribution up to `exact_max_n`
/// nonzero differences, normal approximation with continuity correction above.
/// Throws std::invalid_argument when every difference is zero.
WilcoxonResult wilcoxon_signed_rank(std::span<const double> d, Alternative alt,
                                    std::size_t exact_max_n = kWilcoxonExactMaxN);

/// Normal-approximation p-value, regardless of sample size.
double wilcoxon_normal_p(std::span<const double> d, Alternative alt);

/// One-sided paired Student t-test on the differences. Throws on zero variance or n < 2.
double paired_t_test_one_sided(std::span<const double> d, Alternative alt);

/// Direction of the hypothesis tested between pipelines A and B.
enum class Hypothesis { a_less_than_b, a_greater_than_b };

std::string_view to_string(Hypothesis h);
Hypothesis parse_hypothesis(std::string_view text);

struct PairedSample {
  std::string metric;
  std::vector<double> a;
  std::vector<double> b;
  Hypothesis hypothesis = Hypothesis::a_greater_than_b;
};

enum class TestKind { t_test, wilcoxon };

std::string_view to_string(TestKind t);

struct SignificanceResult {
  std::string metric;
  Hypothesis hypothesis = Hypothesis::a_greater_than_b;
  std::size_t n = 0;
  std::optional<double> shapiro_w;
  std::optional<double> shapiro_p;  // empty when the differences have zero range
  TestKind test = TestKind::wilcoxon;
  double p = 1.0;
  double alpha = 0.05;
  bool significant = false;
  bool degenerate = false;  // every difference is zero
  std::size_t zeros_dropped = 0;
};

/// Shapiro-Wilk on the paired differences routes to a one-sided t-test (normal at
/// level alpha) or to the Wilcoxon signed-rank test; significant iff p < alpha.
SignificanceResult run_significance_protocol(const PairedSample& sample, double alpha = 0.05);

}  // namespace livseg
