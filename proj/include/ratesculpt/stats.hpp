#pragma once

#include <array>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace ratesculpt::stats {

struct TestResult {
    double statistic = 0.0;
    double p = 1.0;
    double df = std::numeric_limits<double>::quiet_NaN();
};

// Two-sided. Throws InsufficientData for n < 2 and NoVariation for zero variance.
TestResult one_sample_t(std::span<const double> values, double mu0 = 0.0);
TestResult paired_t(std::span<const double> a, std::span<const double> b);

struct HolmResult {
    std::vector<double> adjusted;
    std::vector<bool> reject;
};

// Step-down Holm-Bonferroni; adjusted values are reported in input order.
HolmResult holm_correct(std::span<const double> p_values, double alpha = 0.05);

// Signed-rank test on paired differences; statistic is W+ (sum of positive
// midranks). Zeros are dropped. Exact null distribution up to 25 non-zero
// differences, normal approximation with continuity and tie correction above.
// Throws NoVariation when every difference is zero.
TestResult wilcoxon_signed_rank(std::span<const double> differences);
TestResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b);

inline constexpr std::size_t kWilcoxonExactLimit = 25;

// Pearson chi-square on a 2x2 table (df = 1), optionally with Yates' correction.
TestResult chi_square_2x2(const std::array<std::array<double, 2>, 2>& counts, bool yates = false);

double normal_cdf(double z);

// One level of a psychometric curve: successes out of trials.
struct BinomialPoint {
    double level = 0.0;
    double successes = 0.0;
    double trials = 0.0;
};

struct LogisticOptions {
    double guess = 0.0;  // lower asymptote
    double lapse = 0.0;  // 1 - upper asymptote
    double max_slope = 50.0;
    int max_iterations = 200;
};

// p(x) = guess + (1 - guess - lapse) / (1 + exp(-slope * (x - midpoint))).
struct LogisticFit {
    double slope = 0.0;
    double midpoint = 0.0;
    double intercept = 0.0;  // -slope * midpoint
    double guess = 0.0;
    double lapse = 0.0;
    double log_likelihood = 0.0;
    bool separated = false;  // outcomes perfectly split by level; slope capped
    bool converged = false;

    double predict(double level) const;
};

// Maximum-likelihood fit on trial-level binary outcomes. Needs at least four
// distinct levels.
LogisticFit fit_logistic(std::span<const BinomialPoint> points, const LogisticOptions& options = {});

double logistic_log_likelihood(std::span<const BinomialPoint> points, double intercept, double slope,
                               double guess = 0.0, double lapse = 0.0);

double mean(std::span<const double> x);
double median(std::vector<double> x);
double sample_sd(std::span<const double> x);

}  // namespace ratesculpt::stats
