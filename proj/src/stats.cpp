#include "ratesculpt/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "ratesculpt/error.hpp"

namespace ratesculpt::stats {

double mean(std::span<const double> x) {
    require(!x.empty(), "mean of an empty sample");
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double median(std::vector<double> x) {
    require(!x.empty(), "median of an empty sample");
    std::sort(x.begin(), x.end());
    const std::size_t n = x.size();
    return n % 2 ? x[n / 2] : 0.5 * (x[n / 2 - 1] + x[n / 2]);
}

double sample_sd(std::span<const double> x) {
    if (x.size() < 2) return 0.0;
    const double m = mean(x);
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

TestResult one_sample_t(std::span<const double> values, double mu0) {
    if (values.size() < 2) fail(ErrorCode::InsufficientData, "t-test needs at least two values");
    const double m = mean(values);
    const double sd = sample_sd(values);
    // Relative threshold so constant inputs with rounding noise still count as constant.
    if (sd <= 1e-12 * std::max(1.0, std::abs(m))) fail(ErrorCode::NoVariation, "t-test on a constant sample");
    const double n = static_cast<double>(values.size());
    TestResult r;
    r.df = n - 1;
    r.statistic = (m - mu0) / (sd / std::sqrt(n));
    const boost::math::students_t dist(r.df);
    r.p = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.statistic))));
    return r;
}

TestResult paired_t(std::span<const double> a, std::span<const double> b) {
    require(a.size() == b.size(), "paired samples differ in length");
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    return one_sample_t(d, 0.0);
}

HolmResult holm_correct(std::span<const double> p_values, double alpha) {
    const std::size_t m = p_values.size();
    for (double p : p_values) require(p >= 0.0 && p <= 1.0, "p-values must lie in [0,1]");
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) { return p_values[i] < p_values[j]; });

    HolmResult out;
    out.adjusted.assign(m, 1.0);
    out.reject.assign(m, false);
    double running = 0.0;
    bool still_rejecting = true;
    for (std::size_t rank = 0; rank < m; ++rank) {
        const std::size_t i = order[rank];
        const double factor = static_cast<double>(m - rank);
        running = std::max(running, std::min(1.0, factor * p_values[i]));
        out.adjusted[i] = running;
        still_rejecting = still_rejecting && p_values[i] <= alpha / factor;
        out.reject[i] = still_rejecting;
    }
    return out;
}

namespace {

// Midranks of |d|, doubled so ties stay integral.
std::vector<long> doubled_midranks(const std::vector<double>& abs_d) {
    const std::size_t n = abs_d.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto i, auto j) { return abs_d[i] < abs_d[j]; });
    std::vector<long> ranks(n);
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && abs_d[order[j + 1]] == abs_d[order[i]]) ++j;
        const long doubled = static_cast<long>(i + 1 + j + 1);  // (first + last) ranks, 1-based
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = doubled;
        i = j + 1;
    }
    return ranks;
}

}  // namespace

TestResult wilcoxon_signed_rank(std::span<const double> differences) {
    std::vector<double> abs_d;
    std::vector<bool> positive;
    for (double d : differences) {
        require(std::isfinite(d), "differences must be finite");
        if (d == 0.0) continue;
        abs_d.push_back(std::abs(d));
        positive.push_back(d > 0);
    }
    if (abs_d.empty()) fail(ErrorCode::NoVariation, "all paired differences are zero");

    const auto ranks = doubled_midranks(abs_d);
    const std::size_t n = ranks.size();
    long total = 0, w_plus = 0;
    for (std::size_t i = 0; i < n; ++i) {
        total += ranks[i];
        if (positive[i]) w_plus += ranks[i];
    }

    TestResult r;
    r.statistic = w_plus / 2.0;
    r.df = static_cast<double>(n);
    if (n <= kWilcoxonExactLimit) {
        // Number of sign assignments reaching each doubled rank sum.
        std::vector<double> ways(static_cast<std::size_t>(total) + 1, 0.0);
        ways[0] = 1.0;
        long reach = 0;
        for (long rank : ranks) {
            for (long s = reach; s >= 0; --s)
                if (ways[static_cast<std::size_t>(s)] != 0.0) ways[static_cast<std::size_t>(s + rank)] += ways[static_cast<std::size_t>(s)];
            reach += rank;
        }
        // Two-sided: as or more extreme distance from the centre total/2 (doubled units).
        const long observed = std::abs(2 * w_plus - total);
        double hits = 0.0;
        for (long s = 0; s <= total; ++s)
            if (std::abs(2 * s - total) >= observed) hits += ways[static_cast<std::size_t>(s)];
        r.p = std::min(1.0, hits / std::ldexp(1.0, static_cast<int>(n)));
        return r;
    }

    const double nn = static_cast<double>(n);
    const double centre = nn * (nn + 1) / 4.0;
    double tie_term = 0.0;
    std::vector<long> sorted = ranks;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && sorted[j] == sorted[i]) ++j;
        const double t = static_cast<double>(j - i);
        tie_term += t * t * t - t;
        i = j;
    }
    const double variance = nn * (nn + 1) * (2 * nn + 1) / 24.0 - tie_term / 48.0;
    const double z = (std::abs(r.statistic - centre) - 0.5) / std::sqrt(variance);
    r.p = z <= 0 ? 1.0 : std::min(1.0, 2.0 * (1.0 - normal_cdf(z)));
    return r;
}

TestResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b) {
    require(a.size() == b.size(), "paired samples differ in length");
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    return wilcoxon_signed_rank(d);
}

TestResult chi_square_2x2(const std::array<std::array<double, 2>, 2>& c, bool yates) {
    for (const auto& row : c)
        for (double v : row) require(v >= 0.0 && std::isfinite(v), "counts must be non-negative");
    const double a = c[0][0], b = c[0][1], d0 = c[1][0], d = c[1][1];
    const double n = a + b + d0 + d;
    const double r1 = a + b, r2 = d0 + d, c1 = a + d0, c2 = b + d;
    if (r1 == 0 || r2 == 0 || c1 == 0 || c2 == 0)
        fail(ErrorCode::InsufficientData, "chi-square table has an empty row or column");
    double diff = std::abs(a * d - b * d0);
    if (yates) diff = std::max(0.0, diff - n / 2.0);
    TestResult r;
    r.df = 1;
    r.statistic = n * diff * diff / (r1 * r2 * c1 * c2);
    const boost::math::chi_squared dist(1.0);
    r.p = boost::math::cdf(boost::math::complement(dist, r.statistic));
    return r;
}

double LogisticFit::predict(double level) const {
    return guess + (1.0 - guess - lapse) / (1.0 + std::exp(-(intercept + slope * level)));
}

double logistic_log_likelihood(std::span<const BinomialPoint> points, double intercept, double slope,
                               double guess, double lapse) {
    double ll = 0.0;
    for (const auto& pt : points) {
        const double z = intercept + slope * pt.level;
        const double sig = 1.0 / (1.0 + std::exp(-z));
        double p = guess + (1.0 - guess - lapse) * sig;
        p = std::clamp(p, 1e-300, 1.0 - 1e-16);
        const double failures = pt.trials - pt.successes;
        if (pt.successes > 0) ll += pt.successes * std::log(p);
        if (failures > 0) {
            // log(1 - p) computed from the complementary sigmoid to keep precision.
            const double q = lapse + (1.0 - guess - lapse) / (1.0 + std::exp(z));
            ll += failures * std::log(std::max(q, 1e-300));
        }
    }
    return ll;
}

LogisticFit fit_logistic(std::span<const BinomialPoint> points, const LogisticOptions& options) {
    std::set<double> levels;
    for (const auto& pt : points) {
        require(pt.trials > 0 && pt.successes >= 0 && pt.successes <= pt.trials, "invalid binomial point");
        levels.insert(pt.level);
    }
    require(levels.size() >= 4, "logistic fit needs at least four distinct levels");
    require(options.guess >= 0 && options.lapse >= 0 && options.guess + options.lapse < 1,
            "asymptotes must leave a non-empty range");

    LogisticFit fit;
    fit.guess = options.guess;
    fit.lapse = options.lapse;

    // Complete separation: every level is all-fail or all-success and the two
    // groups do not interleave.
    double max_fail = -INFINITY, min_fail = INFINITY, max_succ = -INFINITY, min_succ = INFINITY;
    bool pure = true;
    for (const auto& pt : points) {
        if (pt.successes == 0) {
            max_fail = std::max(max_fail, pt.level);
            min_fail = std::min(min_fail, pt.level);
        } else if (pt.successes == pt.trials) {
            max_succ = std::max(max_succ, pt.level);
            min_succ = std::min(min_succ, pt.level);
        } else {
            pure = false;
        }
    }
    const bool any_fail = std::isfinite(max_fail), any_succ = std::isfinite(max_succ);
    if (pure && any_fail && any_succ && (max_fail < min_succ || max_succ < min_fail)) {
        const bool rising = max_fail < min_succ;
        fit.separated = true;
        fit.slope = rising ? options.max_slope : -options.max_slope;
        fit.midpoint = rising ? 0.5 * (max_fail + min_succ) : 0.5 * (max_succ + min_fail);
        fit.intercept = -fit.slope * fit.midpoint;
        fit.log_likelihood = logistic_log_likelihood(points, fit.intercept, fit.slope, fit.guess, fit.lapse);
        return fit;
    }

    // Fisher scoring on (intercept, slope) with step halving.
    double a = 0.0, b = 0.0;
    const double span = fit.guess + fit.lapse;
    double ll = logistic_log_likelihood(points, a, b, fit.guess, fit.lapse);
    for (int it = 0; it < options.max_iterations; ++it) {
        double g0 = 0, g1 = 0, h00 = 0, h01 = 0, h11 = 0;
        for (const auto& pt : points) {
            const double sig = 1.0 / (1.0 + std::exp(-(a + b * pt.level)));
            const double p = std::clamp(fit.guess + (1.0 - span) * sig, 1e-12, 1.0 - 1e-12);
            const double dp = (1.0 - span) * sig * (1.0 - sig);
            const double score = (pt.successes - pt.trials * p) / (p * (1.0 - p)) * dp;
            const double info = pt.trials * dp * dp / (p * (1.0 - p));
            g0 += score;
            g1 += score * pt.level;
            h00 += info;
            h01 += info * pt.level;
            h11 += info * pt.level * pt.level;
        }
        const double det = h00 * h11 - h01 * h01;
        if (!(std::abs(det) > 1e-300)) break;
        double da = (h11 * g0 - h01 * g1) / det;
        double db = (h00 * g1 - h01 * g0) / det;
        double step = 1.0, next_ll = ll;
        for (int halving = 0; halving < 40; ++halving) {
            next_ll = logistic_log_likelihood(points, a + step * da, b + step * db, fit.guess, fit.lapse);
            if (next_ll >= ll - 1e-12) break;
            step *= 0.5;
        }
        a += step * da;
        b += step * db;
        const bool done = std::abs(step * da) < 1e-10 && std::abs(step * db) < 1e-10;
        ll = next_ll;
        if (std::abs(b) > options.max_slope) {
            b = std::copysign(options.max_slope, b);
            fit.separated = true;
            ll = logistic_log_likelihood(points, a, b, fit.guess, fit.lapse);
            break;
        }
        if (done) {
            fit.converged = true;
            break;
        }
    }
    fit.intercept = a;
    fit.slope = b;
    fit.midpoint = std::abs(b) > 1e-12 ? -a / b : std::numeric_limits<double>::quiet_NaN();
    fit.log_likelihood = ll;
    return fit;
}

}  // namespace ratesculpt::stats
