#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace treecover {

// Kahan-compensated accumulator.
class KahanSum {
  public:
    void add(double x) {
        const double y = x - c_;
        const double t = s_ + y;
        c_ = (t - s_) - y;
        s_ = t;
    }
    double value() const { return s_; }
    void reset() { s_ = 0.0; c_ = 0.0; }

  private:
    double s_ = 0.0;
    double c_ = 0.0;
};

inline double kahan_total(std::span<const double> xs) {
    KahanSum acc;
    for (double x : xs) acc.add(x);
    return acc.value();
}

struct Summary {
    std::size_t n = 0;
    double mean = 0.0;
    double variance = 0.0;  // unbiased
    double sd = 0.0;
    double min = std::numeric_limits<double>::quiet_NaN();
    double max = std::numeric_limits<double>::quiet_NaN();
};

inline Summary summarize(std::span<const double> xs) {
    Summary s;
    s.n = xs.size();
    if (xs.empty()) return s;
    KahanSum acc;
    s.min = xs[0];
    s.max = xs[0];
    for (double x : xs) {
        acc.add(x);
        s.min = std::min(s.min, x);
        s.max = std::max(s.max, x);
    }
    s.mean = acc.value() / static_cast<double>(xs.size());
    KahanSum sq;
    for (double x : xs) sq.add((x - s.mean) * (x - s.mean));
    s.variance = xs.size() > 1 ? sq.value() / static_cast<double>(xs.size() - 1) : 0.0;
    s.sd = std::sqrt(s.variance);
    return s;
}

inline double sample_covariance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.size() < 2) throw std::invalid_argument("covariance: bad sizes");
    const double ma = summarize(a).mean;
    const double mb = summarize(b).mean;
    KahanSum acc;
    for (std::size_t i = 0; i < a.size(); ++i) acc.add((a[i] - ma) * (b[i] - mb));
    return acc.value() / static_cast<double>(a.size() - 1);
}

// q-quantile of a copy of xs (linear interpolation between order statistics).
inline double quantile(std::vector<double> xs, double q) {
    if (xs.empty()) throw std::invalid_argument("quantile of empty sample");
    std::sort(xs.begin(), xs.end());
    if (q <= 0) return xs.front();
    if (q >= 1) return xs.back();
    const double pos = q * static_cast<double>(xs.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(lo);
    return lo + 1 < xs.size() ? xs[lo] * (1.0 - frac) + xs[lo + 1] * frac : xs[lo];
}

inline double median(std::vector<double> xs) { return quantile(std::move(xs), 0.5); }

inline double interquartile_range(const std::vector<double>& xs) {
    return quantile(xs, 0.75) - quantile(xs, 0.25);
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

// Two-sided p-value of a z statistic.
inline double z_two_sided_p(double z) { return std::erfc(std::fabs(z) / std::numbers::sqrt2); }

// Regularized upper incomplete gamma Q(a, x), series/continued-fraction split.
inline double gamma_q(double a, double x) {
    if (a <= 0 || x < 0) throw std::invalid_argument("gamma_q domain");
    if (x == 0) return 1.0;
    const double log_prefix = a * std::log(x) - x - std::lgamma(a);
    if (x < a + 1.0) {
        // P(a,x) by series, Q = 1 - P.
        double term = 1.0 / a;
        double sum = term;
        double ap = a;
        for (int i = 0; i < 500; ++i) {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if (std::fabs(term) < std::fabs(sum) * 1e-15) break;
        }
        return 1.0 - sum * std::exp(log_prefix);
    }
    // Q(a,x) by Lentz continued fraction.
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < 1e-15) break;
    }
    return std::exp(log_prefix) * h;
}

// Survival function of a chi-square with df degrees of freedom.
inline double chi2_sf(double x, double df) { return gamma_q(df / 2.0, x / 2.0); }

// Kolmogorov distribution tail: P(K > lambda).
inline double kolmogorov_sf(double lambda) {
    if (lambda <= 0) return 1.0;
    double sum = 0.0;
    double sign = 1.0;
    for (int j = 1; j <= 100; ++j) {
        const double term = std::exp(-2.0 * j * j * lambda * lambda);
        sum += sign * term;
        sign = -sign;
        if (term < 1e-16) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

// Holm step-down: returns per-test rejection of H0 at family level alpha.
inline std::vector<bool> holm_reject(const std::vector<double>& pvalues, double alpha) {
    const std::size_t m = pvalues.size();
    std::vector<std::size_t> order(m);
    for (std::size_t i = 0; i < m; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return pvalues[a] < pvalues[b]; });
    std::vector<bool> reject(m, false);
    for (std::size_t rank = 0; rank < m; ++rank) {
        const double level = alpha / static_cast<double>(m - rank);
        if (pvalues[order[rank]] <= level) {
            reject[order[rank]] = true;
        } else {
            break;
        }
    }
    return reject;
}

}  // namespace treecover
