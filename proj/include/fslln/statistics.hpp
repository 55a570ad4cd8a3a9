#pragma once

// Sample moments, quantiles, Q-Q pairs and the D'Agostino-Pearson
// skewness-kurtosis omnibus test.

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include "fslln/errors.hpp"
#include "fslln/random.hpp"

namespace fslln {

/// Central moments accumulated in index order (population normalisation).
struct Moments {
    std::size_t n = 0;
    double mean = 0.0;
    double mean_square = 0.0;  ///< (1/n) sum x^2
    double m2 = 0.0;
    double m3 = 0.0;
    double m4 = 0.0;
};

inline Moments moments(std::span<const double> xs) {
    Moments m;
    m.n = xs.size();
    if (m.n == 0) return m;
    const double n = static_cast<double>(m.n);
    for (double x : xs) {
        m.mean += x;
        m.mean_square += x * x;
    }
    m.mean /= n;
    m.mean_square /= n;
    for (double x : xs) {
        const double c = x - m.mean;
        const double c2 = c * c;
        m.m2 += c2;
        m.m3 += c2 * c;
        m.m4 += c2 * c2;
    }
    m.m2 /= n;
    m.m3 /= n;
    m.m4 /= n;
    return m;
}

/// Linear-interpolation quantile (Hyndman-Fan type 7) of sorted data.
inline double quantile_sorted(std::span<const double> sorted, double prob) {
    if (sorted.empty()) throw InputError("quantile of empty sample");
    const double pos = prob * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline constexpr std::array<double, 9> kSummaryProbs{0.01, 0.05, 0.10, 0.25, 0.50, 0.75, 0.90, 0.95, 0.99};

struct NormalityTest {
    double z_skew = 0.0;
    double z_kurt = 0.0;
    double k2 = 0.0;       ///< z_skew^2 + z_kurt^2, chi-square(2) under normality
    double p_value = 1.0;  ///< exp(-k2 / 2)
};

/// D'Agostino-Pearson K^2 for n >= 20.
inline NormalityTest dagostino_pearson(std::span<const double> xs) {
    const auto m = moments(xs);
    const double n = static_cast<double>(m.n);
    if (m.n < 20) throw InputError("omnibus test needs at least 20 samples");
    if (!(m.m2 > 0.0)) throw InputError("degenerate sample");
    const double b1 = m.m3 / std::pow(m.m2, 1.5);
    const double b2 = m.m4 / (m.m2 * m.m2);

    NormalityTest t;
    {
        const double y = b1 * std::sqrt((n + 1) * (n + 3) / (6.0 * (n - 2)));
        const double beta2 = 3.0 * (n * n + 27 * n - 70) * (n + 1) * (n + 3) / ((n - 2) * (n + 5) * (n + 7) * (n + 9));
        const double w2 = -1.0 + std::sqrt(2.0 * (beta2 - 1.0));
        const double delta = 1.0 / std::sqrt(0.5 * std::log(w2));
        const double alpha = std::sqrt(2.0 / (w2 - 1.0));
        const double ya = y / alpha;
        t.z_skew = delta * std::log(ya + std::sqrt(ya * ya + 1.0));
    }
    {
        const double e = 3.0 * (n - 1) / (n + 1);
        const double var = 24.0 * n * (n - 2) * (n - 3) / ((n + 1) * (n + 1) * (n + 3) * (n + 5));
        const double x = (b2 - e) / std::sqrt(var);
        const double sqrt_beta1 = 6.0 * (n * n - 5 * n + 2) / ((n + 7) * (n + 9)) *
                                  std::sqrt(6.0 * (n + 3) * (n + 5) / (n * (n - 2) * (n - 3)));
        const double a = 6.0 + 8.0 / sqrt_beta1 * (2.0 / sqrt_beta1 + std::sqrt(1.0 + 4.0 / (sqrt_beta1 * sqrt_beta1)));
        const double term1 = 1.0 - 2.0 / (9.0 * a);
        const double denom = 1.0 + x * std::sqrt(2.0 / (a - 4.0));
        const double term2 = std::cbrt((1.0 - 2.0 / a) / denom);
        t.z_kurt = (term1 - term2) / std::sqrt(2.0 / (9.0 * a));
    }
    t.k2 = t.z_skew * t.z_skew + t.z_kurt * t.z_kurt;
    t.p_value = std::exp(-0.5 * t.k2);
    return t;
}

/// Chi-square(2) critical values used for the omnibus statistic.
inline constexpr double kChi2Df2Crit05 = 5.991464547107979;
inline constexpr double kChi2Df2Crit01 = 9.210340371976184;

struct DistributionSummary {
    std::size_t n = 0;
    bool degenerate = false;
    double mean = 0.0;
    double variance = 0.0;  ///< population normalisation
    double skewness = 0.0;
    double skewness_se = 0.0;
    double excess_kurtosis = 0.0;
    double kurtosis_se = 0.0;
    std::array<double, kSummaryProbs.size()> quantiles{};
    std::vector<std::pair<double, double>> qq;  ///< (theoretical, standardized sample)
    NormalityTest omnibus;
};

/// Requires at least 30 samples. A zero-variance sample is reported as
/// degenerate with no Q-Q pairs and no test.
inline DistributionSummary distribution_summary(std::span<const double> xs) {
    if (xs.size() < 30) throw InputError("distribution summary needs at least 30 samples");
    DistributionSummary s;
    const auto m = moments(xs);
    const double n = static_cast<double>(m.n);
    s.n = m.n;
    s.mean = m.mean;
    s.variance = m.m2;
    std::vector<double> sorted(xs.begin(), xs.end());
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < kSummaryProbs.size(); ++i) s.quantiles[i] = quantile_sorted(sorted, kSummaryProbs[i]);
    if (!(m.m2 > 0.0)) {
        s.degenerate = true;
        return s;
    }
    s.skewness = m.m3 / std::pow(m.m2, 1.5);
    s.excess_kurtosis = m.m4 / (m.m2 * m.m2) - 3.0;
    s.skewness_se = std::sqrt(6.0 * n * (n - 1) / ((n - 2) * (n + 1) * (n + 3)));
    s.kurtosis_se = 2.0 * s.skewness_se * std::sqrt((n * n - 1) / ((n - 3) * (n + 5)));
    const double sd = std::sqrt(m.m2);
    s.qq.reserve(sorted.size());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double prob = (static_cast<double>(i) + 0.5) / n;
        s.qq.emplace_back(inverse_normal_cdf(prob), (sorted[i] - m.mean) / sd);
    }
    s.omnibus = dagostino_pearson(xs);
    return s;
}

/// Least-squares slope of log(y) against log(x).
inline double loglog_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw InputError("slope fit needs at least two paired points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw InputError("log-log fit needs positive values");
        const double lx = std::log(x[i]);
        const double ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace fslln
