#pragma once

// Exponent bookkeeping for the SLLN of xi(mu): which (beta, gamma, d) admit a
// subsequence mu_n = n^alpha satisfying both series conditions, and the
// variance bound that drives the first of them.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "fslln/errors.hpp"

namespace fslln {

struct RegimeParams {
    double beta = 1.0;   ///< decay exponent of the covariance envelope
    double gamma = 0.0;  ///< growth exponent of the covariance envelope
    int d = 2;

    void validate() const {
        if (!(beta > 0.0) || !std::isfinite(beta)) throw DomainError("beta must be finite and > 0");
        if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw DomainError("gamma must be finite and >= 0");
        if (d < 1) throw DomainError("dimension must be >= 1");
    }
    /// min(beta, d): the effective decay in the variance bound.
    double effective_decay() const { return std::min(beta, static_cast<double>(d)); }
};

/// Open interval (lower, upper); upper may be +infinity.
struct OpenInterval {
    double lower = 0.0;
    double upper = 0.0;
    bool empty() const { return !(lower < upper); }
    bool contains(double x) const { return x > lower && x < upper; }
};

enum class RegimeOutcome { HoldsCaseI, HoldsCaseII, NotCovered };

inline std::string to_string(RegimeOutcome o) {
    switch (o) {
        case RegimeOutcome::HoldsCaseI: return "HoldsCaseI";
        case RegimeOutcome::HoldsCaseII: return "HoldsCaseII";
        default: return "NotCovered";
    }
}

struct RegimeVerdict {
    RegimeOutcome outcome = RegimeOutcome::NotCovered;
    OpenInterval alpha_interval;  ///< empty iff NotCovered
    bool gamma_zero = false;      ///< verdict relies on the homogeneous gamma = 0 extension
};

/// Feasible alpha for mu_n = n^alpha: (1 / (min(beta, d) - gamma), 1 / gamma).
inline OpenInterval alpha_interval(const RegimeParams& p) {
    p.validate();
    const double gap = p.effective_decay() - p.gamma;
    if (!(gap > 0.0)) return {0.0, 0.0};
    const double upper = p.gamma > 0.0 ? 1.0 / p.gamma : std::numeric_limits<double>::infinity();
    OpenInterval iv{1.0 / gap, upper};
    if (iv.empty()) return {0.0, 0.0};
    return iv;
}

inline RegimeVerdict theorem2_regime(const RegimeParams& p) {
    p.validate();
    RegimeVerdict v;
    v.gamma_zero = p.gamma == 0.0;
    const double d = static_cast<double>(p.d);
    if (p.beta < d && 2.0 * p.gamma < p.beta)
        v.outcome = RegimeOutcome::HoldsCaseI;
    else if (p.beta >= d && 2.0 * p.gamma < d)
        v.outcome = RegimeOutcome::HoldsCaseII;
    else
        v.outcome = RegimeOutcome::NotCovered;
    v.alpha_interval = v.outcome == RegimeOutcome::NotCovered ? OpenInterval{0.0, 0.0} : alpha_interval(p);
    return v;
}

/// Variance series with mu_n = n^alpha: sum n^(-alpha (min(beta,d) - gamma)) < inf.
inline bool lemma1_series_converges(double alpha, const RegimeParams& p) {
    p.validate();
    if (!(alpha > 0.0)) throw DomainError("alpha must be > 0");
    return alpha * (p.effective_decay() - p.gamma) > 1.0;
}

/// Increment series with mu_n = n^alpha: both tails behave like n^-(2 - alpha gamma).
inline bool lemma2_series_converge(double alpha, const RegimeParams& p) {
    p.validate();
    if (!(alpha > 0.0)) throw DomainError("alpha must be > 0");
    return 2.0 - alpha * p.gamma > 1.0;
}

/// (C / mu^2d) (mu^d + mu^(d+gamma)) (C + mu^(d-beta)).
inline double variance_upper_bound(double mu, const RegimeParams& p, double C) {
    p.validate();
    if (!(mu > 0.0)) throw DomainError("mu must be > 0");
    if (!(C > 0.0)) throw DomainError("C must be > 0");
    const double d = static_cast<double>(p.d);
    return C / std::pow(mu, 2.0 * d) * (std::pow(mu, d) + std::pow(mu, d + p.gamma)) * (C + std::pow(mu, d - p.beta));
}

/// Smallest C with variance_upper_bound(mu, p, C) >= variance (positive root
/// of the quadratic in C).
inline double fit_bound_constant(double variance, double mu, const RegimeParams& p) {
    p.validate();
    if (!(variance >= 0.0)) throw DomainError("variance must be >= 0");
    const double d = static_cast<double>(p.d);
    const double a = (std::pow(mu, d) + std::pow(mu, d + p.gamma)) / std::pow(mu, 2.0 * d);
    const double b = std::pow(mu, d - p.beta);
    // a C^2 + a b C - variance = 0
    return 0.5 * (-b + std::sqrt(b * b + 4.0 * variance / a));
}

struct SeriesProbe {
    double partial_sum = 0.0;
    double tail_slope = 0.0;  ///< least-squares slope of log term vs log n over the tail
    bool likely_divergent = false;
};

/// Partial sum up to n_max and a log-log slope fit over n in [n_max/10, n_max];
/// a slope >= -1 (terms no faster than 1/n) is flagged likely divergent.
inline SeriesProbe numeric_series_probe(const std::function<double(long long)>& term, long long n_max) {
    if (n_max < 20) throw DomainError("n_max must be >= 20");
    SeriesProbe out;
    for (long long n = 1; n <= n_max; ++n) {
        const double t = term(n);
        if (!(t > 0.0)) throw DomainError("series terms must be positive (term " + std::to_string(n) + ")");
        out.partial_sum += t;
    }
    // 64 log-spaced tail points.
    const double lo = std::log(static_cast<double>(n_max) / 10.0);
    const double hi = std::log(static_cast<double>(n_max));
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    constexpr int kPoints = 64;
    for (int i = 0; i < kPoints; ++i) {
        const auto n = static_cast<long long>(std::llround(std::exp(lo + (hi - lo) * i / (kPoints - 1))));
        const double x = std::log(static_cast<double>(n));
        const double y = std::log(term(n));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    out.tail_slope = (kPoints * sxy - sx * sy) / (kPoints * sxx - sx * sx);
    out.likely_divergent = out.tail_slope >= -1.0 - 1e-6;
    return out;
}

}  // namespace fslln
