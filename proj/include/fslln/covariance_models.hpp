#pragma once

// Isotropic base covariances of the Gaussian field, the covariance of the
// Hermite-transformed field, and the growth/decay envelope used by the
// SLLN conditions.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <type_traits>
#include <variant>

#include "fslln/errors.hpp"

namespace fslln {

// ---------------------------------------------------------------------------
// Slowly varying factors
// ---------------------------------------------------------------------------

struct ConstantL {
    double c = 1.0;
    bool operator==(const ConstantL&) const = default;
};

/// L(t) = (ln(q + t))^p with q > 1.
struct LogPowerL {
    double p = 1.0;
    double q = std::exp(1.0);
    bool operator==(const LogPowerL&) const = default;
};

using SlowlyVarying = std::variant<ConstantL, LogPowerL>;

inline void validate(const SlowlyVarying& L) {
    std::visit(
        [](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, ConstantL>) {
                if (!(v.c > 0.0) || !std::isfinite(v.c)) throw DomainError("slowly varying constant must be > 0");
            } else {
                if (!(v.q > 1.0) || !std::isfinite(v.q)) throw DomainError("log-power offset q must be > 1");
                if (!std::isfinite(v.p)) throw DomainError("log-power exponent must be finite");
            }
        },
        L);
}

inline double eval_slowly_varying(const SlowlyVarying& L, double t) {
    return std::visit(
        [t](const auto& v) -> double {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, ConstantL>) {
                return v.c;
            } else {
                return std::pow(std::log(v.q + t), v.p);
            }
        },
        L);
}

// ---------------------------------------------------------------------------
// Base covariance models (unit variance)
// ---------------------------------------------------------------------------

/// B(r) = (1 + r^2)^(-beta).
struct CauchyCov {
    double beta = 0.4;
    bool operator==(const CauchyCov&) const = default;
};

/// B(r) = L(r) / r^beta0 for r >= rmin, held at its rmin value below rmin,
/// then scaled so that B(0) = 1.
struct PowerLawCov {
    double beta0 = 0.8;
    SlowlyVarying L = ConstantL{};
    double rmin = 1.0;
    bool operator==(const PowerLawCov&) const = default;
};

using CovarianceModel = std::variant<CauchyCov, PowerLawCov>;

inline void validate(const CovarianceModel& model) {
    std::visit(
        [](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, CauchyCov>) {
                if (!(m.beta > 0.0) || !std::isfinite(m.beta)) throw DomainError("Cauchy exponent must be > 0");
            } else {
                if (!(m.beta0 > 0.0) || !std::isfinite(m.beta0)) throw DomainError("power-law exponent must be > 0");
                if (!(m.rmin > 0.0) || !std::isfinite(m.rmin)) throw DomainError("power-law rmin must be > 0");
                validate(m.L);
            }
        },
        model);
}

/// B_Z(r). Throws DomainError for negative r.
inline double eval_cov(const CovarianceModel& model, double r) {
    if (!(r >= 0.0)) throw DomainError("covariance lag must be nonnegative, got " + std::to_string(r));
    return std::visit(
        [r](const auto& m) -> double {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, CauchyCov>) {
                return std::pow(1.0 + r * r, -m.beta);
            } else {
                const double cap = eval_slowly_varying(m.L, m.rmin) * std::pow(m.rmin, -m.beta0);
                if (r <= m.rmin) return 1.0;
                return eval_slowly_varying(m.L, r) * std::pow(r, -m.beta0) / cap;
            }
        },
        model);
}

/// Asymptotic hyperbolic decay exponent e with B_Z(r) ~ L(r) r^-e.
inline double decay_exponent(const CovarianceModel& model) {
    return std::visit(
        [](const auto& m) -> double {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, CauchyCov>) {
                return 2.0 * m.beta;
            } else {
                return m.beta0;
            }
        },
        model);
}

inline double norm(std::span<const double> s) {
    return std::sqrt(std::inner_product(s.begin(), s.end(), s.begin(), 0.0));
}

inline double distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DomainError("points have different dimensions");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(acc);
}

// ---------------------------------------------------------------------------
// Covariance envelope and dependence classification
// ---------------------------------------------------------------------------

struct EnvelopeParams {
    double C = 1.0;
    double gamma = 0.0;
    double beta = 1.0;
    int d = 2;
    double rho0 = 1.0;  ///< value of rho on [0, 1)

    void validate() const {
        if (!(C > 0.0)) throw DomainError("envelope constant C must be > 0");
        if (!(gamma >= 0.0)) throw DomainError("envelope gamma must be >= 0");
        if (!(beta > 0.0)) throw DomainError("envelope beta must be > 0");
        if (d < 1) throw DomainError("dimension must be >= 1");
        if (!(rho0 > 0.0)) throw DomainError("rho(0) must be > 0");
    }
};

/// Canonical decay profile: rho(u) = rho0 below 1, u^-beta from 1 on.
inline double envelope_rho(const EnvelopeParams& p, double u) {
    return u < 1.0 ? p.rho0 : std::pow(u, -p.beta);
}

/// C (1 + |s1|^gamma + |s2|^gamma) rho(|s1 - s2|).
inline double assumption1_envelope(const EnvelopeParams& p, std::span<const double> s1,
                                   std::span<const double> s2) {
    p.validate();
    const double growth = 1.0 + std::pow(norm(s1), p.gamma) + std::pow(norm(s2), p.gamma);
    return p.C * growth * envelope_rho(p, distance(s1, s2));
}

enum class DependenceClass { Weak, PossiblyLongRange };

inline DependenceClass dependence_class(double beta, double gamma, int d) {
    if (!(beta > 0.0)) throw DomainError("beta must be > 0");
    if (!(gamma >= 0.0)) throw DomainError("gamma must be >= 0");
    if (d < 1) throw DomainError("dimension must be >= 1");
    return beta - gamma >= static_cast<double>(d) ? DependenceClass::Weak : DependenceClass::PossiblyLongRange;
}

enum class RangeClass { LongRange, ShortRange };

/// LongRange iff the radial integral of r^(d-1) B_Z(r)^k diverges, i.e.
/// k e <= d. The boundary k e = d is classified LongRange regardless of L.
inline RangeClass long_range_indicator(const CovarianceModel& model, int k, int d) {
    if (k < 1) throw DomainError("Hermite order must be >= 1");
    if (d < 1) throw DomainError("dimension must be >= 1");
    const double e = decay_exponent(model);
    if (!std::isfinite(e) || !(e > 0.0)) throw UnsupportedModelError("model has no usable decay exponent");
    return k * e <= static_cast<double>(d) ? RangeClass::LongRange : RangeClass::ShortRange;
}

inline std::string to_string(DependenceClass c) {
    return c == DependenceClass::Weak ? "Weak" : "PossiblyLongRange";
}
inline std::string to_string(RangeClass c) { return c == RangeClass::LongRange ? "LongRange" : "ShortRange"; }

}  // namespace fslln
