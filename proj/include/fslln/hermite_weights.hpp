#pragma once

// Probabilists' Hermite polynomials, Gauss-Hermite quadrature against the
// standard normal density, and deterministic weight functions g(s).

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "fslln/covariance_models.hpp"
#include "fslln/errors.hpp"
#include "fslln/random.hpp"

namespace fslln {

/// H_m(u) via H_{m+1} = u H_m - m H_{m-1}.
inline double hermite_eval(unsigned m, double u) noexcept {
    if (m == 0) return 1.0;
    double prev = 1.0;
    double cur = u;
    for (unsigned n = 1; n < m; ++n) {
        const double next = u * cur - static_cast<double>(n) * prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

inline double factorial(unsigned n) noexcept {
    double f = 1.0;
    for (unsigned i = 2; i <= n; ++i) f *= static_cast<double>(i);
    return f;
}

/// Nodes and weights integrating f(u) phi(u) du, phi the N(0,1) density.
struct GaussHermiteRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Newton iteration on orthonormal physicists' Hermite functions, then
/// rescaled to the normal density (x -> sqrt(2) x, w -> w / sqrt(pi)).
inline GaussHermiteRule gauss_hermite_rule(int n) {
    if (n < 1) throw DomainError("quadrature point count must be >= 1");
    const double pim4 = 1.0 / std::pow(std::numbers::pi, 0.25);
    std::vector<double> x(n), w(n);
    const int half = (n + 1) / 2;
    double z = 0.0;
    for (int i = 0; i < half; ++i) {
        if (i == 0) {
            z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -0.16667);
        } else if (i == 1) {
            z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
        } else if (i == 2) {
            z = 1.86 * z - 0.86 * x[0];
        } else if (i == 3) {
            z = 1.91 * z - 0.91 * x[1];
        } else {
            z = 2.0 * z - x[i - 2];
        }
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p1 = pim4;
            double p2 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = z * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(static_cast<double>(j) / (j + 1)) * p3;
            }
            pp = std::sqrt(2.0 * n) * p2;
            const double z1 = z;
            z = z1 - p1 / pp;
            if (std::fabs(z - z1) <= 1e-15 * std::max(1.0, std::fabs(z))) break;
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    GaussHermiteRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        rule.nodes[i] = std::numbers::sqrt2 * x[n - 1 - i];
        rule.weights[i] = w[n - 1 - i] / std::sqrt(std::numbers::pi);
    }
    return rule;
}

inline constexpr int kDefaultQuadraturePoints = 64;
inline constexpr unsigned kMaxOrthogonalityOrder = 10;

/// |int H_m1 H_m2 phi - delta m1!| by Gauss-Hermite quadrature.
inline double orthogonality_defect(unsigned m1, unsigned m2, int quadrature_points = kDefaultQuadraturePoints) {
    if (m1 > kMaxOrthogonalityOrder || m2 > kMaxOrthogonalityOrder)
        throw DomainError("orthogonality check supports orders up to 10");
    const auto rule = gauss_hermite_rule(quadrature_points);
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
        acc += rule.weights[i] * hermite_eval(m1, rule.nodes[i]) * hermite_eval(m2, rule.nodes[i]);
    const double expected = m1 == m2 ? factorial(m1) : 0.0;
    return std::fabs(acc - expected);
}

// ---------------------------------------------------------------------------
// Weight functions
// ---------------------------------------------------------------------------

struct ConstantWeight {
    double c = 1.0;
    bool operator==(const ConstantWeight&) const = default;
};

/// g(s) = prod |s_i|^l_i.
struct MonomialProductWeight {
    std::vector<double> l;
    bool operator==(const MonomialProductWeight&) const = default;
};

/// g(s) = prod |s_i| ln(q_i + |s_i|).
struct LogProductWeight {
    std::vector<double> q;
    bool operator==(const LogProductWeight&) const = default;
};

using WeightFunction = std::variant<ConstantWeight, MonomialProductWeight, LogProductWeight>;

/// Slack added to the log-product growth exponents to absorb the log factors.
inline constexpr double kLogProductSlack = 0.5;

inline void validate(const WeightFunction& g) {
    std::visit(
        [](const auto& w) {
            using T = std::decay_t<decltype(w)>;
            if constexpr (std::is_same_v<T, ConstantWeight>) {
                if (!(w.c > 0.0)) throw DomainError("constant weight must be > 0");
            } else if constexpr (std::is_same_v<T, MonomialProductWeight>) {
                if (w.l.empty()) throw DomainError("monomial weight needs at least one exponent");
                for (double v : w.l)
                    if (!(v > 0.0)) throw DomainError("monomial exponents must be > 0");
            } else {
                if (w.q.empty()) throw DomainError("log-product weight needs at least one offset");
                for (double v : w.q)
                    if (!(v > 1.0)) throw DomainError("log-product offsets must be > 1");
            }
        },
        g);
}

/// Dimension the weight is defined on; 0 for the dimension-free constant.
inline std::size_t weight_dimension(const WeightFunction& g) {
    return std::visit(
        [](const auto& w) -> std::size_t {
            using T = std::decay_t<decltype(w)>;
            if constexpr (std::is_same_v<T, ConstantWeight>) {
                return 0;
            } else if constexpr (std::is_same_v<T, MonomialProductWeight>) {
                return w.l.size();
            } else {
                return w.q.size();
            }
        },
        g);
}

inline double eval_weight(const WeightFunction& g, std::span<const double> s) {
    return std::visit(
        [s](const auto& w) -> double {
            using T = std::decay_t<decltype(w)>;
            if constexpr (std::is_same_v<T, ConstantWeight>) {
                return w.c;
            } else if constexpr (std::is_same_v<T, MonomialProductWeight>) {
                if (s.size() != w.l.size()) throw DomainError("weight/point dimension mismatch");
                double v = 1.0;
                for (std::size_t i = 0; i < s.size(); ++i) v *= std::pow(std::fabs(s[i]), w.l[i]);
                return v;
            } else {
                if (s.size() != w.q.size()) throw DomainError("weight/point dimension mismatch");
                double v = 1.0;
                for (std::size_t i = 0; i < s.size(); ++i) {
                    const double a = std::fabs(s[i]);
                    v *= a * std::log(w.q[i] + a);
                }
                return v;
            }
        },
        g);
}

/// Tight growth exponent gamma0 with |g(s)| <= C (1 + |s|^gamma0).
inline double growth_exponent(const WeightFunction& g) {
    return std::visit(
        [](const auto& w) -> double {
            using T = std::decay_t<decltype(w)>;
            if constexpr (std::is_same_v<T, ConstantWeight>) {
                return 0.0;
            } else if constexpr (std::is_same_v<T, MonomialProductWeight>) {
                double s = 0.0;
                for (double v : w.l) s += v;
                return s;
            } else {
                return static_cast<double>(w.q.size()) + kLogProductSlack;
            }
        },
        g);
}

/// Looser growth exponent: 2 sum l_i for the monomial product, 2d + slack
/// for the log product.
inline double paper_exponent(const WeightFunction& g) {
    return std::visit(
        [](const auto& w) -> double {
            using T = std::decay_t<decltype(w)>;
            if constexpr (std::is_same_v<T, ConstantWeight>) {
                return 0.0;
            } else if constexpr (std::is_same_v<T, MonomialProductWeight>) {
                double s = 0.0;
                for (double v : w.l) s += v;
                return 2.0 * s;
            } else {
                return 2.0 * static_cast<double>(w.q.size()) + kLogProductSlack;
            }
        },
        g);
}

enum class ExponentChoice { Tight, Loose };

inline double weight_exponent(const WeightFunction& g, ExponentChoice choice) {
    return choice == ExponentChoice::Tight ? growth_exponent(g) : paper_exponent(g);
}

/// Envelope growth exponent of the product g(s1) g(s2): twice the weight's.
inline double envelope_gamma(const WeightFunction& g, ExponentChoice choice) {
    return 2.0 * weight_exponent(g, choice);
}

/// Max of |g(s)| / (1 + |s|^gamma0) over uniform probes in [-radius, radius]^d.
inline double weight_growth_check(const WeightFunction& g, int probe_count, double radius,
                                  ExponentChoice choice = ExponentChoice::Tight, std::size_t dim = 2,
                                  std::uint64_t seed = 0x5EEDULL) {
    if (probe_count < 1) throw DomainError("probe_count must be >= 1");
    if (!(radius > 0.0)) throw DomainError("radius must be > 0");
    const std::size_t d = weight_dimension(g) == 0 ? dim : weight_dimension(g);
    const double gamma0 = weight_exponent(g, choice);
    GaussianStream rng(seed);
    std::vector<double> s(d);
    double worst = 0.0;
    for (int p = 0; p < probe_count; ++p) {
        for (auto& v : s) v = radius * (2.0 * rng.uniform() - 1.0);
        const double ratio = std::fabs(eval_weight(g, s)) / (1.0 + std::pow(norm(s), gamma0));
        worst = std::max(worst, ratio);
    }
    return worst;
}

/// g(s1) g(s2) k! B_Z(|s1 - s2|)^k, the covariance of g H_k(Z).
inline double transformed_cov(const WeightFunction& g, int k, const CovarianceModel& model,
                              std::span<const double> s1, std::span<const double> s2) {
    if (k < 1) throw DomainError("Hermite order k must be >= 1 (k = 0 gives a constant field)");
    const double b = eval_cov(model, distance(s1, s2));
    return eval_weight(g, s1) * eval_weight(g, s2) * factorial(static_cast<unsigned>(k)) *
           std::pow(b, static_cast<double>(k));
}

}  // namespace fslln
