#pragma once

// Observation windows, the Hermite-weighted transform X = g H_k(Z), and the
// Riemann-sum estimator of xi(mu) = mu^-d * integral of X over Delta(mu).

#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "fslln/errors.hpp"
#include "fslln/field_synthesis.hpp"
#include "fslln/hermite_weights.hpp"

namespace fslln {

enum class WindowKind { Square, Disk, IndicatorGrid };

/// Unit window Delta = Delta(1). Delta(mu) = mu * Delta.
struct Window {
    WindowKind kind = WindowKind::Square;
    int d = 2;
    /// Membership test for IndicatorGrid, in unit-window coordinates.
    std::function<bool(std::span<const double>)> indicator;
    /// Sup-norm radius of an IndicatorGrid window (Square and Disk use 1).
    double indicator_radius = 1.0;

    static Window square(int d = 2) { return {WindowKind::Square, d, {}, 1.0}; }
    static Window disk(int d = 2) { return {WindowKind::Disk, d, {}, 1.0}; }
    static Window from_indicator(int d, std::function<bool(std::span<const double>)> pred, double radius) {
        return {WindowKind::IndicatorGrid, d, std::move(pred), radius};
    }

    /// Half-width of the smallest centred axis-aligned box containing Delta.
    double sup_radius() const { return kind == WindowKind::IndicatorGrid ? indicator_radius : 1.0; }

    /// Lebesgue measure of Delta(1); NaN for indicator windows.
    double unit_measure() const {
        switch (kind) {
            case WindowKind::Square: return std::pow(2.0, d);
            case WindowKind::Disk: return d == 1 ? 2.0 : std::numbers::pi;
            default: return std::nan("");
        }
    }

    /// Closed membership of s in Delta(mu).
    bool contains(std::span<const double> s, double mu) const {
        // Relative slack so nodes that sit on the boundary up to rounding count as inside.
        constexpr double kSlack = 1e-12;
        switch (kind) {
            case WindowKind::Square:
                for (double v : s)
                    if (std::fabs(v) > mu * (1.0 + kSlack)) return false;
                return true;
            case WindowKind::Disk: {
                double r2 = 0.0;
                for (double v : s) r2 += v * v;
                return r2 <= mu * mu * (1.0 + 2.0 * kSlack);
            }
            default: {
                std::array<double, 2> u{};
                for (std::size_t i = 0; i < s.size(); ++i) u[i] = s[i] / mu;
                return indicator(std::span<const double>(u.data(), s.size()));
            }
        }
    }
};

inline std::string to_string(WindowKind k) {
    switch (k) {
        case WindowKind::Square: return "square";
        case WindowKind::Disk: return "disk";
        default: return "indicator";
    }
}

struct XiSample {
    double mu = 0.0;
    double value = 0.0;
    int replicate_id = 0;
    std::size_t node_count = 0;
    double sum = 0.0;  ///< raw node sum of X before the h^d / mu^d factor
};

/// X(x_p) = g(x_p) H_k(Z(x_p)) nodewise.
inline FieldRealization transform_field(const FieldRealization& z, const WeightFunction& g, int k) {
    if (k < 1) throw DomainError("Hermite order k must be >= 1");
    const auto wd = weight_dimension(g);
    if (wd != 0 && wd != static_cast<std::size_t>(z.grid.d))
        throw InputError("weight dimension does not match grid dimension");
    FieldRealization x{z.grid, std::vector<double>(z.values.size()), z.seed, z.generator, true};
    for (std::size_t p = 0; p < z.values.size(); ++p) {
        if (!std::isfinite(z.values[p])) throw InputError("field contains non-finite values");
        const auto pt = z.grid.point(p);
        const double w = eval_weight(g, std::span<const double>(pt.data(), static_cast<std::size_t>(z.grid.d)));
        x.values[p] = w * hermite_eval(static_cast<unsigned>(k), z.values[p]);
    }
    return x;
}

/// Riemann sum (h^d / mu^d) * sum of X over nodes inside Delta(mu).
/// Nodes are accumulated in point-reflection pairs (p, -p) so odd fields on
/// symmetric windows cancel exactly.
inline XiSample xi_estimate(const FieldRealization& x, const Window& window, double mu, int replicate_id = 0) {
    if (!(mu > 0.0)) throw DomainError("mu must be > 0");
    const Grid& g = x.grid;
    if (window.d != g.d) throw InputError("window dimension does not match grid dimension");
    if (mu * window.sup_radius() > g.extent() * (1.0 + 1e-12))
        throw CoverageError("window Delta(" + std::to_string(mu) + ") exceeds grid extent " +
                            std::to_string(g.extent()));
    const std::size_t total = g.total();
    const std::size_t dim = static_cast<std::size_t>(g.d);
    const auto inside = [&](std::size_t p) {
        const auto pt = g.point(p);
        return window.contains(std::span<const double>(pt.data(), dim), mu);
    };
    // Only nodes within the sup-norm box of the scaled window can be inside.
    const int reach = std::min(g.N, static_cast<int>(std::floor(mu * window.sup_radius() / g.h * (1.0 + 1e-12))));
    double sum = 0.0;
    std::size_t count = 0;
    const auto visit = [&](std::size_t p) {
        const std::size_t mirror = total - 1 - p;
        const bool a = inside(p);
        if (p == mirror) {
            if (a) {
                sum += x.values[p];
                ++count;
            }
            return;
        }
        const bool b = inside(mirror);
        if (a && b) {
            sum += x.values[p] + x.values[mirror];
            count += 2;
        } else if (a) {
            sum += x.values[p];
            ++count;
        } else if (b) {
            sum += x.values[mirror];
            ++count;
        }
    };
    // Visit the first half of the reachable box (row-major, up to and including
    // the centre); each visit also covers the reflected node.
    if (g.d == 1) {
        for (int i = -reach; i <= 0; ++i) visit(g.flat(i));
    } else {
        for (int i = -reach; i <= 0; ++i)
            for (int j = -reach; j <= reach; ++j) {
                if (i == 0 && j > 0) break;
                visit(g.flat(i, j));
            }
    }
    if (count == 0) throw DegenerateWindowError("no grid node inside Delta(" + std::to_string(mu) + ")");
    const double scale = std::pow(g.h / mu, g.d);
    return {mu, scale * sum, replicate_id, count, sum};
}

/// xi over increasing mus on one transformed realization (nested windows).
inline std::vector<XiSample> xi_curve(const FieldRealization& z, const WeightFunction& g, int k, const Window& window,
                                      std::span<const double> mus, int replicate_id = 0) {
    for (std::size_t i = 1; i < mus.size(); ++i)
        if (!(mus[i] > mus[i - 1])) throw InputError("mus must be strictly increasing");
    const auto x = transform_field(z, g, k);
    std::vector<XiSample> out;
    out.reserve(mus.size());
    for (double mu : mus) out.push_back(xi_estimate(x, window, mu, replicate_id));
    return out;
}

}  // namespace fslln
