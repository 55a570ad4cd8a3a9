#pragma once

// Seeded Monte Carlo driver: replicate fields, xi(mu) curves, RMSE tables
// and distribution summaries.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "fslln/covariance_models.hpp"
#include "fslln/errors.hpp"
#include "fslln/field_synthesis.hpp"
#include "fslln/functional_estimator.hpp"
#include "fslln/hermite_weights.hpp"
#include "fslln/random.hpp"
#include "fslln/statistics.hpp"

namespace fslln {

enum class GeneratorKind { Cholesky, Circulant };
enum class Nesting { Nested, Independent };

struct ExperimentConfig {
    int d = 2;
    CovarianceModel covariance = CauchyCov{0.4};
    WeightFunction weight = MonomialProductWeight{{0.1, 0.1}};
    int k = 2;
    WindowKind window = WindowKind::Square;
    Grid grid{2, 0.5, 200};
    std::vector<double> mus{10.0, 50.0, 100.0};
    int replicates = 100;
    std::uint64_t seed = 0;
    GeneratorKind generator = GeneratorKind::Circulant;
    EmbeddingPolicy embedding;
    Nesting nesting = Nesting::Nested;
    int threads = 1;

    bool operator==(const ExperimentConfig&) const = default;

    Window make_window() const { return window == WindowKind::Disk ? Window::disk(d) : Window::square(d); }

    void validate() const {
        if (d != 1 && d != 2) throw DomainError("d must be 1 or 2");
        if (grid.d != d) throw DomainError("grid dimension must equal d");
        grid.validate();
        fslln::validate(covariance);
        fslln::validate(weight);
        const auto wd = weight_dimension(weight);
        if (wd != 0 && wd != static_cast<std::size_t>(d)) throw DomainError("weight dimension must equal d");
        if (k < 1) throw DomainError("Hermite order k must be >= 1");
        if (replicates < 1) throw DomainError("replicates must be >= 1");
        if (threads < 1) throw DomainError("threads must be >= 1");
        if (mus.empty()) throw DomainError("mus must not be empty");
        for (std::size_t i = 0; i < mus.size(); ++i) {
            if (!(mus[i] > 0.0)) throw DomainError("mus must be > 0");
            if (i > 0 && !(mus[i] > mus[i - 1])) throw DomainError("mus must be strictly increasing");
        }
        embedding.validate();
    }
};

struct MuSummary {
    double mu = 0.0;
    std::size_t n = 0;
    double rmse = 0.0;
    double mean = 0.0;
    double variance = 0.0;  ///< population normalisation, so rmse^2 = variance + mean^2
    double skewness = 0.0;
    double excess_kurtosis = 0.0;
    std::array<double, kSummaryProbs.size()> quantiles{};
};

struct ExperimentResult {
    ExperimentConfig config;
    /// samples[m][r]: xi(mus[m]) of replicate r.
    std::vector<std::vector<XiSample>> samples;
    std::vector<MuSummary> summaries;
    std::vector<std::uint64_t> child_seeds;
    std::optional<EmbeddingReport> embedding;
    double wall_seconds = 0.0;

    std::vector<double> values_at(std::size_t m) const {
        std::vector<double> out;
        out.reserve(samples[m].size());
        for (const auto& s : samples[m]) out.push_back(s.value);
        return out;
    }
};

inline MuSummary summarize_mu(double mu, std::span<const double> xs) {
    MuSummary s;
    s.mu = mu;
    s.n = xs.size();
    const auto m = moments(xs);
    s.mean = m.mean;
    s.variance = m.m2;
    s.rmse = std::sqrt(m.mean_square);
    if (m.m2 > 0.0) {
        s.skewness = m.m3 / std::pow(m.m2, 1.5);
        s.excess_kurtosis = m.m4 / (m.m2 * m.m2) - 3.0;
    }
    std::vector<double> sorted(xs.begin(), xs.end());
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < kSummaryProbs.size(); ++i) s.quantiles[i] = quantile_sorted(sorted, kSummaryProbs[i]);
    return s;
}

/// Runs every replicate r with child seed mix_seed(seed, r). Replicates may
/// run on several threads; results are stored by replicate index and all
/// reductions run afterwards in index order, so the output does not depend
/// on the thread count. Any failing replicate aborts the run.
inline ExperimentResult run_experiment(const ExperimentConfig& config) {
    config.validate();
    const auto t0 = std::chrono::steady_clock::now();
    const Window window = config.make_window();
    for (double mu : config.mus)
        if (mu * window.sup_radius() > config.grid.extent() * (1.0 + 1e-12))
            throw CoverageError("mu = " + std::to_string(mu) + " exceeds grid extent " +
                                std::to_string(config.grid.extent()));

    ExperimentResult result;
    result.config = config;
    std::function<FieldRealization(std::uint64_t)> sampler;
    std::shared_ptr<CirculantSampler> circulant;
    std::shared_ptr<CholeskySampler> cholesky;
    if (config.generator == GeneratorKind::Circulant) {
        circulant = std::make_shared<CirculantSampler>(config.covariance, config.grid, config.embedding);
        result.embedding = circulant->report();
        sampler = [circulant](std::uint64_t s) { return circulant->sample(s); };
    } else {
        cholesky = std::make_shared<CholeskySampler>(config.covariance, config.grid);
        sampler = [cholesky](std::uint64_t s) { return cholesky->sample(s); };
    }

    const auto R = static_cast<std::size_t>(config.replicates);
    const auto M = config.mus.size();
    result.child_seeds.resize(R);
    for (std::size_t r = 0; r < R; ++r) result.child_seeds[r] = mix_seed(config.seed, r);
    std::vector<std::vector<XiSample>> per_rep(R);
    std::vector<std::exception_ptr> errors(R);

    const auto run_one = [&](std::size_t r) {
        const std::uint64_t child = result.child_seeds[r];
        if (config.nesting == Nesting::Nested) {
            per_rep[r] = xi_curve(sampler(child), config.weight, config.k, window, config.mus, static_cast<int>(r));
        } else {
            per_rep[r].reserve(M);
            for (std::size_t m = 0; m < M; ++m) {
                const auto x = transform_field(sampler(mix_seed(child, m + 1)), config.weight, config.k);
                per_rep[r].push_back(xi_estimate(x, window, config.mus[m], static_cast<int>(r)));
            }
        }
    };

    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    const auto worker = [&] {
        for (std::size_t r = next++; r < R && !failed; r = next++) {
            try {
                run_one(r);
            } catch (...) {
                errors[r] = std::current_exception();
                failed = true;
            }
        }
    };
    const auto nthreads = std::min<std::size_t>(static_cast<std::size_t>(config.threads), R);
    if (nthreads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    }
    for (std::size_t r = 0; r < R; ++r) {
        if (!errors[r]) continue;
        try {
            std::rethrow_exception(errors[r]);
        } catch (const Error& e) {
            throw Error(e.code(), "replicate " + std::to_string(r) + ": " + e.what());
        }
    }

    result.samples.assign(M, {});
    for (std::size_t m = 0; m < M; ++m) {
        result.samples[m].reserve(R);
        for (std::size_t r = 0; r < R; ++r) result.samples[m].push_back(per_rep[r][m]);
        const auto xs = result.values_at(m);
        result.summaries.push_back(summarize_mu(config.mus[m], xs));
    }
    result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

struct RmseRow {
    double mu = 0.0;
    double rmse = 0.0;
};

inline std::vector<RmseRow> rmse_table(const ExperimentResult& result) {
    std::vector<RmseRow> rows;
    for (const auto& s : result.summaries) rows.push_back({s.mu, s.rmse});
    return rows;
}

inline bool strictly_decreasing(std::span<const RmseRow> rows) {
    for (std::size_t i = 1; i < rows.size(); ++i)
        if (!(rows[i].rmse < rows[i - 1].rmse)) return false;
    return true;
}

inline double rmse_slope(std::span<const RmseRow> rows) {
    std::vector<double> x, y;
    for (const auto& r : rows) {
        x.push_back(r.mu);
        y.push_back(r.rmse);
    }
    return loglog_slope(x, y);
}

/// Reference RMSE of xi(mu) for the Cauchy(0.4), |s1 s2|^0.1 H_2 field.
inline const std::vector<RmseRow>& reference_rmse_table() {
    static const std::vector<RmseRow> rows{{10, 0.217}, {50, 0.106}, {100, 0.079}, {150, 0.068},
                                           {200, 0.057}, {250, 0.052}, {300, 0.048}};
    return rows;
}

struct ComparisonRow {
    double mu = 0.0;
    double rmse = 0.0;
    double reference = 0.0;
    double relative_error = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

struct ComparisonReport {
    std::vector<ComparisonRow> rows;
    double slope = 0.0;  ///< log-log slope of the result's RMSE over the matched mus
    bool pass = false;
};

/// Matches rows by mu (relative tolerance 1e-9). `rel_tol` holds one
/// tolerance per reference row, or a single value for all rows.
inline ComparisonReport compare_to_reference(std::span<const RmseRow> result, std::span<const RmseRow> reference,
                                             std::span<const double> rel_tol) {
    if (rel_tol.empty() || (rel_tol.size() != 1 && rel_tol.size() != reference.size()))
        throw InputError("need one tolerance or one per reference row");
    ComparisonReport report;
    std::vector<RmseRow> matched;
    for (std::size_t i = 0; i < reference.size(); ++i) {
        const auto& ref = reference[i];
        const auto it = std::find_if(result.begin(), result.end(), [&](const RmseRow& r) {
            return std::fabs(r.mu - ref.mu) <= 1e-9 * std::max(1.0, std::fabs(ref.mu));
        });
        if (it == result.end()) continue;
        ComparisonRow row;
        row.mu = ref.mu;
        row.rmse = it->rmse;
        row.reference = ref.rmse;
        row.tolerance = rel_tol.size() == 1 ? rel_tol[0] : rel_tol[i];
        row.relative_error = std::fabs(it->rmse - ref.rmse) / ref.rmse;
        row.pass = row.relative_error <= row.tolerance;
        report.rows.push_back(row);
        matched.push_back(*it);
    }
    if (report.rows.empty()) throw InputError("result and reference share no mu values");
    report.slope = matched.size() >= 2 ? rmse_slope(matched) : std::nan("");
    report.pass = std::all_of(report.rows.begin(), report.rows.end(), [](const auto& r) { return r.pass; });
    return report;
}

}  // namespace fslln
