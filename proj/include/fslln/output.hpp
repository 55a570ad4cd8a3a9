#pragma once

// CSV and JSON artifacts of an experiment run. All numbers are written with
// 17 significant digits; CSV uses ',' separators, LF endings, header row.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "fslln/config.hpp"
#include "fslln/experiment_harness.hpp"
#include "fslln/statistics.hpp"
#include "json.hpp"

namespace fslln {

inline constexpr const char* kVersion = "1.0.0";

namespace detail {
inline std::string g17(double v) { return fmt17(v); }

inline std::string quantile_header() {
    std::string h;
    for (double p : kSummaryProbs) {
        char buf[16];
        std::snprintf(buf, sizeof buf, ",q%02d", static_cast<int>(std::lround(p * 100)));
        h += buf;
    }
    return h;
}
}  // namespace detail

/// mu,replicate,xi,node_count; rows ordered by mu then replicate.
inline void write_samples_csv(std::ostream& os, const ExperimentResult& r) {
    os << "mu,replicate,xi,node_count\n";
    for (const auto& per_mu : r.samples)
        for (const auto& s : per_mu)
            os << detail::g17(s.mu) << ',' << s.replicate_id << ',' << detail::g17(s.value) << ',' << s.node_count
               << '\n';
}

inline void write_summary_csv(std::ostream& os, const ExperimentResult& r) {
    os << "mu,rmse,mean,var,skew,kurt" << detail::quantile_header() << '\n';
    for (const auto& s : r.summaries) {
        os << detail::g17(s.mu) << ',' << detail::g17(s.rmse) << ',' << detail::g17(s.mean) << ','
           << detail::g17(s.variance) << ',' << detail::g17(s.skewness) << ',' << detail::g17(s.excess_kurtosis);
        for (double q : s.quantiles) os << ',' << detail::g17(q);
        os << '\n';
    }
}

/// mu,theoretical_quantile,sample_quantile for every mu with >= 30 samples.
inline void write_qq_csv(std::ostream& os, const std::vector<double>& mus,
                         const std::vector<DistributionSummary>& summaries) {
    os << "mu,theoretical_quantile,sample_quantile\n";
    for (std::size_t m = 0; m < mus.size(); ++m)
        for (const auto& [t, s] : summaries[m].qq)
            os << detail::g17(mus[m]) << ',' << detail::g17(t) << ',' << detail::g17(s) << '\n';
}

inline nlohmann::json to_json(const DistributionSummary& s, double mu) {
    nlohmann::json j;
    j["mu"] = mu;
    j["n"] = s.n;
    j["degenerate"] = s.degenerate;
    j["mean"] = s.mean;
    j["variance"] = s.variance;
    j["skewness"] = s.skewness;
    j["skewness_se"] = s.skewness_se;
    j["excess_kurtosis"] = s.excess_kurtosis;
    j["kurtosis_se"] = s.kurtosis_se;
    if (!s.degenerate) {
        j["omnibus_k2"] = s.omnibus.k2;
        j["omnibus_p"] = s.omnibus.p_value;
        j["z_skew"] = s.omnibus.z_skew;
        j["z_kurt"] = s.omnibus.z_kurt;
        j["reject_normality_5pct"] = s.omnibus.k2 > kChi2Df2Crit05;
    }
    return j;
}

inline nlohmann::json meta_json(const ExperimentResult& r, const ParsedConfig& pc) {
    nlohmann::json j;
    j["version"] = kVersion;
    j["config_text"] = emit_config(pc);
    nlohmann::json cfg;
    for (const auto& [k, v] : parse_config_lines(emit_config(pc))) cfg[k] = v;
    j["config"] = cfg;
    j["seed"] = r.config.seed;
    j["child_seeds"] = r.child_seeds;
    if (r.embedding) {
        nlohmann::json e;
        e["size"] = r.embedding->size;
        e["clipped_mass"] = r.embedding->clipped_mass;
        nlohmann::json tries = nlohmann::json::array();
        for (const auto& a : r.embedding->attempts) tries.push_back({{"size", a.size}, {"negative_mass", a.negative_mass}});
        e["attempts"] = tries;
        j["embedding"] = e;
    } else {
        j["embedding"] = nullptr;
    }
    j["wall_seconds"] = r.wall_seconds;
    return j;
}

/// Writes samples.csv, summary.csv, qq.csv and meta.json into `dir`.
inline void write_experiment(const std::filesystem::path& dir, const ExperimentResult& r, const ParsedConfig& pc) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream os(dir / "samples.csv", std::ios::binary);
        write_samples_csv(os, r);
    }
    {
        std::ofstream os(dir / "summary.csv", std::ios::binary);
        write_summary_csv(os, r);
    }
    std::vector<DistributionSummary> dists;
    std::vector<double> mus;
    for (std::size_t m = 0; m < r.samples.size(); ++m) {
        if (r.samples[m].size() < 30) continue;
        dists.push_back(distribution_summary(r.values_at(m)));
        mus.push_back(r.config.mus[m]);
    }
    {
        std::ofstream os(dir / "qq.csv", std::ios::binary);
        write_qq_csv(os, mus, dists);
    }
    {
        auto meta = meta_json(r, pc);
        nlohmann::json d = nlohmann::json::array();
        for (std::size_t i = 0; i < dists.size(); ++i) d.push_back(to_json(dists[i], mus[i]));
        meta["distributions"] = d;
        std::ofstream os(dir / "meta.json", std::ios::binary);
        os << meta.dump(2) << '\n';
    }
}

/// Reads mu,replicate,xi,node_count rows back into per-mu sample vectors.
inline std::vector<std::pair<double, std::vector<double>>> read_samples_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("mu,", 0) != 0) throw InputError("samples file lacks header");
    std::vector<std::pair<double, std::vector<double>>> out;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string mu_s, rep_s, xi_s;
        if (!std::getline(ss, mu_s, ',') || !std::getline(ss, rep_s, ',') || !std::getline(ss, xi_s, ','))
            throw InputError("malformed samples row: " + line);
        const double mu = detail::to_double("mu", mu_s);
        const double xi = detail::to_double("xi", xi_s);
        if (out.empty() || out.back().first != mu) out.emplace_back(mu, std::vector<double>{});
        out.back().second.push_back(xi);
    }
    return out;
}

/// Reference table: header then mu,rmse rows.
inline std::vector<RmseRow> read_reference_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw InputError("empty reference file");
    std::vector<RmseRow> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw InputError("malformed reference row: " + line);
        rows.push_back({detail::to_double("mu", detail::trim(line.substr(0, comma))),
                        detail::to_double("rmse", detail::trim(line.substr(comma + 1)))});
    }
    if (rows.empty()) throw InputError("reference table has no rows");
    return rows;
}

}  // namespace fslln
