// Command-line front end: simulate, check-conditions, rmse-table, cov-audit, qq-data.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fslln.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitComparison = 3;

struct RunOptions {
    std::string config;
    std::vector<std::string> overrides;
    std::string out = "out";
    std::optional<std::uint64_t> seed;
};

void print_error(const std::string& code, const std::string& key, const std::string& message) {
    json j{{"error", code}, {"message", message}};
    if (!key.empty()) j["key"] = key;
    std::cerr << j.dump() << '\n';
}

/// Seed precedence: --seed, then FIELD_SLLN_SEED, then the config file.
fslln::ParsedConfig load_config(const RunOptions& opt) {
    auto pc = opt.config.empty() ? fslln::parse_config_text("", opt.overrides)
                                 : fslln::parse_config(opt.config, opt.overrides);
    std::optional<std::uint64_t> seed = opt.seed;
    if (!seed) {
        if (const char* env = std::getenv("FIELD_SLLN_SEED"); env && *env) {
            try {
                seed = fslln::detail::to_int<std::uint64_t>("FIELD_SLLN_SEED", env);
            } catch (const fslln::ConfigError&) {
                throw fslln::ConfigError("invalid_value", "FIELD_SLLN_SEED", "FIELD_SLLN_SEED is not a u64");
            }
        }
    }
    if (!seed) seed = pc.seed;
    if (!seed) throw fslln::ConfigError("missing_seed", "seed", "no seed given (--seed, FIELD_SLLN_SEED or config)");
    pc.seed = seed;
    pc.experiment.seed = *seed;
    return pc;
}

void add_run_options(CLI::App* sub, RunOptions& opt) {
    sub->add_option("--config", opt.config, "Experiment config file (key = value lines)");
    sub->add_option("--set", opt.overrides, "Override a config key (key=value), repeatable")->take_all();
    sub->add_option("--out", opt.out, "Output directory")->capture_default_str();
    sub->add_option("--seed", opt.seed, "Base seed (u64)");
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    os << text;
}

std::vector<fslln::RmseRow> rows_from_samples(const std::vector<std::pair<double, std::vector<double>>>& samples) {
    std::vector<fslln::RmseRow> rows;
    for (const auto& [mu, xs] : samples) rows.push_back({mu, fslln::summarize_mu(mu, xs).rmse});
    return rows;
}

std::vector<std::pair<double, std::vector<double>>> samples_from_result(const fslln::ExperimentResult& r) {
    std::vector<std::pair<double, std::vector<double>>> out;
    for (std::size_t m = 0; m < r.samples.size(); ++m) out.emplace_back(r.config.mus[m], r.values_at(m));
    return out;
}

int cmd_simulate(const RunOptions& opt) {
    const auto pc = load_config(opt);
    const auto result = fslln::run_experiment(pc.experiment);
    const fs::path out(opt.out);
    fslln::write_experiment(out, result, pc);
    if (pc.export_field != fslln::FieldExport::None) {
        const auto& c = pc.experiment;
        const auto seed0 = result.child_seeds.front();
        const auto z = c.generator == fslln::GeneratorKind::Circulant
                           ? fslln::CirculantSampler(c.covariance, c.grid, c.embedding).sample(seed0)
                           : fslln::CholeskySampler(c.covariance, c.grid).sample(seed0);
        const auto x = fslln::transform_field(z, c.weight, c.k);
        if (pc.export_field == fslln::FieldExport::Binary) {
            std::ofstream os(out / "field_x.bin", std::ios::binary);
            fslln::write_field_binary(os, x);
        } else {
            std::ofstream os(out / "field_x.csv", std::ios::binary);
            fslln::write_field_csv(os, x);
        }
    }
    json summary = json::array();
    for (const auto& s : result.summaries)
        summary.push_back({{"mu", s.mu}, {"rmse", s.rmse}, {"mean", s.mean}, {"var", s.variance}});
    std::cout << json{{"out", out.string()}, {"summary", summary}}.dump() << '\n';
    return kExitOk;
}

int cmd_check(double beta, double gamma, int d, std::optional<double> alpha) {
    const fslln::RegimeParams p{beta, gamma, d};
    const auto v = fslln::theorem2_regime(p);
    json j;
    j["beta"] = beta;
    j["gamma"] = gamma;
    j["d"] = d;
    j["outcome"] = fslln::to_string(v.outcome);
    if (v.alpha_interval.empty())
        j["alpha_interval"] = nullptr;
    else
        j["alpha_interval"] = {v.alpha_interval.lower,
                               std::isinf(v.alpha_interval.upper) ? json(nullptr) : json(v.alpha_interval.upper)};
    j["gamma_zero_extension"] = v.gamma_zero;
    j["dependence"] = fslln::to_string(fslln::dependence_class(beta, gamma, d));
    if (alpha) {
        j["alpha"] = *alpha;
        j["lemma1_series_converges"] = fslln::lemma1_series_converges(*alpha, p);
        j["lemma2_series_converge"] = fslln::lemma2_series_converge(*alpha, p);
    }
    std::cout << j.dump() << '\n';
    return kExitOk;
}

int cmd_rmse_table(const RunOptions& opt, const std::string& samples_path, const std::string& reference_path,
                   double rel_tol) {
    std::vector<std::pair<double, std::vector<double>>> samples;
    if (!samples_path.empty()) {
        std::ifstream is(samples_path);
        if (!is) throw fslln::ConfigError("missing_file", samples_path, "cannot open samples file");
        samples = fslln::read_samples_csv(is);
    } else {
        const auto pc = load_config(opt);
        const auto result = fslln::run_experiment(pc.experiment);
        fslln::write_experiment(opt.out, result, pc);
        samples = samples_from_result(result);
    }
    const auto rows = rows_from_samples(samples);
    fs::create_directories(opt.out);
    {
        std::ofstream os(fs::path(opt.out) / "rmse.csv", std::ios::binary);
        os << "mu,rmse\n";
        for (const auto& r : rows) os << fslln::detail::fmt17(r.mu) << ',' << fslln::detail::fmt17(r.rmse) << '\n';
    }
    json table = json::array();
    for (const auto& r : rows) table.push_back({{"mu", r.mu}, {"rmse", r.rmse}});
    json j{{"rmse", table}, {"strictly_decreasing", fslln::strictly_decreasing(rows)}};
    if (rows.size() >= 2) j["slope"] = fslln::rmse_slope(rows);
    int code = kExitOk;
    if (!reference_path.empty()) {
        std::ifstream is(reference_path);
        if (!is) throw fslln::ConfigError("missing_file", reference_path, "cannot open reference file");
        const auto reference = fslln::read_reference_csv(is);
        const double tol[] = {rel_tol};
        const auto report = fslln::compare_to_reference(rows, reference, tol);
        json cmp = json::array();
        for (const auto& r : report.rows)
            cmp.push_back({{"mu", r.mu},
                           {"rmse", r.rmse},
                           {"reference", r.reference},
                           {"relative_error", r.relative_error},
                           {"pass", r.pass}});
        j["comparison"] = cmp;
        j["comparison_slope"] = std::isnan(report.slope) ? json(nullptr) : json(report.slope);
        j["pass"] = report.pass;
        if (!report.pass) code = kExitComparison;
    }
    std::cout << j.dump() << '\n';
    if (code == kExitComparison) print_error("comparison", "", "RMSE outside the reference tolerance");
    return code;
}

int cmd_cov_audit(const RunOptions& opt) {
    const auto pc = load_config(opt);
    const auto& c = pc.experiment;
    const auto R = static_cast<std::size_t>(std::max(c.replicates, 2));
    std::vector<fslln::FieldRealization> fields;
    fields.reserve(R);
    std::optional<fslln::EmbeddingReport> report;
    if (c.generator == fslln::GeneratorKind::Circulant) {
        const fslln::CirculantSampler s(c.covariance, c.grid, c.embedding);
        report = s.report();
        for (std::size_t r = 0; r < R; ++r) fields.push_back(s.sample(fslln::mix_seed(c.seed, r)));
    } else {
        const fslln::CholeskySampler s(c.covariance, c.grid);
        for (std::size_t r = 0; r < R; ++r) fields.push_back(s.sample(fslln::mix_seed(c.seed, r)));
    }
    std::vector<std::array<int, 2>> lags{{0, 0}, {1, 0}, {2, 0}, {5, 0}, {1, 1}};
    if (c.d == 1) lags = {{0, 0}, {1, 0}, {2, 0}, {5, 0}};
    for (auto& l : lags) l[0] = std::min(l[0], c.grid.N);
    const auto audit = fslln::empirical_cov_audit(fields, lags, c.covariance);
    json lag_rows = json::array();
    for (const auto& e : audit.lags)
        lag_rows.push_back({{"lag", {e.lag[0], e.lag[1]}},
                            {"distance", e.distance},
                            {"estimate", e.estimate},
                            {"standard_error", e.standard_error},
                            {"model", e.model_value}});
    json j{{"replicates", R},
           {"lags", lag_rows},
           {"max_model_deviation", audit.max_model_deviation},
           {"isotropy_defect", audit.isotropy_defect},
           {"isotropy_se", audit.isotropy_se},
           {"homogeneity_defect", audit.homogeneity_defect},
           {"homogeneity_se", audit.homogeneity_se}};
    if (report) j["clipped_mass"] = report->clipped_mass;
    fs::create_directories(opt.out);
    write_text(fs::path(opt.out) / "cov_audit.json", j.dump(2) + "\n");
    std::cout << j.dump() << '\n';
    return kExitOk;
}

int cmd_qq(const RunOptions& opt, const std::string& samples_path) {
    const fs::path path = samples_path.empty() ? fs::path(opt.out) / "samples.csv" : fs::path(samples_path);
    std::ifstream is(path);
    if (!is) throw fslln::ConfigError("missing_file", path.string(), "cannot open samples file");
    const auto samples = fslln::read_samples_csv(is);
    std::vector<double> mus;
    std::vector<fslln::DistributionSummary> dists;
    json out = json::array();
    for (const auto& [mu, xs] : samples) {
        if (xs.size() < 30) continue;
        dists.push_back(fslln::distribution_summary(xs));
        mus.push_back(mu);
        out.push_back(fslln::to_json(dists.back(), mu));
    }
    fs::create_directories(opt.out);
    std::ofstream os(fs::path(opt.out) / "qq.csv", std::ios::binary);
    fslln::write_qq_csv(os, mus, dists);
    std::cout << json{{"distributions", out}}.dump() << '\n';
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Random-field SLLN simulation and condition checks"};
    app.require_subcommand(1);

    RunOptions sim_opt, rmse_opt, audit_opt, qq_opt;
    auto* sim = app.add_subcommand("simulate", "Run the Monte Carlo experiment and write CSV/JSON outputs");
    add_run_options(sim, sim_opt);

    double beta = 0, gamma = 0;
    int d = 2;
    std::optional<double> alpha;
    auto* check = app.add_subcommand("check-conditions", "Classify (beta, gamma, d) and print the alpha interval");
    check->add_option("--beta", beta, "Envelope decay exponent")->required();
    check->add_option("--gamma", gamma, "Envelope growth exponent")->required();
    check->add_option("--d", d, "Dimension")->required();
    check->add_option("--alpha", alpha, "Exponent of mu_n = n^alpha to test");

    std::string rmse_samples, reference;
    double rel_tol = 0.3;
    auto* rmse = app.add_subcommand("rmse-table", "RMSE per mu, optionally compared with a reference table");
    add_run_options(rmse, rmse_opt);
    rmse->add_option("--samples", rmse_samples, "Existing samples.csv instead of running the experiment");
    rmse->add_option("--reference", reference, "Reference CSV (mu,rmse)");
    rmse->add_option("--rel-tol", rel_tol, "Relative tolerance per row")->capture_default_str();

    auto* audit = app.add_subcommand("cov-audit", "Empirical covariance audit of generated fields");
    add_run_options(audit, audit_opt);

    std::string qq_samples;
    auto* qq = app.add_subcommand("qq-data", "Q-Q export and normality diagnostics from samples.csv");
    add_run_options(qq, qq_opt);
    qq->add_option("--samples", qq_samples, "samples.csv path (default <out>/samples.csv)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        print_error("usage", "", e.what());
        return kExitValidation;
    }

    try {
        if (*sim) return cmd_simulate(sim_opt);
        if (*check) return cmd_check(beta, gamma, d, alpha);
        if (*rmse) return cmd_rmse_table(rmse_opt, rmse_samples, reference, rel_tol);
        if (*audit) return cmd_cov_audit(audit_opt);
        if (*qq) return cmd_qq(qq_opt, qq_samples);
    } catch (const fslln::ConfigError& e) {
        print_error(e.code(), e.key(), e.what());
        return kExitValidation;
    } catch (const fslln::DomainError& e) {
        print_error(e.code(), "", e.what());
        return kExitValidation;
    } catch (const fslln::Error& e) {
        print_error(e.code(), "", e.what());
        return kExitRuntime;
    } catch (const std::exception& e) {
        print_error("runtime", "", e.what());
        return kExitRuntime;
    }
    return kExitValidation;
}
