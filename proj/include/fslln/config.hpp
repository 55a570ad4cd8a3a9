#pragma once

// Flat `key = value` experiment configuration: parsing with validation,
// command-line overrides, and exact re-emission.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "fslln/errors.hpp"
#include "fslln/experiment_harness.hpp"

namespace fslln {

enum class FieldExport { None, Binary, Csv };

struct ParsedConfig {
    ExperimentConfig experiment;
    std::optional<std::uint64_t> seed;  ///< as given in the file or overrides
    FieldExport export_field = FieldExport::None;

    bool operator==(const ParsedConfig&) const = default;
};

inline const std::set<std::string>& known_config_keys() {
    static const std::set<std::string> keys{
        "seed",        "d",          "cov.kind",       "cov.beta",          "cov.L.kind",      "cov.L.c",
        "cov.L.p",     "cov.L.q",    "cov.rmin",       "weight.kind",       "weight.c",        "weight.l",
        "weight.q",    "hermite.k",  "window.kind",    "grid.h",            "grid.N",          "gen.kind",
        "gen.embedding", "gen.clip_threshold", "gen.max_padding", "mus",   "replicates",      "nesting",
        "threads",     "export.field"};
    return keys;
}

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] inline void bad_value(const std::string& key, const std::string& why) {
    throw ConfigError("invalid_value", key, key + ": " + why);
}

inline double to_double(const std::string& key, const std::string& text) {
    double v = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end || !std::isfinite(v)) bad_value(key, "not a finite number: '" + text + "'");
    return v;
}

template <typename Int>
Int to_int(const std::string& key, const std::string& text) {
    Int v = 0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end) bad_value(key, "not an integer: '" + text + "'");
    return v;
}

inline std::vector<double> to_list(const std::string& key, const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_double(key, trim(item)));
    if (out.empty()) bad_value(key, "empty list");
    return out;
}

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string fmt_list(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + fmt17(v[i]);
    return out;
}

}  // namespace detail

/// Parses `key = value` lines (`#` starts a comment) into a raw map.
/// Throws ConfigError on malformed lines, unknown or repeated keys.
inline std::map<std::string, std::string> parse_config_lines(std::string_view text) {
    std::map<std::string, std::string> kv;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto body = detail::trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            throw ConfigError("parse", "line " + std::to_string(lineno), "expected key = value on line " + std::to_string(lineno));
        const auto key = detail::trim(std::string_view(body).substr(0, eq));
        const auto value = detail::trim(std::string_view(body).substr(eq + 1));
        if (!known_config_keys().count(key)) throw ConfigError("unknown_key", key, "unknown key '" + key + "'");
        if (kv.count(key)) throw ConfigError("duplicate_key", key, "key '" + key + "' given twice");
        kv[key] = value;
    }
    return kv;
}

/// Builds a validated configuration from file text and `key=value`
/// overrides (applied after the file). Unset keys take the reduced-scale
/// defaults of ExperimentConfig.
inline ParsedConfig parse_config_text(std::string_view text, const std::vector<std::string>& overrides = {}) {
    using detail::bad_value;
    auto kv = parse_config_lines(text);
    for (const auto& o : overrides) {
        const auto eq = o.find('=');
        if (eq == std::string::npos) throw ConfigError("parse", o, "override must be key=value: '" + o + "'");
        const auto key = detail::trim(std::string_view(o).substr(0, eq));
        if (!known_config_keys().count(key)) throw ConfigError("unknown_key", key, "unknown key '" + key + "'");
        kv[key] = detail::trim(std::string_view(o).substr(eq + 1));
    }
    const auto get = [&](const std::string& key) -> std::optional<std::string> {
        const auto it = kv.find(key);
        if (it == kv.end()) return std::nullopt;
        return it->second;
    };
    const auto num = [&](const std::string& key, double fallback) {
        const auto v = get(key);
        return v ? detail::to_double(key, *v) : fallback;
    };
    const auto positive = [&](const std::string& key, double fallback) {
        const double v = num(key, fallback);
        if (!(v > 0.0)) bad_value(key, "must be > 0");
        return v;
    };

    ParsedConfig pc;
    auto& c = pc.experiment;
    if (auto v = get("seed")) pc.seed = detail::to_int<std::uint64_t>("seed", *v);
    if (auto v = get("d")) c.d = detail::to_int<int>("d", *v);
    if (c.d != 1 && c.d != 2) bad_value("d", "must be 1 or 2");

    const std::string cov_kind = get("cov.kind").value_or("cauchy");
    if (cov_kind == "cauchy") {
        c.covariance = CauchyCov{positive("cov.beta", 0.4)};
    } else if (cov_kind == "powerlaw") {
        PowerLawCov m;
        m.beta0 = positive("cov.beta", m.beta0);
        m.rmin = positive("cov.rmin", m.rmin);
        const std::string lk = get("cov.L.kind").value_or("constant");
        if (lk == "constant") {
            m.L = ConstantL{positive("cov.L.c", 1.0)};
        } else if (lk == "logpower") {
            LogPowerL L;
            L.p = num("cov.L.p", L.p);
            L.q = num("cov.L.q", L.q);
            if (!(L.q > 1.0)) bad_value("cov.L.q", "must be > 1");
            m.L = L;
        } else {
            bad_value("cov.L.kind", "expected constant or logpower");
        }
        c.covariance = m;
    } else {
        bad_value("cov.kind", "expected cauchy or powerlaw");
    }

    const std::string wk = get("weight.kind").value_or("monomial");
    if (wk == "constant") {
        c.weight = ConstantWeight{positive("weight.c", 1.0)};
    } else if (wk == "monomial") {
        MonomialProductWeight w;
        w.l = get("weight.l") ? detail::to_list("weight.l", *get("weight.l")) : std::vector<double>(c.d, 0.1);
        for (double l : w.l)
            if (!(l > 0.0)) bad_value("weight.l", "exponents must be > 0");
        if (w.l.size() != static_cast<std::size_t>(c.d)) bad_value("weight.l", "needs d entries");
        c.weight = w;
    } else if (wk == "logproduct") {
        LogProductWeight w;
        w.q = get("weight.q") ? detail::to_list("weight.q", *get("weight.q")) : std::vector<double>(c.d, 2.0);
        for (double q : w.q)
            if (!(q > 1.0)) bad_value("weight.q", "offsets must be > 1");
        if (w.q.size() != static_cast<std::size_t>(c.d)) bad_value("weight.q", "needs d entries");
        c.weight = w;
    } else {
        bad_value("weight.kind", "expected constant, monomial or logproduct");
    }

    if (auto v = get("hermite.k")) c.k = detail::to_int<int>("hermite.k", *v);
    if (c.k < 1) bad_value("hermite.k", "must be >= 1");

    const std::string win = get("window.kind").value_or("square");
    if (win == "square")
        c.window = WindowKind::Square;
    else if (win == "disk")
        c.window = WindowKind::Disk;
    else
        bad_value("window.kind", "expected square or disk");

    c.grid.d = c.d;
    c.grid.h = positive("grid.h", c.grid.h);
    if (auto v = get("grid.N")) c.grid.N = detail::to_int<int>("grid.N", *v);
    if (c.grid.N < 0) bad_value("grid.N", "must be >= 0");

    const std::string gk = get("gen.kind").value_or("circulant");
    if (gk == "circulant")
        c.generator = GeneratorKind::Circulant;
    else if (gk == "cholesky")
        c.generator = GeneratorKind::Cholesky;
    else
        bad_value("gen.kind", "expected cholesky or circulant");
    const std::string em = get("gen.embedding").value_or("clip");
    if (em == "clip")
        c.embedding.mode = EmbeddingMode::Clip;
    else if (em == "strict")
        c.embedding.mode = EmbeddingMode::Strict;
    else
        bad_value("gen.embedding", "expected strict or clip");
    c.embedding.clip_report_threshold = num("gen.clip_threshold", c.embedding.clip_report_threshold);
    if (!(c.embedding.clip_report_threshold >= 0.0 && c.embedding.clip_report_threshold < 1.0))
        bad_value("gen.clip_threshold", "must lie in [0, 1)");
    c.embedding.max_padding_factor = num("gen.max_padding", c.embedding.max_padding_factor);
    if (!(c.embedding.max_padding_factor >= 1.0)) bad_value("gen.max_padding", "must be >= 1");

    if (auto v = get("mus")) c.mus = detail::to_list("mus", *v);
    for (std::size_t i = 0; i < c.mus.size(); ++i) {
        if (!(c.mus[i] > 0.0)) bad_value("mus", "values must be > 0");
        if (i > 0 && !(c.mus[i] > c.mus[i - 1])) bad_value("mus", "must be strictly increasing");
    }
    if (auto v = get("replicates")) c.replicates = detail::to_int<int>("replicates", *v);
    if (c.replicates < 1) bad_value("replicates", "must be >= 1");
    const std::string nest = get("nesting").value_or("nested");
    if (nest == "nested")
        c.nesting = Nesting::Nested;
    else if (nest == "independent")
        c.nesting = Nesting::Independent;
    else
        bad_value("nesting", "expected nested or independent");
    if (auto v = get("threads")) c.threads = detail::to_int<int>("threads", *v);
    if (c.threads < 1) bad_value("threads", "must be >= 1");

    const std::string ex = get("export.field").value_or("none");
    if (ex == "none")
        pc.export_field = FieldExport::None;
    else if (ex == "binary")
        pc.export_field = FieldExport::Binary;
    else if (ex == "csv")
        pc.export_field = FieldExport::Csv;
    else
        bad_value("export.field", "expected none, binary or csv");

    if (pc.seed) c.seed = *pc.seed;
    try {
        c.validate();
    } catch (const DomainError& e) {
        throw ConfigError("invalid_value", "config", e.what());
    }
    return pc;
}

inline ParsedConfig parse_config(const std::string& path, const std::vector<std::string>& overrides = {}) {
    std::ifstream in(path);
    if (!in) throw ConfigError("missing_file", path, "cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), overrides);
}

/// Every resolved key, one per line; parse_config_text(emit_config(c)) == c.
inline std::string emit_config(const ParsedConfig& pc) {
    using detail::fmt17;
    const auto& c = pc.experiment;
    std::ostringstream os;
    if (pc.seed) os << "seed = " << *pc.seed << "\n";
    os << "d = " << c.d << "\n";
    std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, CauchyCov>) {
                os << "cov.kind = cauchy\ncov.beta = " << fmt17(m.beta) << "\n";
            } else {
                os << "cov.kind = powerlaw\ncov.beta = " << fmt17(m.beta0) << "\ncov.rmin = " << fmt17(m.rmin) << "\n";
                if (const auto* L = std::get_if<ConstantL>(&m.L))
                    os << "cov.L.kind = constant\ncov.L.c = " << fmt17(L->c) << "\n";
                else {
                    const auto& lp = std::get<LogPowerL>(m.L);
                    os << "cov.L.kind = logpower\ncov.L.p = " << fmt17(lp.p) << "\ncov.L.q = " << fmt17(lp.q) << "\n";
                }
            }
        },
        c.covariance);
    std::visit(
        [&](const auto& w) {
            using T = std::decay_t<decltype(w)>;
            if constexpr (std::is_same_v<T, ConstantWeight>)
                os << "weight.kind = constant\nweight.c = " << fmt17(w.c) << "\n";
            else if constexpr (std::is_same_v<T, MonomialProductWeight>)
                os << "weight.kind = monomial\nweight.l = " << detail::fmt_list(w.l) << "\n";
            else
                os << "weight.kind = logproduct\nweight.q = " << detail::fmt_list(w.q) << "\n";
        },
        c.weight);
    os << "hermite.k = " << c.k << "\n";
    os << "window.kind = " << to_string(c.window) << "\n";
    os << "grid.h = " << fmt17(c.grid.h) << "\ngrid.N = " << c.grid.N << "\n";
    os << "gen.kind = " << (c.generator == GeneratorKind::Circulant ? "circulant" : "cholesky") << "\n";
    os << "gen.embedding = " << (c.embedding.mode == EmbeddingMode::Clip ? "clip" : "strict") << "\n";
    os << "gen.clip_threshold = " << fmt17(c.embedding.clip_report_threshold) << "\n";
    os << "gen.max_padding = " << fmt17(c.embedding.max_padding_factor) << "\n";
    os << "mus = " << detail::fmt_list(c.mus) << "\n";
    os << "replicates = " << c.replicates << "\n";
    os << "nesting = " << (c.nesting == Nesting::Nested ? "nested" : "independent") << "\n";
    os << "threads = " << c.threads << "\n";
    os << "export.field = "
       << (pc.export_field == FieldExport::None ? "none" : pc.export_field == FieldExport::Binary ? "binary" : "csv")
       << "\n";
    return os.str();
}

}  // namespace fslln
