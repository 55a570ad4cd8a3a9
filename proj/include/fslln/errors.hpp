#pragma once

#include <stdexcept>
#include <string>

namespace fslln {

/// Base of every error raised by the library. `code()` is a stable
/// machine-readable identifier used by the CLI error line.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& what)
        : std::runtime_error(what), code_(std::move(code)) {}
    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

struct DomainError : Error {
    explicit DomainError(const std::string& w) : Error("domain", w) {}
};
struct InputError : Error {
    explicit InputError(const std::string& w) : Error("input", w) {}
};
struct SizeError : Error {
    explicit SizeError(const std::string& w) : Error("size", w) {}
};
struct ModelError : Error {
    explicit ModelError(const std::string& w) : Error("model", w) {}
};
struct UnsupportedModelError : Error {
    explicit UnsupportedModelError(const std::string& w) : Error("unsupported_model", w) {}
};
struct CoverageError : Error {
    explicit CoverageError(const std::string& w) : Error("coverage", w) {}
};
struct DegenerateWindowError : Error {
    explicit DegenerateWindowError(const std::string& w) : Error("degenerate_window", w) {}
};

/// Strict embedding hit negative eigenvalues.
class EmbeddingError : public Error {
public:
    EmbeddingError(const std::string& w, double negative_mass)
        : Error("embedding", w), negative_mass_(negative_mass) {}
    double negative_mass() const noexcept { return negative_mass_; }

private:
    double negative_mass_;
};

/// Clipped embedding exceeded the tolerated negative mass.
class AccuracyError : public Error {
public:
    AccuracyError(const std::string& w, double negative_mass)
        : Error("accuracy", w), negative_mass_(negative_mass) {}
    double negative_mass() const noexcept { return negative_mass_; }

private:
    double negative_mass_;
};

/// Configuration problem tied to a dotted key.
class ConfigError : public Error {
public:
    ConfigError(std::string code, std::string key, const std::string& w)
        : Error(std::move(code), w), key_(std::move(key)) {}
    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

}  // namespace fslln
