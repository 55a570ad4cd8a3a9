#pragma once

// Gaussian random field synthesis on node-centred regular grids: a dense
// Cholesky sampler (exact, small grids) and a circulant-embedding sampler
// (FFT based, large grids).

#include <fftw3.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "fslln/covariance_models.hpp"
#include "fslln/errors.hpp"
#include "fslln/random.hpp"

namespace fslln {

/// Nodes at i*h for i in [-N, N] along each of d axes, row-major with the
/// last axis fastest.
struct Grid {
    int d = 2;
    double h = 0.5;
    int N = 16;

    void validate() const {
        if (d != 1 && d != 2) throw DomainError("grid dimension must be 1 or 2");
        if (!(h > 0.0) || !std::isfinite(h)) throw DomainError("grid step must be > 0");
        if (N < 0) throw DomainError("grid half extent must be >= 0");
    }
    std::size_t per_axis() const { return static_cast<std::size_t>(2 * N + 1); }
    std::size_t total() const { return d == 1 ? per_axis() : per_axis() * per_axis(); }
    double extent() const { return N * h; }
    double coord(int i) const { return i * h; }

    /// Signed axis indices of flat node p.
    std::array<int, 2> indices(std::size_t p) const {
        if (d == 1) return {static_cast<int>(p) - N, 0};
        const auto m = per_axis();
        return {static_cast<int>(p / m) - N, static_cast<int>(p % m) - N};
    }
    std::array<double, 2> point(std::size_t p) const {
        const auto ij = indices(p);
        return {coord(ij[0]), coord(ij[1])};
    }
    std::size_t flat(int i, int j = 0) const {
        if (d == 1) return static_cast<std::size_t>(i + N);
        return static_cast<std::size_t>(i + N) * per_axis() + static_cast<std::size_t>(j + N);
    }
    bool operator==(const Grid&) const = default;
};

enum class GeneratorTag { Cholesky, Circulant };

inline std::string to_string(GeneratorTag t) { return t == GeneratorTag::Cholesky ? "cholesky" : "circulant"; }

struct FieldRealization {
    Grid grid;
    std::vector<double> values;
    std::uint64_t seed = 0;
    GeneratorTag generator = GeneratorTag::Circulant;
    bool transformed = false;
};

// ---------------------------------------------------------------------------
// Cholesky
// ---------------------------------------------------------------------------

inline constexpr std::size_t kCholeskyMaxNodes = 10000;

/// Factors the grid covariance once; each sample is L * N(0, I).
class CholeskySampler {
public:
    CholeskySampler(const CovarianceModel& model, const Grid& grid) : grid_(grid) {
        validate(model);
        grid.validate();
        n_ = grid.total();
        if (n_ > kCholeskyMaxNodes)
            throw SizeError("Cholesky sampler supports at most 10000 nodes, grid has " + std::to_string(n_));
        std::vector<double> cov(n_ * n_);
        for (std::size_t p = 0; p < n_; ++p) {
            const auto xp = grid.point(p);
            for (std::size_t q = 0; q <= p; ++q) {
                const auto xq = grid.point(q);
                const double r = std::hypot(xp[0] - xq[0], xp[1] - xq[1]);
                cov[p * n_ + q] = eval_cov(model, r);
            }
        }
        // Escalating diagonal jitter for numerically semidefinite matrices.
        for (double jitter : {0.0, 1e-12, 1e-10, 1e-8}) {
            if (factor(cov, jitter)) return;
        }
        throw ModelError("covariance matrix is not positive semidefinite within jitter tolerance 1e-8");
    }

    FieldRealization sample(std::uint64_t seed) const {
        GaussianStream rng(seed);
        std::vector<double> w(n_);
        for (auto& v : w) v = rng.normal();
        FieldRealization out{grid_, std::vector<double>(n_, 0.0), seed, GeneratorTag::Cholesky, false};
        for (std::size_t p = 0; p < n_; ++p) {
            const double* row = &lower_[p * n_];
            double acc = 0.0;
            for (std::size_t q = 0; q <= p; ++q) acc += row[q] * w[q];
            out.values[p] = acc;
        }
        return out;
    }

    const Grid& grid() const { return grid_; }

private:
    bool factor(const std::vector<double>& cov, double jitter) {
        lower_.assign(n_ * n_, 0.0);
        for (std::size_t j = 0; j < n_; ++j) {
            double diag = cov[j * n_ + j] + jitter;
            for (std::size_t k = 0; k < j; ++k) diag -= lower_[j * n_ + k] * lower_[j * n_ + k];
            if (!(diag > 0.0)) return false;
            const double ljj = std::sqrt(diag);
            lower_[j * n_ + j] = ljj;
            for (std::size_t i = j + 1; i < n_; ++i) {
                double v = cov[i * n_ + j];
                const double* li = &lower_[i * n_];
                const double* lj = &lower_[j * n_];
                for (std::size_t k = 0; k < j; ++k) v -= li[k] * lj[k];
                lower_[i * n_ + j] = v / ljj;
            }
        }
        return true;
    }

    Grid grid_;
    std::size_t n_ = 0;
    std::vector<double> lower_;
};

inline FieldRealization generate_cholesky(const CovarianceModel& model, const Grid& grid, std::uint64_t seed) {
    return CholeskySampler(model, grid).sample(seed);
}

// ---------------------------------------------------------------------------
// FFT plumbing (FFTW, complex in-place, forward)
// ---------------------------------------------------------------------------

namespace detail {

inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwFree {
    void operator()(fftw_complex* p) const noexcept { fftw_free(p); }
};
using FftwBuffer = std::unique_ptr<fftw_complex[], FftwFree>;

inline FftwBuffer fftw_buffer(std::size_t n) {
    auto* p = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
    if (p == nullptr) throw SizeError("FFT buffer allocation failed");
    return FftwBuffer(p);
}

/// Forward complex DFT of fixed shape. Planned once with FFTW_ESTIMATE so
/// the plan (and therefore the output bits) is the same on every run;
/// `execute` is safe to call concurrently on distinct buffers.
class FftPlan {
public:
    FftPlan(int d, int size) : d_(d), size_(size) {
        auto scratch = fftw_buffer(elements());
        std::lock_guard lock(fftw_planner_mutex());
        plan_ = d == 1 ? fftw_plan_dft_1d(size, scratch.get(), scratch.get(), FFTW_FORWARD, FFTW_ESTIMATE)
                       : fftw_plan_dft_2d(size, size, scratch.get(), scratch.get(), FFTW_FORWARD, FFTW_ESTIMATE);
        if (plan_ == nullptr) throw SizeError("FFTW planning failed");
    }
    FftPlan(const FftPlan&) = delete;
    FftPlan& operator=(const FftPlan&) = delete;
    ~FftPlan() {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(plan_);
    }

    std::size_t elements() const {
        return d_ == 1 ? static_cast<std::size_t>(size_) : static_cast<std::size_t>(size_) * size_;
    }
    void execute(fftw_complex* data) const { fftw_execute_dft(plan_, data, data); }

private:
    int d_;
    int size_;
    fftw_plan plan_ = nullptr;
};

/// Smallest odd n >= target whose prime factors are all in {3, 5, 7}.
/// Odd periods have no Nyquist lag, which keeps the embedding spectrum
/// closer to non-negative.
inline int next_fft_size(int target) {
    for (int n = std::max(target, 1) | 1;; n += 2) {
        int m = n;
        for (int f : {2, 3, 5, 7})
            while (m % f == 0) m /= f;
        if (m == 1) return n;
    }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Circulant embedding
// ---------------------------------------------------------------------------

enum class EmbeddingMode { Strict, Clip };

struct EmbeddingPolicy {
    EmbeddingMode mode = EmbeddingMode::Clip;
    double clip_report_threshold = 1e-3;
    /// Largest lattice tried, as a multiple of 4N.
    double max_padding_factor = 8.0;

    bool operator==(const EmbeddingPolicy&) const = default;

    void validate() const {
        if (!(clip_report_threshold >= 0.0 && clip_report_threshold < 1.0))
            throw DomainError("clip threshold must lie in [0, 1)");
        if (!(max_padding_factor >= 1.0)) throw DomainError("max padding factor must be >= 1");
    }
};

struct EmbeddingAttempt {
    int size = 0;
    double negative_mass = 0.0;  ///< sum |lambda-| / sum |lambda|
};

struct EmbeddingReport {
    std::vector<EmbeddingAttempt> attempts;
    int size = 0;
    double clipped_mass = 0.0;
};

/// Samples Z on the grid by embedding its covariance in a periodic lattice
/// of odd side P > 4N and colouring complex white noise with the square
/// root of the lattice spectrum.
class CirculantSampler {
public:
    CirculantSampler(const CovarianceModel& model, const Grid& grid, const EmbeddingPolicy& policy = {})
        : grid_(grid) {
        validate(model);
        grid.validate();
        policy.validate();
        const int minimal = std::max(2 * 2 * grid.N, 1);
        const int cap = static_cast<int>(std::ceil(minimal * policy.max_padding_factor));
        int size = detail::next_fft_size(minimal);
        std::vector<double> spectrum;
        for (;;) {
            spectrum = lattice_spectrum(model, size);
            const double mass = negative_mass(spectrum);
            report_.attempts.push_back({size, mass});
            const bool admissible = policy.mode == EmbeddingMode::Strict ? mass == 0.0
                                                                         : mass <= policy.clip_report_threshold;
            if (admissible) break;
            const int next = detail::next_fft_size(static_cast<int>(std::ceil(size * 1.25)));
            if (next > cap) {
                if (policy.mode == EmbeddingMode::Strict)
                    throw EmbeddingError("circulant embedding has negative eigenvalues at the padding cap", mass);
                throw AccuracyError("clipped negative eigenvalue mass exceeds threshold at the padding cap", mass);
            }
            size = next;
        }
        size_ = size;
        report_.size = size;
        report_.clipped_mass = report_.attempts.back().negative_mass;
        const double scale = 1.0 / static_cast<double>(spectrum.size());
        amplitude_.resize(spectrum.size());
        for (std::size_t i = 0; i < spectrum.size(); ++i) amplitude_[i] = std::sqrt(std::max(spectrum[i], 0.0) * scale);
        plan_ = std::make_unique<detail::FftPlan>(grid.d, size);
    }

    FieldRealization sample(std::uint64_t seed) const {
        GaussianStream rng(seed);
        const std::size_t n = amplitude_.size();
        auto buf = detail::fftw_buffer(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double re = rng.normal();
            const double im = rng.normal();
            buf[i][0] = amplitude_[i] * re;
            buf[i][1] = amplitude_[i] * im;
        }
        plan_->execute(buf.get());
        FieldRealization out{grid_, std::vector<double>(grid_.total()), seed, GeneratorTag::Circulant, false};
        const std::size_t m = grid_.per_axis();
        if (grid_.d == 1) {
            for (std::size_t i = 0; i < m; ++i) out.values[i] = buf[i][0];
        } else {
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < m; ++j) out.values[i * m + j] = buf[i * size_ + j][0];
        }
        return out;
    }

    const EmbeddingReport& report() const { return report_; }
    const Grid& grid() const { return grid_; }

private:
    std::vector<double> lattice_spectrum(const CovarianceModel& model, int size) const {
        const auto lag = [&](int i) { return grid_.h * std::min(i, size - i); };
        detail::FftPlan plan(grid_.d, size);
        auto buf = detail::fftw_buffer(plan.elements());
        if (grid_.d == 1) {
            for (int i = 0; i < size; ++i) {
                buf[i][0] = eval_cov(model, lag(i));
                buf[i][1] = 0.0;
            }
        } else {
            for (int i = 0; i < size; ++i)
                for (int j = 0; j < size; ++j) {
                    auto& c = buf[static_cast<std::size_t>(i) * size + j];
                    c[0] = eval_cov(model, std::hypot(lag(i), lag(j)));
                    c[1] = 0.0;
                }
        }
        plan.execute(buf.get());
        std::vector<double> spectrum(plan.elements());
        for (std::size_t i = 0; i < spectrum.size(); ++i) spectrum[i] = buf[i][0];
        return spectrum;
    }

    static double negative_mass(const std::vector<double>& spectrum) {
        double neg = 0.0;
        double all = 0.0;
        for (double v : spectrum) {
            all += std::fabs(v);
            if (v < 0.0) neg -= v;
        }
        return all > 0.0 ? neg / all : 0.0;
    }

    Grid grid_;
    int size_ = 0;
    std::vector<double> amplitude_;
    std::unique_ptr<detail::FftPlan> plan_;
    EmbeddingReport report_;
};

inline FieldRealization generate_circulant(const CovarianceModel& model, const Grid& grid, std::uint64_t seed,
                                           const EmbeddingPolicy& policy = {}) {
    return CirculantSampler(model, grid, policy).sample(seed);
}

// ---------------------------------------------------------------------------
// Empirical covariance audit
// ---------------------------------------------------------------------------

struct LagEstimate {
    std::array<int, 2> lag{};  ///< in grid steps
    double distance = 0.0;
    double estimate = 0.0;      ///< mean over replicates of the spatial average of Z(x)Z(x+lag)
    double standard_error = 0.0;
    double model_value = 0.0;
};

struct CovarianceAudit {
    std::vector<LagEstimate> lags;
    double max_model_deviation = 0.0;
    /// Largest |estimate(l) - estimate(rot90 l)| over the provided lags, and its
    /// combined standard error.
    double isotropy_defect = 0.0;
    double isotropy_se = 0.0;
    /// Largest left-half vs right-half difference of the lag estimates.
    double homogeneity_defect = 0.0;
    double homogeneity_se = 0.0;
};

namespace detail {

// Mean over replicates of the average of Z(x) Z(x + lag) across nodes x
// with first-axis index in [i_lo, i_hi] (both x and x + lag on the grid).
// Returns mean and standard error across replicates.
inline std::pair<double, double> lag_moment(std::span<const FieldRealization> fields, std::array<int, 2> lag,
                                            int i_lo, int i_hi) {
    const Grid& g = fields.front().grid;
    const int N = g.N;
    const int jl = g.d == 1 ? 0 : lag[1];
    std::vector<double> per_rep;
    per_rep.reserve(fields.size());
    for (const auto& f : fields) {
        double acc = 0.0;
        std::size_t count = 0;
        for (int i = std::max(i_lo, -N - std::min(lag[0], 0)); i <= std::min(i_hi, N - std::max(lag[0], 0)); ++i) {
            if (g.d == 1) {
                acc += f.values[g.flat(i)] * f.values[g.flat(i + lag[0])];
                ++count;
                continue;
            }
            for (int j = -N - std::min(jl, 0); j <= N - std::max(jl, 0); ++j) {
                acc += f.values[g.flat(i, j)] * f.values[g.flat(i + lag[0], j + jl)];
                ++count;
            }
        }
        if (count == 0) throw InputError("lag does not fit on the grid");
        per_rep.push_back(acc / static_cast<double>(count));
    }
    double mean = 0.0;
    for (double v : per_rep) mean += v;
    mean /= static_cast<double>(per_rep.size());
    double ss = 0.0;
    for (double v : per_rep) ss += (v - mean) * (v - mean);
    const double var = ss / static_cast<double>(per_rep.size() - 1);
    return {mean, std::sqrt(var / static_cast<double>(per_rep.size()))};
}

}  // namespace detail

/// Compares replicate-averaged lag covariances with the model and measures
/// isotropy and homogeneity defects. Lags are integer grid offsets.
inline CovarianceAudit empirical_cov_audit(std::span<const FieldRealization> fields,
                                           std::span<const std::array<int, 2>> lags, const CovarianceModel& model) {
    if (fields.size() < 2) throw InputError("covariance audit needs at least two realizations");
    const Grid& g = fields.front().grid;
    for (const auto& f : fields)
        if (!(f.grid == g) || f.values.size() != g.total()) throw InputError("realizations are on mismatched grids");
    CovarianceAudit audit;
    for (const auto& lag : lags) {
        LagEstimate e;
        e.lag = lag;
        e.distance = g.h * std::hypot(lag[0], g.d == 1 ? 0 : lag[1]);
        std::tie(e.estimate, e.standard_error) = detail::lag_moment(fields, lag, -g.N, g.N);
        e.model_value = eval_cov(model, e.distance);
        audit.max_model_deviation = std::max(audit.max_model_deviation, std::fabs(e.estimate - e.model_value));
        if (g.d == 2 && (lag[0] != 0 || lag[1] != 0)) {
            const std::array<int, 2> rot{-lag[1], lag[0]};
            const auto [est, se] = detail::lag_moment(fields, rot, -g.N, g.N);
            const double defect = std::fabs(est - e.estimate);
            if (defect >= audit.isotropy_defect) {
                audit.isotropy_defect = defect;
                audit.isotropy_se = std::hypot(se, e.standard_error);
            }
        }
        const auto [left, left_se] = detail::lag_moment(fields, lag, -g.N, -1);
        const auto [right, right_se] = detail::lag_moment(fields, lag, 1, g.N);
        const double defect = std::fabs(left - right);
        if (defect >= audit.homogeneity_defect) {
            audit.homogeneity_defect = defect;
            audit.homogeneity_se = std::hypot(left_se, right_se);
        }
        audit.lags.push_back(e);
    }
    return audit;
}

// ---------------------------------------------------------------------------
// Export
// ---------------------------------------------------------------------------

inline constexpr char kFieldMagic[8] = {'F', 'S', 'L', 'L', 'N', 'F', 'L', 'D'};

namespace detail {
template <typename T>
void put_le(std::ostream& os, T value) {
    static_assert(sizeof(T) == 8);
    std::uint64_t bits;
    std::memcpy(&bits, &value, 8);
    for (int i = 0; i < 8; ++i) os.put(static_cast<char>((bits >> (8 * i)) & 0xFF));
}
template <typename T>
T get_le(std::istream& is) {
    static_assert(sizeof(T) == 8);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) {
        const int c = is.get();
        if (c == EOF) throw InputError("truncated field file");
        bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
    }
    T value;
    std::memcpy(&value, &bits, 8);
    return value;
}
}  // namespace detail

/// Flat binary layout, all little-endian: 8-byte magic "FSLLNFLD", int64 d,
/// int64 N, float64 h, uint64 seed, then (2N+1)^d float64 values row-major.
inline void write_field_binary(std::ostream& os, const FieldRealization& f) {
    os.write(kFieldMagic, 8);
    detail::put_le<std::int64_t>(os, f.grid.d);
    detail::put_le<std::int64_t>(os, f.grid.N);
    detail::put_le<double>(os, f.grid.h);
    detail::put_le<std::uint64_t>(os, f.seed);
    for (double v : f.values) detail::put_le<double>(os, v);
}

inline FieldRealization read_field_binary(std::istream& is) {
    char magic[8];
    if (!is.read(magic, 8) || std::memcmp(magic, kFieldMagic, 8) != 0) throw InputError("not a field file");
    FieldRealization f;
    f.grid.d = static_cast<int>(detail::get_le<std::int64_t>(is));
    f.grid.N = static_cast<int>(detail::get_le<std::int64_t>(is));
    f.grid.h = detail::get_le<double>(is);
    f.seed = detail::get_le<std::uint64_t>(is);
    f.grid.validate();
    f.values.resize(f.grid.total());
    for (auto& v : f.values) v = detail::get_le<double>(is);
    return f;
}

/// CSV with columns x[,y],value.
inline void write_field_csv(std::ostream& os, const FieldRealization& f) {
    os << (f.grid.d == 1 ? "x,value\n" : "x,y,value\n");
    char buf[96];
    for (std::size_t p = 0; p < f.values.size(); ++p) {
        const auto x = f.grid.point(p);
        if (f.grid.d == 1)
            std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", x[0], f.values[p]);
        else
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", x[0], x[1], f.values[p]);
        os << buf;
    }
}

}  // namespace fslln
