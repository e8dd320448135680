#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pmivec {

using WordId = std::uint32_t;
using CtxId = std::uint32_t;

constexpr double kNegInfinity = -std::numeric_limits<double>::infinity();

enum class ErrorKind {
    Usage,    // bad flags / bad config values
    Io,       // missing file, failed read/write
    Parse,    // malformed input (carries byte/line position in message)
    Domain,   // math precondition violated (zero marginal, zero variance, ...)
    Train,    // diverged or non-finite state during SGD
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

inline const char* error_category(ErrorKind k) {
    switch (k) {
        case ErrorKind::Usage: return "usage";
        case ErrorKind::Io: return "io";
        case ErrorKind::Parse: return "parse";
        case ErrorKind::Domain: return "domain";
        case ErrorKind::Train: return "train";
    }
    return "unknown";
}

// --- deterministic hashing / RNG -------------------------------------------
//
// All stochastic decisions are keyed on (seed, position) through splitmix64 so
// results are independent of sharding and identical across platforms.

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
    return splitmix64(a ^ (splitmix64(b) + 0x9e3779b97f4a7c15ULL));
}

// Named sub-streams of one user seed.
enum class SeedStream : std::uint64_t {
    Init = 1,
    CountingPass = 2,
    TrainingPass = 3,
    NegativeSampling = 4,
};

inline std::uint64_t derive_seed(std::uint64_t seed, SeedStream stream, std::uint64_t index = 0) {
    return mix64(mix64(seed, static_cast<std::uint64_t>(stream)), index);
}

// Uniform in [0,1), keyed by (seed, position).
inline double hash01(std::uint64_t seed, std::uint64_t position) {
    return static_cast<double>(mix64(seed, position) >> 11) * 0x1.0p-53;
}

// Small sequential PRNG (splitmix64 stream).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}
    std::uint64_t next_u64() { return splitmix64(state_++); }
    double next01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
    // Uniform integer in [0, n).
    std::uint64_t next_below(std::uint64_t n) {
        return static_cast<std::uint64_t>(next01() * static_cast<double>(n)) % n;
    }

private:
    std::uint64_t state_;
};

// --- dense row-major matrix --------------------------------------------------

struct Matrix {
    std::vector<double> data;
    std::size_t rows = 0;
    std::size_t cols = 0;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : data(r * c, 0.0), rows(r), cols(c) {}

    std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
    std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }
    double* row_ptr(std::size_t i) { return data.data() + i * cols; }
    const double* row_ptr(std::size_t i) const { return data.data() + i * cols; }
};

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

}  // namespace pmivec
