#pragma once

// Shared error types and small numeric utilities used across the library.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

namespace qci {

// All library failures derive from Error so the CLI can map them to exit codes.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct EvaluationError : Error {
    using Error::Error;
};
struct PoleError : Error {
    using Error::Error;
};
struct BracketError : Error {
    using Error::Error;
};
struct NonReturnError : Error {
    using Error::Error;
};
struct SolveError : Error {
    using Error::Error;
};
struct PrincipalTypeError : Error {
    using Error::Error;
};
struct ResolutionError : Error {
    using Error::Error;
};
struct ParameterError : Error {
    using Error::Error;
};
struct DomainError : Error {
    using Error::Error;
};
struct SpecError : Error {
    using Error::Error;
};
struct SizeError : Error {
    using Error::Error;
};
struct NumericError : Error {
    using Error::Error;
};

constexpr double kPi = 3.14159265358979323846264338327950288;
constexpr double kTwoPi = 2.0 * kPi;

// Reduce an angle to [0, 2*pi).
inline double wrap_2pi(double a) {
    double r = std::fmod(a, kTwoPi);
    if (r < 0.0) r += kTwoPi;
    return r;
}

// Reduce an angle to (-pi, pi].
inline double wrap_pi(double a) {
    double r = std::fmod(a, kTwoPi);
    if (r <= -kPi) r += kTwoPi;
    if (r > kPi) r -= kTwoPi;
    return r;
}

// Deterministic 64-bit generator (splitmix64). Used instead of <random>
// distributions so artifacts are byte-identical for a given seed.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1).
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // Uniform integer in [lo, hi] inclusive.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(next_u64() % static_cast<std::uint64_t>(hi - lo + 1));
    }

  private:
    std::uint64_t state_;
};

// Format a double with 17 significant digits (round-trip safe, locale free).
inline std::string fmt_g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v(static_cast<std::size_t>(n));
    if (n == 1) {
        v[0] = a;
        return v;
    }
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = a + (b - a) * i / (n - 1);
    return v;
}

inline std::vector<double> geomspace(double a, double b, int n) {
    std::vector<double> v(static_cast<std::size_t>(n));
    if (n == 1) {
        v[0] = a;
        return v;
    }
    const double la = std::log(a), lb = std::log(b);
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = std::exp(la + (lb - la) * i / (n - 1));
    return v;
}

// FNV-1a 64-bit hash, hex-encoded. Used for artifact manifests.
inline std::string fnv1a64_hex(const std::string& data) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[19];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace qci
