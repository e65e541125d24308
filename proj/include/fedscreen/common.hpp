#pragma once

// Shared plumbing: error taxonomy, deterministic seed derivation, a
// self-contained random engine with fixed sampling algorithms (so streams do
// not depend on the standard library's unspecified distribution internals),
// and exact decimal text encoding for doubles.

#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <charconv>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace fedscreen {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad arguments, invalid configuration, broken invariants.
class ValidationError : public Error {
public:
    using Error::Error;
};

// Malformed input text (CSV cells, config files).
class ParseError : public Error {
public:
    using Error::Error;
};

// A statistic whose defining denominator is empty (e.g. Mann-Whitney with an
// empty side). Distinct from ValidationError so callers can choose the
// "undefined entry" policy instead of aborting.
class UndefinedStatisticError : public Error {
public:
    using Error::Error;
};

// Wire-protocol errors, one type per failure class so tests and callers can
// distinguish them.
class WireError : public Error {
public:
    using Error::Error;
};
class WireVersionError : public WireError {
public:
    using WireError::WireError;
};
class WireShapeError : public WireError {
public:
    using WireError::WireError;
};
class WireFrameError : public WireError {
public:
    using WireError::WireError;
};

// ---------------------------------------------------------------------------
// Deterministic seed derivation
// ---------------------------------------------------------------------------

namespace detail {

// splitmix64 finalizer; stable across platforms.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// FNV-1a over bytes; used only to fold identifier strings into the seed.
inline std::uint64_t fnv1a(std::uint64_t h, std::string_view s) {
    constexpr std::uint64_t prime = 0x100000001b3ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= prime;
    }
    return h;
}

inline std::uint64_t fnv1a_u64(std::uint64_t h, std::uint64_t v) {
    constexpr std::uint64_t prime = 0x100000001b3ull;
    for (int i = 0; i < 8; ++i) {
        h ^= (v >> (8 * i)) & 0xffull;
        h *= prime;
    }
    return h;
}

} // namespace detail

// Collision-resistant derivation of an independent stream seed from
// (master seed, client id, purpose tag). Pure function; identical inputs give
// identical output on every platform. std::hash is deliberately avoided
// because its value is unspecified.
inline std::uint64_t seed_hierarchy(std::uint64_t master_seed,
                                    std::string_view client_id,
                                    std::string_view purpose_tag) {
    std::uint64_t h = 0xcbf29ce484222325ull; // FNV offset basis
    h = detail::fnv1a_u64(h, master_seed);
    h = detail::fnv1a(h, client_id);
    h = detail::fnv1a(h, std::string_view("\x1f", 1)); // field separator
    h = detail::fnv1a(h, purpose_tag);
    return detail::splitmix64(detail::splitmix64(h));
}

// ---------------------------------------------------------------------------
// Random engine with pinned sampling algorithms
// ---------------------------------------------------------------------------

// mt19937_64 output is bit-exact per the standard; every sampler below is
// implemented here so that results do not depend on the standard library's
// <random> distributions (whose algorithms are unspecified).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform on [0, 1) with 53 random bits.
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform01();
    }

    // Unbiased integer in [0, n) via rejection from the top of the range.
    std::uint64_t uniform_int(std::uint64_t n) {
        if (n == 0) throw ValidationError("uniform_int: n must be positive");
        const std::uint64_t threshold = (0 - n) % n; // 2^64 mod n
        for (;;) {
            const std::uint64_t x = engine_();
            if (x >= threshold) return x % n;
        }
    }

    // Marsaglia polar method; second deviate cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform01() - 1.0;
            v = 2.0 * uniform01() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        has_spare_ = true;
        return u * f;
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

    double exponential(double mean) {
        if (!(mean > 0.0)) throw ValidationError("exponential: mean must be positive");
        return -mean * std::log(1.0 - uniform01());
    }

    double lognormal_std() { return std::exp(normal()); }

    // Marsaglia-Tsang for alpha >= 1; boosted by U^(1/alpha) for alpha < 1.
    double gamma(double alpha) {
        if (!(alpha > 0.0)) throw ValidationError("gamma: alpha must be positive");
        if (alpha < 1.0) {
            const double u = uniform01();
            return gamma(alpha + 1.0) * std::pow(u, 1.0 / alpha);
        }
        const double d = alpha - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform01();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    double chi_squared(double df) { return 2.0 * gamma(0.5 * df); }

    double student_t(double df) {
        return normal() / std::sqrt(chi_squared(df) / df);
    }

    std::vector<double> dirichlet(double concentration, std::size_t k) {
        std::vector<double> out(k);
        double total = 0.0;
        for (auto& v : out) {
            v = gamma(concentration);
            total += v;
        }
        if (total <= 0.0) { // all draws underflowed; fall back to uniform
            for (auto& v : out) v = 1.0 / static_cast<double>(k);
            return out;
        }
        for (auto& v : out) v /= total;
        return out;
    }

    // Inverse-CDF draw from a probability vector; the final index absorbs any
    // rounding slack so the draw always lands in range.
    std::size_t categorical(const std::vector<double>& probs) {
        if (probs.empty()) throw ValidationError("categorical: empty probability vector");
        const double u = uniform01();
        double cum = 0.0;
        for (std::size_t r = 0; r + 1 < probs.size(); ++r) {
            cum += probs[r];
            if (u < cum) return r;
        }
        return probs.size() - 1;
    }

    // Fisher-Yates.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(uniform_int(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// ---------------------------------------------------------------------------
// Exact decimal text for doubles
// ---------------------------------------------------------------------------

// 17 significant digits round-trip any binary64 value exactly.
inline std::string format_double17(double v) {
    std::array<char, 48> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v,
                                   std::chars_format::general, 17);
    if (res.ec != std::errc()) throw Error("format_double17: to_chars failed");
    return std::string(buf.data(), res.ptr);
}

inline double parse_double(std::string_view text) {
    double v = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last)
        throw ParseError("parse_double: invalid numeric text '" + std::string(text) + "'");
    return v;
}

// ---------------------------------------------------------------------------
// Small numeric helpers
// ---------------------------------------------------------------------------

// Falling factorial n(n-1)...(n-k+1) as int64; by convention fall(n, 0) = 1
// and fall(n, k) = 0 when n < k. Callers keep k small (<= 4) so the design
// envelope n <= 1e4 stays within int64.
inline std::int64_t falling_factorial(std::int64_t n, int k) {
    if (k < 0) throw ValidationError("falling_factorial: negative order");
    std::int64_t out = 1;
    for (int i = 0; i < k; ++i) {
        if (n - i <= 0) return 0;
        out *= (n - i);
    }
    return out;
}

inline std::int64_t binomial_coefficient(int n, int k) {
    if (k < 0 || k > n) return 0;
    std::int64_t out = 1;
    for (int i = 1; i <= k; ++i) out = out * (n - k + i) / i;
    return out;
}

} // namespace fedscreen
