#pragma once

#include "fairtp/types.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>

namespace fairtp {

/// Logistic sigmoid, computed in the numerically stable branch form.
/// Output is strictly inside (0, 1) for every finite input.
inline Scalar logistic(Scalar x) {
    Scalar y;
    if (x >= 0) {
        y = 1.0 / (1.0 + std::exp(-x));
    } else {
        const Scalar e = std::exp(x);
        y = e / (1.0 + e);
    }
    // Keep saturated values off the exact 0/1 endpoints.
    const Scalar lo = std::numeric_limits<Scalar>::min();
    const Scalar hi = std::nextafter(Scalar(1), Scalar(0));
    return std::clamp(y, lo, hi);
}

/// Clamp a probability into [eps, 1 - eps] before it enters a log.
inline Scalar clip_probability(Scalar p, Scalar eps) {
    return std::clamp(p, eps, Scalar(1) - eps);
}

/// Max-stabilized softmax over a dense vector.
template <typename Derived>
Vector softmax(const Eigen::DenseBase<Derived>& logits) {
    if (logits.size() == 0) throw invalid_input("softmax: empty input");
    Vector v = logits.derived().template cast<Scalar>();
    const Scalar m = v.maxCoeff();
    Vector e = (v.array() - m).exp();
    return e / e.sum();
}

/// 53-bit uniform draw in [0, 1). Hand-rolled because the standard
/// distributions are implementation-defined; seeded results must not change
/// across standard libraries.
inline Scalar uniform01(std::mt19937_64& rng) {
    return static_cast<Scalar>(rng() >> 11) * 0x1.0p-53;
}

/// Unbiased uniform draw from [0, n), by rejection.
inline std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t n) {
    const std::uint64_t threshold = (-n) % n;  // 2^64 mod n
    std::uint64_t x;
    do {
        x = rng();
    } while (x < threshold);
    return x % n;
}

/// Standard normal draws via the Marsaglia polar method, again pinned to the
/// raw engine output.
class GaussianSource {
public:
    Scalar next(std::mt19937_64& rng) {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        Scalar u, v, s;
        do {
            u = 2.0 * uniform01(rng) - 1.0;
            v = 2.0 * uniform01(rng) - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const Scalar k = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * k;
        has_spare_ = true;
        return u * k;
    }

private:
    Scalar spare_ = 0.0;
    bool has_spare_ = false;
};

/// Shortest round-trip decimal form of a value, for CSV output.
inline std::string format_number(Scalar v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc()) throw invalid_input("format_number: cannot format value");
    return std::string(buf, ptr);
}

/// Kahan-compensated sum of an arbitrary accessor over [0, n).
template <typename Fetch>
Scalar compensated_sum(Eigen::Index n, Fetch&& fetch) {
    Scalar sum = 0.0, carry = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const Scalar y = fetch(i) - carry;
        const Scalar t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    return sum;
}

}  // namespace fairtp
