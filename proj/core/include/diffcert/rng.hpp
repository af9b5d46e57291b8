#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

// Counter-based random streams. Every draw is a pure function of
// (seed, stream id, draw index), so ensembles are reproducible regardless of
// chunking or worker count, and any draw can be replayed in isolation.

namespace diffcert::rng {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

/// SplitMix64 output function (Stafford mix13 finalizer).
inline std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
}

/// Uniform double in the open interval (0,1), 53 usable bits.
inline double u01(std::uint64_t bits) {
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

/// Inverse standard normal CDF, Wichura's algorithm AS 241 (PPND16).
/// Accurate to full double precision for p in (0,1).
inline double normal_icdf(double p) {
    const double q = p - 0.5;
    if (std::fabs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        const double num =
            (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                  6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
                1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
              1.3314166789178437745e+2) * r + 3.3871328727963666080e+0);
        const double den =
            (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                  3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
                5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
              4.2313330701600911252e+1) * r + 1.0);
        return q * num / den;
    }
    double r = (q < 0.0) ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double z;
    if (r <= 5.0) {
        r -= 1.6;
        const double num =
            (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                  2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r +
                3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
              4.63033784615654529590e+0) * r + 1.42343711074968357734e+0);
        const double den =
            (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                  1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
              2.05319162663775882187e+0) * r + 1.0);
        z = num / den;
    } else {
        r -= 5.0;
        const double num =
            (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                  1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
              5.46378491116411436990e+0) * r + 6.65790464350110377720e+0);
        const double den =
            (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                  1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
              5.99832206555887937690e-1) * r + 1.0);
        z = num / den;
    }
    return (q < 0.0) ? -z : z;
}

/// A keyed counter stream: u64_at(i) is the i-th raw draw.
struct Stream {
    std::uint64_t key = 0;

    static Stream derive(std::uint64_t seed, std::uint64_t id) {
        return Stream{mix64(mix64(seed + kGolden * (id + 1)) ^ 0xD6E8FEB86659FD93ull)};
    }
    /// Child stream, e.g. one per path or per sample.
    Stream child(std::uint64_t id) const { return derive(key, id); }

    std::uint64_t u64_at(std::uint64_t index) const { return mix64(key + kGolden * index); }
    double u01_at(std::uint64_t index) const { return u01(u64_at(index)); }
    double normal_at(std::uint64_t index) const { return normal_icdf(u01_at(index)); }
    double exp_at(std::uint64_t index) const { return -std::log(u01_at(index)); }
};

/// Poisson draw by Knuth's product method; consumes sub-draws
/// index, index+1, ... of the given stream. Intended for small means.
inline std::uint64_t poisson_at(const Stream& s, std::uint64_t index, double mean,
                                std::uint64_t* consumed = nullptr) {
    if (!(mean > 0.0)) {
        if (consumed) *consumed = 0;
        return 0;
    }
    const double limit = std::exp(-mean);
    std::uint64_t k = 0;
    double prod = 1.0;
    std::uint64_t used = 0;
    do {
        prod *= s.u01_at(index + used);
        ++used;
        ++k;
    } while (prod > limit);
    if (consumed) *consumed = used;
    return k - 1;
}

/// One-sided alpha-stable draw with Laplace transform exp(-lambda^alpha),
/// alpha in (0,1). Kanter's representation from a uniform angle and a unit
/// exponential.
inline double stable_positive(double alpha, double u_angle, double exp_w) {
    const double theta = 3.14159265358979323846 * u_angle;
    const double one_m = 1.0 - alpha;
    const double log_a = std::log(std::sin(one_m * theta)) +
                         (alpha / one_m) * std::log(std::sin(alpha * theta)) -
                         (1.0 / one_m) * std::log(std::sin(theta));
    return std::exp((one_m / alpha) * (log_a - std::log(exp_w)));
}

} // namespace diffcert::rng
