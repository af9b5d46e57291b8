#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

namespace diffcert::num {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// log(e^a + e^b), stable for operands spanning thousands of orders of magnitude.
inline double logaddexp(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    const double hi = (a > b) ? a : b;
    const double lo = (a > b) ? b : a;
    return hi + std::log1p(std::exp(lo - hi));
}

double logsumexp(std::span<const double> v);

/// log of the integral over [0, h] of exp(phi0 + s*(phi1-phi0)/h) ds.
/// Exact for integrands that are log-linear on the interval.
double log_interval_expint(double phi0, double phi1, double h);

/// Integral over [a, b] of the quadratic through (t0,f0), (t1,f1), (t2,f2).
double quad3_integral(double t0, double t1, double t2,
                      double f0, double f1, double f2,
                      double a, double b);

/// Cumulative integral of tabulated f over a strictly increasing grid.
/// out[0] = 0 and out[k] - out[k-1] integrates the local quadratic fit
/// (three-point rule), falling back to the trapezoid when only two nodes
/// exist. Second-order accurate at every node.
std::vector<double> cumulative_quadratic(std::span<const double> t, std::span<const double> f);

/// Integral over [a, b] of the cubic through four support nodes.
double quad4_integral(std::span<const double> t4, std::span<const double> f4,
                      double a, double b);

/// Cumulative integral using per-interval cubic fits (four-point rule);
/// fourth-order accurate at every node. Falls back to lower-order rules on
/// short grids.
std::vector<double> cumulative_cubic(std::span<const double> t, std::span<const double> f);

/// Plain cumulative trapezoid, used as an independent cross-check.
std::vector<double> cumulative_trapezoid(std::span<const double> t, std::span<const double> f);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual_rms = 0.0;
    std::size_t n = 0;
};

/// Ordinary least squares of y against x.
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

/// Cubic Hermite interpolant on a strictly increasing grid with caller-supplied
/// node slopes. Slopes can optionally be limited (Fritsch-Carlson) so the
/// interpolant preserves monotonicity of the data.
class CubicHermite {
public:
    CubicHermite() = default;
    CubicHermite(std::vector<double> t, std::vector<double> y, std::vector<double> slope,
                 bool monotone_limit);

    double value(double t) const;
    double derivative(double t) const;
    bool empty() const { return t_.empty(); }
    double front() const { return t_.front(); }
    double back() const { return t_.back(); }

private:
    std::size_t interval(double t) const;
    std::vector<double> t_, y_, m_;
};

/// Piecewise-linear interpolation on a strictly increasing grid.
double lerp_table(std::span<const double> t, std::span<const double> y, double x);

/// Coefficients (a3, a4, a5) of q(r) = q0 + a3 r^3 + a4 r^4 + a5 r^5 matching
/// value v1, first derivative d1 and second derivative d2 at r1 > 0.
/// q has zero first and second derivative at r = 0 by construction.
struct QuinticBlend {
    double q0 = 1.0, a3 = 0.0, a4 = 0.0, a5 = 0.0;

    static QuinticBlend solve(double q0, double r1, double v1, double d1, double d2);
    double value(double r) const { return q0 + ((a5 * r + a4) * r + a3) * r * r * r; }
    double d1(double r) const { return ((5.0 * a5 * r + 4.0 * a4) * r + 3.0 * a3) * r * r; }
    double d2(double r) const { return ((20.0 * a5 * r + 12.0 * a4) * r + 6.0 * a3) * r; }
};

/// Standard normal CDF.
inline double phi_cdf(double z) { return 0.5 * std::erfc(-z * 0.70710678118654752440); }

/// FNV-1a 64-bit hash, used for file and profile checksums.
std::uint64_t fnv1a64(std::string_view bytes);

/// Locale-independent float formatting with 17 significant digits.
std::string format_g17(double v);

} // namespace diffcert::num
