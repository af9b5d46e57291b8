#include "diffcert/numerics.hpp"

#include <algorithm>
#include <cassert>
#include <cstdio>
#include <string>

namespace diffcert::num {

double logsumexp(std::span<const double> v) {
    double hi = kNegInf;
    for (double x : v) hi = std::max(hi, x);
    if (hi == kNegInf) return kNegInf;
    double acc = 0.0;
    for (double x : v) acc += std::exp(x - hi);
    return hi + std::log(acc);
}

double log_interval_expint(double phi0, double phi1, double h) {
    if (h <= 0.0) return kNegInf;
    if (phi0 == kNegInf && phi1 == kNegInf) return kNegInf;
    const double d = phi1 - phi0;
    // integral = h * e^{phi0} * (e^d - 1)/d
    double logf;
    if (std::fabs(d) < 1e-8) {
        logf = std::log1p(0.5 * d + d * d / 6.0);
    } else if (d > 0.0) {
        // (e^d - 1)/d = e^d (1 - e^-d)/d
        logf = d + std::log(-std::expm1(-d)) - std::log(d);
    } else {
        logf = std::log(-std::expm1(d)) - std::log(-d);
    }
    return phi0 + std::log(h) + logf;
}

double quad3_integral(double t0, double t1, double t2,
                      double f0, double f1, double f2,
                      double a, double b) {
    // Work in coordinates local to the integration window; global coordinates
    // would difference nearly equal cubics and lose most of the mantissa.
    const double c = a;
    const double T0 = t0 - c, T1 = t1 - c, T2 = t2 - c, A = 0.0, B = b - c;
    const auto basis = [A, B](double u, double v) {
        const auto F = [u, v](double t) {
            return t * t * t / 3.0 - (u + v) * t * t / 2.0 + u * v * t;
        };
        return F(B) - F(A);
    };
    const double w0 = basis(T1, T2) / ((T0 - T1) * (T0 - T2));
    const double w1 = basis(T0, T2) / ((T1 - T0) * (T1 - T2));
    const double w2 = basis(T0, T1) / ((T2 - T0) * (T2 - T1));
    return w0 * f0 + w1 * f1 + w2 * f2;
}

std::vector<double> cumulative_quadratic(std::span<const double> t, std::span<const double> f) {
    const std::size_t n = t.size();
    assert(f.size() == n);
    std::vector<double> out(n, 0.0);
    if (n < 2) return out;
    if (n == 2) {
        out[1] = 0.5 * (f[0] + f[1]) * (t[1] - t[0]);
        return out;
    }
    // First interval fits the quadratic through nodes 0,1,2; interval k>=1
    // uses nodes k-1, k, k+1.
    out[1] = quad3_integral(t[0], t[1], t[2], f[0], f[1], f[2], t[0], t[1]);
    for (std::size_t k = 1; k + 1 < n; ++k) {
        out[k + 1] = out[k] + quad3_integral(t[k - 1], t[k], t[k + 1],
                                             f[k - 1], f[k], f[k + 1], t[k], t[k + 1]);
    }
    return out;
}

double quad4_integral(std::span<const double> t4, std::span<const double> f4,
                      double a, double b) {
    assert(t4.size() == 4 && f4.size() == 4);
    // Local coordinates, for the same cancellation reason as quad3_integral.
    const double c = a;
    const double B = b - c;
    double acc = 0.0;
    for (int j = 0; j < 4; ++j) {
        double u[3];
        int idx = 0;
        for (int m = 0; m < 4; ++m)
            if (m != j) u[idx++] = t4[m] - c;
        const double s1 = u[0] + u[1] + u[2];
        const double s2 = u[0] * u[1] + u[0] * u[2] + u[1] * u[2];
        const double s3 = u[0] * u[1] * u[2];
        const auto F = [&](double t) {
            return ((t / 4.0 - s1 / 3.0) * t + s2 / 2.0) * t * t - s3 * t;
        };
        const double tj = t4[j] - c;
        const double den = (tj - u[0]) * (tj - u[1]) * (tj - u[2]);
        acc += f4[j] * (F(B) - F(0.0)) / den;
    }
    return acc;
}

std::vector<double> cumulative_cubic(std::span<const double> t, std::span<const double> f) {
    const std::size_t n = t.size();
    assert(f.size() == n);
    if (n < 4) return cumulative_quadratic(t, f);
    std::vector<double> out(n, 0.0);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        std::size_t s = (k == 0) ? 0 : k - 1;
        if (s + 3 >= n) s = n - 4;
        const std::span<const double> t4 = t.subspan(s, 4);
        const std::span<const double> f4 = f.subspan(s, 4);
        out[k + 1] = out[k] + quad4_integral(t4, f4, t[k], t[k + 1]);
    }
    return out;
}

std::vector<double> cumulative_trapezoid(std::span<const double> t, std::span<const double> f) {
    const std::size_t n = t.size();
    assert(f.size() == n);
    std::vector<double> out(n, 0.0);
    for (std::size_t k = 1; k < n; ++k)
        out[k] = out[k - 1] + 0.5 * (f[k] + f[k - 1]) * (t[k] - t[k - 1]);
    return out;
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
    LinearFit fit;
    const std::size_t n = std::min(x.size(), y.size());
    fit.n = n;
    if (n < 2) return fit;
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < n; ++i) { sx += x[i]; sy += y[i]; }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) { fit.intercept = my; return fit; }
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - (fit.intercept + fit.slope * x[i]);
        ss += r * r;
    }
    fit.residual_rms = std::sqrt(ss / n);
    return fit;
}

CubicHermite::CubicHermite(std::vector<double> t, std::vector<double> y,
                           std::vector<double> slope, bool monotone_limit)
    : t_(std::move(t)), y_(std::move(y)), m_(std::move(slope)) {
    assert(t_.size() == y_.size() && y_.size() == m_.size());
    if (monotone_limit && t_.size() >= 2) {
        // Fritsch-Carlson: clip slopes so each interval stays monotone.
        const std::size_t n = t_.size();
        std::vector<double> delta(n - 1);
        for (std::size_t k = 0; k + 1 < n; ++k)
            delta[k] = (y_[k + 1] - y_[k]) / (t_[k + 1] - t_[k]);
        for (std::size_t k = 0; k < n; ++k) {
            const double dl = (k == 0) ? delta[0] : delta[k - 1];
            const double dr = (k + 1 == n) ? delta[n - 2] : delta[k];
            if (dl * dr <= 0.0 && k > 0 && k + 1 < n) {
                m_[k] = 0.0;
            } else {
                const double cap = 3.0 * std::min(std::fabs(dl), std::fabs(dr));
                m_[k] = std::clamp(m_[k], -cap, cap);
            }
        }
    }
}

std::size_t CubicHermite::interval(double t) const {
    const auto it = std::upper_bound(t_.begin(), t_.end(), t);
    std::size_t k = (it == t_.begin()) ? 0 : static_cast<std::size_t>(it - t_.begin()) - 1;
    if (k + 1 >= t_.size()) k = t_.size() - 2;
    return k;
}

double CubicHermite::value(double t) const {
    const std::size_t k = interval(t);
    const double h = t_[k + 1] - t_[k];
    const double s = (t - t_[k]) / h;
    const double s2 = s * s, s3 = s2 * s;
    const double h00 = 2 * s3 - 3 * s2 + 1;
    const double h10 = s3 - 2 * s2 + s;
    const double h01 = -2 * s3 + 3 * s2;
    const double h11 = s3 - s2;
    return h00 * y_[k] + h10 * h * m_[k] + h01 * y_[k + 1] + h11 * h * m_[k + 1];
}

double CubicHermite::derivative(double t) const {
    const std::size_t k = interval(t);
    const double h = t_[k + 1] - t_[k];
    const double s = (t - t_[k]) / h;
    const double d00 = (6 * s * s - 6 * s) / h;
    const double d10 = 3 * s * s - 4 * s + 1;
    const double d01 = (-6 * s * s + 6 * s) / h;
    const double d11 = 3 * s * s - 2 * s;
    return d00 * y_[k] + d10 * m_[k] + d01 * y_[k + 1] + d11 * m_[k + 1];
}

double lerp_table(std::span<const double> t, std::span<const double> y, double x) {
    assert(t.size() == y.size() && t.size() >= 2);
    const auto it = std::upper_bound(t.begin(), t.end(), x);
    std::size_t k = (it == t.begin()) ? 0 : static_cast<std::size_t>(it - t.begin()) - 1;
    if (k + 1 >= t.size()) k = t.size() - 2;
    const double w = (x - t[k]) / (t[k + 1] - t[k]);
    return y[k] + w * (y[k + 1] - y[k]);
}

QuinticBlend QuinticBlend::solve(double q0, double r1, double v1, double d1, double d2) {
    // 3x3 system for (a3, a4, a5) in powers of r1.
    const double r2 = r1 * r1, r3 = r2 * r1, r4 = r3 * r1, r5 = r4 * r1;
    const double b0 = v1 - q0, b1 = d1, b2 = d2;
    // rows: [r3 r4 r5; 3r2 4r3 5r4; 6r1 12r2 20r3]
    double m[3][4] = {
        {r3, r4, r5, b0},
        {3 * r2, 4 * r3, 5 * r4, b1},
        {6 * r1, 12 * r2, 20 * r3, b2},
    };
    for (int col = 0; col < 3; ++col) {
        int piv = col;
        for (int row = col + 1; row < 3; ++row)
            if (std::fabs(m[row][col]) > std::fabs(m[piv][col])) piv = row;
        std::swap(m[col], m[piv]);
        for (int row = 0; row < 3; ++row) {
            if (row == col) continue;
            const double f = m[row][col] / m[col][col];
            for (int c = col; c < 4; ++c) m[row][c] -= f * m[col][c];
        }
    }
    QuinticBlend q;
    q.q0 = q0;
    q.a3 = m[0][3] / m[0][0];
    q.a4 = m[1][3] / m[1][1];
    q.a5 = m[2][3] / m[2][2];
    return q;
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return h;
}

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace diffcert::num
