#pragma once

// Independent oracles used by tests only. Everything here is computed from
// closed forms or textbook algorithms, never through the library's own
// quadrature/profile path.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

namespace oracles {

/// Regularized upper incomplete gamma Q(a, x) = Gamma(a,x)/Gamma(a) for a > 0,
/// x >= 0; series for x < a+1, Lentz continued fraction otherwise.
inline double gamma_q(double a, double x) {
    if (!(a > 0.0) || x < 0.0) throw std::invalid_argument("gamma_q domain");
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) {
        // P(a,x) by series, Q = 1 - P
        double ap = a, sum = 1.0 / a, del = sum;
        for (int i = 0; i < 500; ++i) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::fabs(del) < std::fabs(sum) * 1e-16) break;
        }
        const double p = sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
        return 1.0 - p;
    }
    // Lentz for the continued fraction of Q
    const double tiny = 1e-300;
    double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-16) break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

/// Upper incomplete gamma Gamma(a, x).
inline double gamma_upper(double a, double x) { return gamma_q(a, x) * std::tgamma(a); }

/// log Gamma(a, x), usable far past the underflow point of Gamma(a, x).
inline double log_gamma_upper(double a, double x) {
    if (x < 600.0) {
        const double g = gamma_upper(a, x);
        if (g > 0.0) return std::log(g);
    }
    // asymptotic series Gamma(a,x) ~ x^{a-1} e^{-x} (1 + (a-1)/x + ...)
    return -x + (a - 1.0) * std::log(x) +
           std::log1p((a - 1.0) / x * (1.0 + (a - 2.0) / x));
}

// ---- polynomial-drift family (sigma = I, b = -K x |x|^{kappa-1}, d = 1) ----

/// I(r) = (2K/(kappa+1)) (r0^{kappa+1} - r^{kappa+1})
inline double poly_I(double K, double kappa, double r0, double r) {
    return 2.0 * K / (kappa + 1.0) * (std::pow(r0, kappa + 1.0) - std::pow(r, kappa + 1.0));
}

/// J(u) = int_u^inf e^{I(v)} dv via the incomplete-gamma identity:
/// int_u^inf e^{-c v^m} dv = c^{-1/m} / m * Gamma(1/m, c u^m), c = 2K/(kappa+1),
/// m = kappa+1, times the e^{I(r0)-normalization} constant e^{c r0^m}.
inline double poly_inner_J(double K, double kappa, double r0, double u) {
    const double mexp = kappa + 1.0;
    const double c = 2.0 * K / mexp;
    const double base = std::pow(c, -1.0 / mexp) / mexp * gamma_upper(1.0 / mexp, c * std::pow(u, mexp));
    return std::exp(c * std::pow(r0, mexp)) * base;
}

// ---- tempered Langevin family (d = 1, c scale, alpha, beta) ----

/// gamma(r) = c^{-2 beta} r^{2 beta / alpha}
inline double langevin_gamma(double c, double alpha, double beta, double r) {
    return std::pow(c, -2.0 * beta) * std::pow(r, 2.0 * beta / alpha);
}

/// I(r) = ((1-2 beta)/alpha) (ln r0 - ln r)
inline double langevin_I(double alpha, double beta, double r0, double r) {
    return (1.0 - 2.0 * beta) / alpha * (std::log(r0) - std::log(r));
}

/// J(u) = scale * u^{1-1/alpha} * alpha/(1-alpha),
/// scale = c^{2 beta} r0^{(1-2 beta)/alpha}
inline double langevin_inner_J(double c, double alpha, double beta, double r0, double u) {
    const double scale = std::pow(c, 2.0 * beta) * std::pow(r0, (1.0 - 2.0 * beta) / alpha);
    return scale * std::pow(u, 1.0 - 1.0 / alpha) * alpha / (1.0 - alpha);
}

/// Lambda = (alpha c^{2 beta} / (1-alpha)) * r0^{2 - 2 beta/alpha} / (2 beta/alpha - 2),
/// finite iff alpha < beta.
inline double langevin_lambda(double c, double alpha, double beta, double r0) {
    const double p = 2.0 * beta / alpha - 2.0;
    return alpha * std::pow(c, 2.0 * beta) / (1.0 - alpha) * std::pow(r0, -p) / p;
}

// ---- brute-force nested quadrature of Lambda from closed-form I and gamma ----

/// Double Riemann sum on uniform-in-log nodes (midpoint rule), all in the log
/// domain. I_cf and gamma_cf are the closed forms of the model family.
inline double lambda_brute(const std::function<double(double)>& I_cf,
                           const std::function<double(double)>& gamma_cf, double r0,
                           double Rmax, int n_outer, int n_inner) {
    const double t0 = std::log(r0), t1 = std::log(Rmax);
    const double hi = (t1 - t0) / n_inner;
    // suffix log-sums of the inner integrand e^{I(v)}/gamma(v) * v * h
    std::vector<double> suffix(static_cast<std::size_t>(n_inner) + 1,
                               -std::numeric_limits<double>::infinity());
    const auto lse = [](double a, double b) {
        if (a == -std::numeric_limits<double>::infinity()) return b;
        if (b == -std::numeric_limits<double>::infinity()) return a;
        const double m = std::max(a, b);
        return m + std::log(std::exp(a - m) + std::exp(b - m));
    };
    for (int j = n_inner - 1; j >= 0; --j) {
        const double t = t0 + (j + 0.5) * hi;
        const double v = std::exp(t);
        const double term = I_cf(v) - std::log(gamma_cf(v)) + t + std::log(hi);
        suffix[static_cast<std::size_t>(j)] = lse(term, suffix[static_cast<std::size_t>(j) + 1]);
    }
    const double ho = (t1 - t0) / n_outer;
    double acc = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < n_outer; ++i) {
        const double t = t0 + (i + 0.5) * ho;
        const double u = std::exp(t);
        // inner integral from u: whole cells strictly past the one containing
        // t, plus the remaining part of the containing cell (the diagonal
        // cell must be split, otherwise the overlap below u contributes
        // e^{-I(u)} e^{I(u)} u h/2 per node and the sum grows with Rmax)
        const int jc = std::clamp(static_cast<int>((t - t0) / hi), 0, n_inner - 1);
        const double cell_end = t0 + (jc + 1) * hi;
        const double vmid = std::exp(t0 + (jc + 0.5) * hi);
        const double part = I_cf(vmid) - std::log(gamma_cf(vmid)) +
                            std::log(vmid) + std::log(std::max(cell_end - t, 1e-300));
        const double logJ = lse(part, suffix[static_cast<std::size_t>(jc) + 1]);
        acc = lse(acc, -I_cf(u) + logJ + t + std::log(ho));
    }
    return std::exp(acc);
}

/// log J(u) for the polynomial-drift family via the incomplete-gamma identity,
/// stable where Gamma(a, x) itself underflows.
inline double poly_log_inner_J(double K, double kappa, double r0, double u) {
    const double mexp = kappa + 1.0;
    const double c = 2.0 * K / mexp;
    return c * std::pow(r0, mexp) + std::log(std::pow(c, -1.0 / mexp) / mexp) +
           log_gamma_upper(1.0 / mexp, c * std::pow(u, mexp));
}

/// Lambda for the polynomial-drift family through the incomplete-gamma inner
/// integral: a 1-D midpoint log-Riemann sum of F(u) = e^{-I(u)} J(u) plus the
/// analytic power tail F ~ 1/(2K u^kappa), all in the log domain. (A doubly
/// uniform log grid cannot resolve the inner Laplace decay at large radii, so
/// the inner factor comes from the closed form.)
inline double poly_lambda_oracle(double K, double kappa, double r0, double Rmax, int n) {
    const double t0 = std::log(r0), t1 = std::log(Rmax);
    const double h = (t1 - t0) / n;
    const auto lse = [](double a, double b) {
        if (a == -std::numeric_limits<double>::infinity()) return b;
        const double m = std::max(a, b);
        return m + std::log(std::exp(a - m) + std::exp(b - m));
    };
    double acc = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        const double t = t0 + (i + 0.5) * h;
        const double u = std::exp(t);
        acc = lse(acc, -poly_I(K, kappa, r0, u) + poly_log_inner_J(K, kappa, r0, u) + t +
                          std::log(h));
    }
    // tail of F(u) ~ u^{-kappa}/(2K)
    acc = lse(acc, (1.0 - kappa) * std::log(Rmax) - std::log(2.0 * K * (kappa - 1.0)));
    return std::exp(acc);
}

// ---- exact Gaussian TV for the Ornstein-Uhlenbeck contrast ----

/// TV(N(m1, s^2), N(m2, s^2)) = 2 Phi(|m1-m2|/(2s)) - 1
inline double gaussian_tv_same_var(double m1, double m2, double s) {
    const double z = std::fabs(m1 - m2) / (2.0 * s);
    return std::erf(z / std::sqrt(2.0));
}

/// OU dX = -X dt + sqrt(2) dB: law at time t from x is N(x e^{-t}, 1 - e^{-2t}).
inline double ou_tv(double x, double x_ref, double t) {
    const double s = std::sqrt(1.0 - std::exp(-2.0 * t));
    return gaussian_tv_same_var(x * std::exp(-t), x_ref * std::exp(-t), s);
}

} // namespace oracles
