#include "diffcert/lyapunov.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "diffcert/numerics.hpp"
#include "diffcert/rng.hpp"
#include "diffcert/threading.hpp"

namespace diffcert::lyap {

using num::kNegInf;

LyapunovFn build_lyapunov(const RadialProfile& p, const Certificate& cert, double r1) {
    if (cert.verdict != certify::Verdict::Finite)
        throw PreconditionError("Lyapunov construction requires a FINITE certificate (got " +
                                std::string(certify::to_string(cert.verdict)) + ")");
    if (!(r1 > p.r0))
        throw PreconditionError("blend radius r1 must exceed r0");
    if (!(r1 < p.Rmax))
        throw PreconditionError("blend radius r1 must lie inside the tabulated range");

    const certify::IntegralTables tb = certify::IntegralTables::build(p);

    LyapunovFn L;
    L.d_ = p.model ? p.model->d : 1;
    L.x0_ = p.model ? p.model->x0 : std::vector<double>(static_cast<std::size_t>(L.d_), 0.0);
    L.r1_ = r1;
    L.lambda_ = cert.lambda_est;

    const std::size_t M = tb.r().size();
    L.r_.assign(tb.r().begin(), tb.r().end());
    L.t_.assign(tb.t().begin(), tb.t().end());
    L.lbar_.assign(tb.lbar().begin(), tb.lbar().end());
    L.log_lbar1_.assign(tb.log_F().begin(), tb.log_F().end());
    L.lbar1_.resize(M);
    L.lbar2_.resize(M);
    for (std::size_t k = 0; k < M; ++k) {
        L.lbar1_[k] = std::exp(L.log_lbar1_[k]);
        L.lbar2_[k] = -tb.iota()[k] * L.lbar1_[k] / L.r_[k] - 1.0 / tb.gamma()[k];
    }

    // Monotone cubic of lbar in t = ln r with the exact slopes d lbar/dt = r lbar'.
    std::vector<double> slope(M);
    for (std::size_t k = 0; k < M; ++k) slope[k] = L.r_[k] * L.lbar1_[k];
    L.lbar_interp_ = num::CubicHermite(L.t_, L.lbar_, std::move(slope), /*monotone_limit=*/true);

    const double v1 = L.lbar_at(r1) + 1.0;
    const double d1 = L.lbar1_at(r1);
    const double d2 = L.lbar2_at(r1);
    L.blend_ = num::QuinticBlend::solve(1.0, r1, v1, d1, d2);
    return L;
}

double LyapunovFn::lbar_at(double r) const {
    if (r < r_.front() * (1.0 - 1e-12) || r > r_.back() * (1.0 + 1e-12))
        throw PreconditionError("Lbar queried outside the tabulated range");
    return lbar_interp_.value(std::log(std::clamp(r, r_.front(), r_.back())));
}

double LyapunovFn::lbar1_at(double r) const {
    if (r < r_.front() * (1.0 - 1e-12) || r > r_.back() * (1.0 + 1e-12))
        throw PreconditionError("Lbar' queried outside the tabulated range");
    const double t = std::log(std::clamp(r, r_.front(), r_.back()));
    return std::exp(num::lerp_table(t_, log_lbar1_, t));
}

double LyapunovFn::lbar2_at(double r) const {
    if (r < r_.front() * (1.0 - 1e-12) || r > r_.back() * (1.0 + 1e-12))
        throw PreconditionError("Lbar'' queried outside the tabulated range");
    const double t = std::log(std::clamp(r, r_.front(), r_.back()));
    return num::lerp_table(t_, lbar2_, t);
}

double LyapunovFn::radial_value(double r) const {
    if (r < r1_) return blend_.value(r);
    return lbar_at(r) + 1.0;
}

double LyapunovFn::radial_d1(double r) const {
    if (r < r1_) return blend_.d1(r);
    return lbar1_at(r);
}

double LyapunovFn::radial_d2(double r) const {
    if (r < r1_) return blend_.d2(r);
    return lbar2_at(r);
}

namespace {

double radius_of(std::span<const double> x, std::span<const double> x0) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - x0[i]) * (x[i] - x0[i]);
    return std::sqrt(s);
}

} // namespace

double LyapunovFn::value(std::span<const double> x) const {
    return radial_value(radius_of(x, x0_));
}

void LyapunovFn::gradient(std::span<const double> x, std::span<double> g) const {
    const double r = radius_of(x, x0_);
    if (r < 1e-300) {
        for (int i = 0; i < d_; ++i) g[i] = 0.0;
        return;
    }
    const double d1 = radial_d1(r);
    for (int i = 0; i < d_; ++i) g[i] = d1 * (x[i] - x0_[i]) / r;
}

void LyapunovFn::hessian(std::span<const double> x, std::span<double> h) const {
    const double r = radius_of(x, x0_);
    if (r < 1e-300) {
        const double d2 = radial_d2(0.0);
        for (int i = 0; i < d_; ++i)
            for (int j = 0; j < d_; ++j)
                h[static_cast<std::size_t>(i) * d_ + j] = (i == j) ? d2 : 0.0;
        return;
    }
    const double d1 = radial_d1(r);
    const double d2 = radial_d2(r);
    const double tang = d1 / r;
    for (int i = 0; i < d_; ++i) {
        const double ui = (x[i] - x0_[i]) / r;
        for (int j = 0; j < d_; ++j) {
            const double uj = (x[j] - x0_[j]) / r;
            double v = (d2 - tang) * ui * uj;
            if (i == j) v += tang;
            h[static_cast<std::size_t>(i) * d_ + j] = v;
        }
    }
}

double apply_generator(const ModelSpec& m, const ScalarField& f, std::span<const double> x) {
    std::vector<double> g(static_cast<std::size_t>(m.d));
    std::vector<double> h(static_cast<std::size_t>(m.d) * m.d);
    f.gradient(x, g);
    f.hessian(x, h);

    double drift_term = 0.0;
    for (int i = 0; i < m.d; ++i)
        drift_term += m.drift_prog[i].eval_checked(x) * g[i];

    std::vector<double> sigma(static_cast<std::size_t>(m.d) * m.n);
    for (std::size_t k = 0; k < sigma.size(); ++k)
        sigma[k] = m.diffusion_prog[k].eval_checked(x);

    // 1/2 Tr(sigma sigma^T H) = 1/2 sum_{i,j} (sigma sigma^T)_{ij} H_{ij}
    double diff_term = 0.0;
    for (int i = 0; i < m.d; ++i) {
        for (int j = 0; j < m.d; ++j) {
            double a_ij = 0.0;
            for (int k = 0; k < m.n; ++k)
                a_ij += sigma[static_cast<std::size_t>(i) * m.n + k] *
                        sigma[static_cast<std::size_t>(j) * m.n + k];
            diff_term += a_ij * h[static_cast<std::size_t>(i) * m.d + j];
        }
    }
    return drift_term + 0.5 * diff_term;
}

double radial_generator(const LyapunovFn& L, const ModelSpec& m, std::span<const double> x) {
    const double r = radius_of(x, m.x0);
    if (r < L.r1() * (1.0 - 1e-12))
        throw PreconditionError("radial_generator requires |x-x0| >= r1 (blend region excluded)");
    const double A = radial::coeff_A(m, x);
    const double B = radial::coeff_B(m, x);
    const double C = radial::coeff_C(m, x);
    return 0.5 * C * L.lbar2_at(r) + L.lbar1_at(r) / (2.0 * r) * (2.0 * A - C + 2.0 * B);
}

namespace {

std::vector<double> stratified_point(const ModelSpec& m, const rng::Stream& s, std::size_t i,
                                     std::size_t n, double R) {
    const double u = (static_cast<double>(i) + s.u01_at(2 * i)) / static_cast<double>(n);
    const double r = u * R;
    const auto dir = radial::unit_direction(m.d, s.u64_at(2 * i + 1), i);
    std::vector<double> x(static_cast<std::size_t>(m.d));
    for (int k = 0; k < m.d; ++k) x[k] = m.x0[k] + r * dir[k];
    return x;
}

/// Derivative-free local maximization of fn inside the closed ball of radius
/// cap (cap <= 0: unconstrained), pattern search over coordinates.
template <typename Fn>
double refine_max(const ModelSpec& m, std::vector<double>& x, double cap, double step0,
                  const Fn& fn) {
    double best = fn(x);
    double h = step0;
    for (int iter = 0; iter < 200 && h > 1e-12 * (1.0 + step0); ++iter) {
        bool improved = false;
        for (int i = 0; i < m.d && !improved; ++i) {
            for (const double sgn : {+1.0, -1.0}) {
                std::vector<double> cand = x;
                cand[i] += sgn * h;
                if (cap > 0.0) {
                    const double r = radius_of(cand, m.x0);
                    if (r > cap) {
                        for (int k = 0; k < m.d; ++k)
                            cand[k] = m.x0[k] + (cand[k] - m.x0[k]) * (cap / r);
                    }
                }
                double v;
                try {
                    v = fn(cand);
                } catch (const Error&) {
                    continue;
                }
                if (v > best + 1e-14 * (1.0 + std::fabs(best))) {
                    best = v;
                    x = std::move(cand);
                    improved = true;
                    break;
                }
            }
        }
        if (!improved) h *= 0.5;
    }
    return best;
}

} // namespace

std::pair<double, double> lyapunov_constants(const Certificate& cert, const ModelSpec& m,
                                             const LyapunovFn& L, double r1, int n_samples,
                                             std::vector<double>* witness) {
    if (cert.verdict != certify::Verdict::Finite)
        throw PreconditionError("lyapunov_constants requires a FINITE certificate");
    if (!(r1 > m.r0)) throw PreconditionError("r1 must exceed r0");
    const double c1 = *cert.c1;

    const rng::Stream s = rng::Stream::derive(cert.config.sphere.seed, 0xC27357);
    const auto objective = [&](std::span<const double> x) {
        return apply_generator(m, L, x) + c1 * L.value(x);
    };

    double best = -num::kInf;
    std::vector<double> best_x(static_cast<std::size_t>(m.d), 0.0);
    const std::size_t n = static_cast<std::size_t>(std::max(n_samples, 16));
    for (std::size_t i = 0; i < n; ++i) {
        const auto x = stratified_point(m, s, i, n, r1);
        const double v = objective(x);
        if (v > best) {
            best = v;
            best_x = x;
        }
    }
    best = refine_max(m, best_x, r1, 0.05 * r1,
                      [&](const std::vector<double>& x) { return objective(x); });
    if (witness) *witness = best_x;
    return {c1, std::max(0.0, best)};
}

DriftCheckReport drift_check(const ModelSpec& m, const LyapunovFn& L, double c1, double c2,
                             double r1, const DriftCheckConfig& cfg) {
    DriftCheckReport rep;
    rep.c1 = c1;
    rep.c2 = c2;
    rep.r1 = r1;
    rep.n_samples = cfg.n_samples;
    const double R = (cfg.R_test > 0.0) ? std::min(cfg.R_test, L.rmax()) : L.rmax();
    rep.R_test = R;

    const std::size_t n = static_cast<std::size_t>(std::max(cfg.n_samples, 1));
    const rng::Stream s = rng::Stream::derive(cfg.seed, 0xDC);

    struct ChunkBest {
        double violation = -num::kInf;
        std::size_t index = 0;
        double gen = 0.0;
        std::vector<double> x;
    };
    const std::size_t chunk = 1024;
    const std::size_t n_chunks = (n + chunk - 1) / chunk;
    std::vector<ChunkBest> partial(n_chunks);

    parallel_chunks(n, chunk, [&](std::size_t c, std::size_t lo, std::size_t hi) {
        ChunkBest cb;
        for (std::size_t i = lo; i < hi; ++i) {
            const auto x = stratified_point(m, s, i, n, R);
            const double r = radius_of(x, m.x0);
            const double gen = apply_generator(m, L, x);
            double v = gen + c1 * L.value(x);
            if (r <= r1) v -= c2;
            if (v > cb.violation) {
                cb.violation = v;
                cb.index = i;
                cb.gen = gen;
                cb.x = x;
            }
        }
        partial[c] = std::move(cb);
    });

    ChunkBest best;
    for (const auto& cb : partial) {
        // strict comparison keeps the lowest sample index on ties
        if (cb.violation > best.violation) best = cb;
    }
    rep.max_violation = best.violation;
    rep.witness = best.x;
    rep.generator_at_witness = best.gen;
    rep.slack = 1e-8 * (1.0 + std::fabs(best.gen));
    rep.pass = best.violation <= rep.slack;
    return rep;
}

std::string drift_report_to_json(const DriftCheckReport& r) {
    nlohmann::json j;
    j["pass"] = r.pass;
    j["max_violation"] = r.max_violation;
    j["witness_x"] = r.witness;
    j["generator_at_witness"] = r.generator_at_witness;
    j["slack"] = r.slack;
    j["n_samples"] = r.n_samples;
    j["c1"] = r.c1;
    j["c2"] = r.c2;
    j["r1"] = r.r1;
    j["R_test"] = r.R_test;
    return j.dump(2);
}

double escape_bound(const ModelSpec& m, double eps, double Rcap, std::span<const double> x,
                    const radial::SphereOptConfig& sphere, int nodes) {
    if (!(eps > 0.0 && eps < m.r0))
        throw PreconditionError("escape_bound needs 0 < eps < r0");
    const double r = radius_of(x, m.x0);
    if (r < m.r0 * (1.0 - 1e-12))
        throw PreconditionError("escape_bound requires |x-x0| >= r0");
    const double r_start = m.r0 - eps;
    if (!(Rcap > std::max(r, r_start) * 1.5))
        throw PreconditionError("Rcap too small for escape_bound");

    auto model = std::make_shared<const ModelSpec>(m);
    const int M = std::max(nodes, 1024);
    const RadialProfile p = radial::build_profile_from(model, r_start, Rcap, M, sphere);

    // log-domain prefix integral of e^{-I(u)} du
    const std::size_t n = p.size();
    std::vector<double> prefix(n, kNegInf);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const double c = num::log_interval_expint(-p.I[k] + p.t[k], -p.I[k + 1] + p.t[k + 1],
                                                  p.t[k + 1] - p.t[k]);
        prefix[k + 1] = num::logaddexp(prefix[k], c);
    }

    std::vector<double> neg_I(n);
    for (std::size_t k = 0; k < n; ++k) neg_I[k] = -p.I[k];
    const certify::TailFit tail = certify::classify_tail(p.r, neg_I);
    if (tail.cls == certify::TailClass::ExpGrowth)
        return 0.0; // denominator diverges: the ball is entered almost surely

    double log_den = prefix.back();
    if (!tail.divergent) log_den = num::logaddexp(log_den, tail.log_tail);

    if (r <= r_start) return 0.0;
    const double tr = std::log(std::min(r, p.r.back()));
    // numerator: prefix up to r with a partial last interval
    const auto it = std::upper_bound(p.t.begin(), p.t.end(), tr);
    std::size_t k = (it == p.t.begin()) ? 0 : static_cast<std::size_t>(it - p.t.begin()) - 1;
    if (k + 1 >= n) k = n - 2;
    const double w = (tr - p.t[k]) / (p.t[k + 1] - p.t[k]);
    const double phi_r = (1.0 - w) * (-p.I[k] + p.t[k]) + w * (-p.I[k + 1] + p.t[k + 1]);
    const double part = num::log_interval_expint(-p.I[k] + p.t[k], phi_r, tr - p.t[k]);
    const double log_num = num::logaddexp(prefix[k], part);

    return std::min(1.0, std::exp(log_num - log_den));
}

std::string lyapunov_to_csv(const LyapunovFn& L, const ModelSpec& m, int sphere_samples) {
    std::string out = "r,lbar,lbar1,lbar2,radial_generator_bound\n";
    const auto grid = L.grid();
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double r = grid[k];
        // sampled sup of G L over the sphere of radius r
        double sup = -num::kInf;
        const int ndir = (m.d == 1) ? 2 : std::max(2, sphere_samples);
        for (int i = 0; i < ndir; ++i) {
            std::vector<double> dir;
            if (m.d == 1)
                dir = {i == 0 ? 1.0 : -1.0};
            else
                dir = radial::unit_direction(m.d, 0xCE0, static_cast<std::uint64_t>(i));
            std::vector<double> x(static_cast<std::size_t>(m.d));
            for (int c = 0; c < m.d; ++c) x[c] = m.x0[c] + r * dir[c];
            sup = std::max(sup, apply_generator(m, L, x));
        }
        out += num::format_g17(r);
        out += ',';
        out += num::format_g17(L.lbar_table()[k]);
        out += ',';
        out += num::format_g17(L.lbar1_table()[k]);
        out += ',';
        out += num::format_g17(L.lbar2_table()[k]);
        out += ',';
        out += num::format_g17(sup);
        out += '\n';
    }
    return out;
}

} // namespace diffcert::lyap
