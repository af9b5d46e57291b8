#include "diffcert/certify.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "diffcert/numerics.hpp"

namespace diffcert::certify {

using num::kNegInf;
using num::logaddexp;

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Finite: return "FINITE";
        case Verdict::Infinite: return "INFINITE";
        case Verdict::Inconclusive: return "INCONCLUSIVE";
    }
    return "?";
}

const char* to_string(TailClass c) {
    switch (c) {
        case TailClass::Power: return "power";
        case TailClass::ExpDecay: return "exp-decay";
        case TailClass::ExpGrowth: return "exp-growth";
        case TailClass::Zero: return "zero";
    }
    return "?";
}

namespace {

// Fit without the public-precondition check; callers assemble sane windows.
TailFit fit_tail(std::span<const double> r, std::span<const double> log_f) {
    TailFit out;
    std::vector<double> t, y;
    t.reserve(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (std::isfinite(log_f[i]) && r[i] > 0.0) {
            t.push_back(std::log(r[i]));
            y.push_back(log_f[i]);
        }
    }
    if (t.size() < 4) {
        out.cls = TailClass::Zero;
        out.divergent = false;
        out.log_tail = kNegInf;
        return out;
    }

    const num::LinearFit power = num::linear_fit(t, y);

    // Exponential-tail candidate: log f ~ a - b r^q. The derivative in
    // t = ln r is -b q r^q, so ln|dy/dt| is linear in t with slope q.
    bool exp_valid = t.size() >= 6;
    num::LinearFit qfit;
    int sign_sum = 0;
    std::vector<double> tm, la;
    if (exp_valid) {
        for (std::size_t i = 1; i + 1 < t.size(); ++i) {
            const double d = (y[i + 1] - y[i - 1]) / (t[i + 1] - t[i - 1]);
            if (d == 0.0 || !std::isfinite(d)) continue;
            sign_sum += (d > 0.0) ? 1 : -1;
            tm.push_back(t[i]);
            la.push_back(std::log(std::fabs(d)));
        }
        const std::size_t nmid = tm.size();
        exp_valid = nmid >= 4 &&
                    static_cast<std::size_t>(std::abs(sign_sum)) >= (nmid * 9) / 10;
        if (exp_valid) {
            qfit = num::linear_fit(tm, la);
            exp_valid = std::isfinite(qfit.slope) && qfit.slope > 0.05 && qfit.slope < 64.0;
        }
    }

    double exp_residual = num::kInf;
    double b_scaled = 0.0;
    const double tR = t.back();
    if (exp_valid) {
        // Least squares of y on {1, u} with u = (r/R)^q = e^{q (t - tR)};
        // the scaled basis avoids overflow for large exponents.
        const double q = qfit.slope;
        double su = 0, suu = 0, sy = 0, suy = 0;
        const double n = static_cast<double>(t.size());
        for (std::size_t i = 0; i < t.size(); ++i) {
            const double u = std::exp(q * (t[i] - tR));
            su += u;
            suu += u * u;
            sy += y[i];
            suy += u * y[i];
        }
        const double det = n * suu - su * su;
        if (std::fabs(det) > 1e-30) {
            const double coef = (n * suy - su * sy) / det; // y ~ a + coef * u
            const double a = (sy - coef * su) / n;
            double ss = 0;
            for (std::size_t i = 0; i < t.size(); ++i) {
                const double u = std::exp(q * (t[i] - tR));
                const double e = y[i] - (a + coef * u);
                ss += e * e;
            }
            exp_residual = std::sqrt(ss / n);
            b_scaled = -coef; // b in units of (r/R)^q; positive = decay
        } else {
            exp_valid = false;
        }
    }

    if (exp_valid && exp_residual < power.residual_rms) {
        out.cls = (sign_sum < 0) ? TailClass::ExpDecay : TailClass::ExpGrowth;
        out.rate_q = qfit.slope;
        out.rate_b = b_scaled;
        out.residual = exp_residual;
        out.divergent = (out.cls == TailClass::ExpGrowth);
        if (!out.divergent) {
            // Watson: int_R^inf f = f(R) R / |dlog|(R) * (1 - (q-1)/|dlog|(R) + ...)
            // with |dlog| = |d log f / d log r| from the fitted model. The
            // second-order factor matters when the tail dominates J near Rmax.
            const double dlog_at_R = std::exp(qfit.intercept + qfit.slope * tR);
            const double correction =
                std::clamp(1.0 - (qfit.slope - 1.0) / dlog_at_R, 0.5, 1.0);
            out.log_tail = y.back() + tR - std::log(dlog_at_R) + std::log(correction);
        } else {
            out.log_tail = kNegInf;
        }
        return out;
    }

    out.cls = TailClass::Power;
    out.slope = power.slope;
    out.residual = power.residual_rms;
    out.divergent = power.slope >= -1.0 - 1e-9;
    if (!out.divergent) {
        // int_R^inf C u^p du = C R^{p+1} / (-1 - p), anchored on the fit line
        // so oscillating prefactors average out.
        const double log_fR = power.intercept + power.slope * tR;
        out.log_tail = log_fR + tR - std::log(-1.0 - power.slope);
    } else {
        out.log_tail = kNegInf;
    }
    return out;
}

std::vector<std::size_t> tail_window(std::span<const double> r) {
    // Last decade of the grid, or the last geometric half when the grid spans
    // less than two decades; always at least 16 nodes when available.
    const double Rmax = r.back();
    const double span_dec = std::log10(Rmax / r.front());
    const double w = std::min(1.0, 0.5 * span_dec);
    const double lo = Rmax / std::pow(10.0, w);
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < r.size(); ++i)
        if (r[i] >= lo) idx.push_back(i);
    while (idx.size() < 16 && idx.size() < r.size())
        idx.insert(idx.begin(), idx.front() - 1);
    return idx;
}

TailFit fit_tail_window(std::span<const double> r, std::span<const double> log_f) {
    const auto idx = tail_window(r);
    std::vector<double> rw, yw;
    rw.reserve(idx.size());
    for (std::size_t i : idx) {
        rw.push_back(r[i]);
        yw.push_back(log_f[i]);
    }
    return fit_tail(rw, yw);
}

} // namespace

TailFit classify_tail(std::span<const double> r, std::span<const double> log_f) {
    if (r.size() != log_f.size())
        throw PreconditionError("classify_tail: mismatched sample arrays");
    bool any_finite = false;
    for (double v : log_f)
        if (std::isfinite(v)) any_finite = true;
    if (!any_finite) {
        TailFit out;
        out.cls = TailClass::Zero;
        out.divergent = false;
        out.log_tail = kNegInf;
        return out;
    }
    if (r.size() < 16)
        throw PreconditionError("classify_tail: need at least 16 samples");
    const auto [mn, mx] = std::minmax_element(r.begin(), r.end());
    if (!(*mx / *mn >= 10.0))
        throw PreconditionError("classify_tail: samples must span at least one decade");
    return fit_tail(r, log_f);
}

IntegralTables IntegralTables::build(const RadialProfile& p, std::size_t stride) {
    if (p.size() < 16) throw PreconditionError("profile too small");
    IntegralTables tb;
    std::vector<std::size_t> idx;
    if (stride <= 1) {
        idx.resize(p.size());
        for (std::size_t i = 0; i < p.size(); ++i) idx[i] = i;
    } else {
        for (std::size_t i = 0; i < p.size(); i += stride) idx.push_back(i);
        if (idx.back() != p.size() - 1) idx.push_back(p.size() - 1);
    }
    const std::size_t M = idx.size();
    tb.r_.resize(M);
    tb.t_.resize(M);
    tb.I_.resize(M);
    tb.gamma_.resize(M);
    tb.iota_.resize(M);
    for (std::size_t k = 0; k < M; ++k) {
        tb.r_[k] = p.r[idx[k]];
        tb.t_[k] = p.t[idx[k]];
        tb.I_[k] = p.I[idx[k]];
        tb.gamma_[k] = p.gamma[idx[k]];
        tb.iota_[k] = p.iota[idx[k]];
    }

    tb.log_inner_integrand_.resize(M);
    for (std::size_t k = 0; k < M; ++k)
        tb.log_inner_integrand_[k] = tb.I_[k] - std::log(tb.gamma_[k]);

    tb.inner_tail_ = fit_tail_window(tb.r_, tb.log_inner_integrand_);

    // Suffix log-integrals of the inner integrand.
    tb.suffix_log_J_.assign(M, kNegInf);
    for (std::size_t k = M - 1; k-- > 0;) {
        const double c = num::log_interval_expint(
            tb.log_inner_integrand_[k] + tb.t_[k],
            tb.log_inner_integrand_[k + 1] + tb.t_[k + 1], tb.t_[k + 1] - tb.t_[k]);
        tb.suffix_log_J_[k] = logaddexp(c, tb.suffix_log_J_[k + 1]);
    }
    tb.log_J_full_.resize(M);
    const double inner_tail_log = tb.inner_tail_.divergent ? kNegInf : tb.inner_tail_.log_tail;
    for (std::size_t k = 0; k < M; ++k)
        tb.log_J_full_[k] = logaddexp(tb.suffix_log_J_[k], inner_tail_log);

    tb.log_F_.resize(M);
    for (std::size_t k = 0; k < M; ++k) tb.log_F_[k] = -tb.I_[k] + tb.log_J_full_[k];

    tb.prefix_log_lambda_.assign(M, kNegInf);
    for (std::size_t k = 0; k + 1 < M; ++k) {
        const double c = num::log_interval_expint(tb.log_F_[k] + tb.t_[k],
                                                  tb.log_F_[k + 1] + tb.t_[k + 1],
                                                  tb.t_[k + 1] - tb.t_[k]);
        tb.prefix_log_lambda_[k + 1] = logaddexp(tb.prefix_log_lambda_[k], c);
    }
    tb.lbar_.resize(M);
    for (std::size_t k = 0; k < M; ++k) tb.lbar_[k] = std::exp(tb.prefix_log_lambda_[k]);

    tb.outer_tail_ = fit_tail_window(tb.r_, tb.log_F_);
    return tb;
}

double IntegralTables::log_inner_at(double u) const {
    if (u < r_.front() - 1e-12 * r_.front() || u > r_.back() * (1.0 + 1e-12))
        throw PreconditionError("inner integral queried outside [r0, Rmax]");
    const double tu = std::log(u);
    const auto it = std::upper_bound(t_.begin(), t_.end(), tu);
    std::size_t k = (it == t_.begin()) ? 0 : static_cast<std::size_t>(it - t_.begin()) - 1;
    if (k + 1 >= t_.size()) k = t_.size() - 2;
    const double w = (tu - t_[k]) / (t_[k + 1] - t_[k]);
    const double phi_u = (1.0 - w) * (log_inner_integrand_[k] + t_[k]) +
                         w * (log_inner_integrand_[k + 1] + t_[k + 1]);
    const double part = num::log_interval_expint(
        phi_u, log_inner_integrand_[k + 1] + t_[k + 1], t_[k + 1] - tu);
    const double inner_tail_log = inner_tail_.divergent ? kNegInf : inner_tail_.log_tail;
    return logaddexp(logaddexp(part, suffix_log_J_[k + 1]), inner_tail_log);
}

double IntegralTables::partial_lambda() const { return std::exp(prefix_log_lambda_.back()); }

double IntegralTables::lambda_with_tail() const {
    const double tail = outer_tail_.divergent ? kNegInf : outer_tail_.log_tail;
    return std::exp(logaddexp(prefix_log_lambda_.back(), tail));
}

double IntegralTables::last_decade_fraction() const {
    const double Rmax = r_.back();
    const double lo = Rmax / 10.0;
    double acc = kNegInf;
    for (std::size_t k = 0; k + 1 < r_.size(); ++k) {
        if (r_[k] >= lo) {
            const double c = num::log_interval_expint(log_F_[k] + t_[k],
                                                      log_F_[k + 1] + t_[k + 1],
                                                      t_[k + 1] - t_[k]);
            acc = logaddexp(acc, c);
        }
    }
    const double total = prefix_log_lambda_.back();
    if (total == kNegInf) return 0.0;
    return std::exp(acc - total);
}

namespace {

int nodes_for_window(int base_nodes, double r0, double Rmax) {
    // Keep the log-grid spacing of the initial [r0, 8 r0] window.
    const double scale = std::log(Rmax / r0) / std::log(8.0);
    const double m = std::ceil(base_nodes * std::max(1.0, scale));
    return static_cast<int>(std::min(m, 3e6));
}

DoublingStep make_step(const IntegralTables& tb, int nodes, double rel_err) {
    DoublingStep s;
    s.Rmax = tb.rmax();
    s.nodes = nodes;
    s.partial_lambda = tb.partial_lambda();
    s.lambda_with_tail = tb.lambda_with_tail();
    s.last_decade_fraction = tb.last_decade_fraction();
    s.rel_err_est = rel_err;
    s.inner = tb.inner_tail();
    s.outer = tb.outer_tail();
    return s;
}

} // namespace

Certificate lambda(const RadialProfile& p0, const CertifyConfig& cfg) {
    if (!p0.model) throw PreconditionError("profile carries no model; cannot extend truncation");
    const auto model = p0.model;
    const double r0 = model->r0;

    Certificate cert;
    cert.config = cfg;
    cert.model_name = model->name;
    cert.model_checksum = dsl::model_checksum(*model);
    cert.r1 = cfg.r1_factor * r0;
    cert.petite_radius = cert.r1;

    RadialProfile profile = p0;
    double prev_lambda = std::numeric_limits<double>::quiet_NaN();
    int divergent_streak = 0;

    for (int k = 0; k <= cfg.max_doublings; ++k) {
        const IntegralTables tb = IntegralTables::build(profile);
        const IntegralTables coarse = IntegralTables::build(profile, 2);
        const double lam = tb.lambda_with_tail();
        const double lam2h = coarse.lambda_with_tail();
        const double rel_err =
            std::fabs(lam - lam2h) / (3.0 * std::max(lam, 1e-300));

        cert.trace.push_back(make_step(tb, static_cast<int>(profile.size()), rel_err));
        cert.Rmax = tb.rmax();
        cert.tail_inner = tb.inner_tail();
        cert.tail_outer = tb.outer_tail();
        cert.rel_err_est = rel_err;
        cert.profile_checksum = profile.checksum();

        const bool divergent = tb.inner_divergent() || tb.outer_divergent() ||
                               !std::isfinite(lam);
        divergent_streak = divergent ? divergent_streak + 1 : 0;
        if (divergent_streak >= 2) {
            cert.verdict = Verdict::Infinite;
            cert.lambda_est = num::kInf;
            return cert;
        }

        if (!divergent && std::isfinite(prev_lambda)) {
            const double change = std::fabs(lam - prev_lambda) / std::max(lam, 1e-300);
            if (change <= cfg.tol && rel_err <= cfg.tol) {
                cert.verdict = Verdict::Finite;
                cert.lambda_est = lam;
                cert.c1 = 1.0 / (2.0 * (lam + 1.0));
                return cert;
            }
        }
        prev_lambda = divergent ? std::numeric_limits<double>::quiet_NaN() : lam;

        if (k == cfg.max_doublings) break;
        const double next_Rmax = profile.Rmax * 2.0;
        profile = radial::build_profile(model, next_Rmax,
                                        nodes_for_window(cfg.base_nodes, r0, next_Rmax),
                                        cfg.sphere);
    }

    cert.verdict = Verdict::Inconclusive;
    cert.lambda_est = cert.trace.back().lambda_with_tail;
    return cert;
}

Certificate certify_model(const std::shared_ptr<const dsl::ModelSpec>& m,
                          const CertifyConfig& cfg) {
    const double Rmax0 = 8.0 * m->r0;
    RadialProfile p = radial::build_profile(m, Rmax0, cfg.base_nodes, cfg.sphere);
    return lambda(p, cfg);
}

namespace {

nlohmann::json tail_to_json(const TailFit& t) {
    nlohmann::json j;
    j["class"] = to_string(t.cls);
    j["slope"] = t.slope;
    j["rate_b"] = t.rate_b;
    j["rate_q"] = t.rate_q;
    j["residual"] = t.residual;
    j["divergent"] = t.divergent;
    return j;
}

} // namespace

std::string certificate_to_json(const Certificate& c) {
    nlohmann::json j;
    j["verdict"] = to_string(c.verdict);
    if (std::isfinite(c.lambda_est))
        j["lambda_est"] = c.lambda_est;
    else
        j["lambda_est"] = "inf";
    j["Rmax"] = c.Rmax;
    j["tail_inner"] = tail_to_json(c.tail_inner);
    j["tail_outer"] = tail_to_json(c.tail_outer);
    j["rel_err_est"] = c.rel_err_est;
    if (c.c1) j["c1"] = *c.c1;
    if (c.c2) j["c2"] = *c.c2;
    j["r1"] = c.r1;
    j["petite_radius"] = c.petite_radius;
    if (!c.c2_witness.empty()) {
        j["c2_witness"] = c.c2_witness;
        j["c2_samples"] = c.c2_samples;
    }
    nlohmann::json trace = nlohmann::json::array();
    for (const auto& s : c.trace) {
        nlohmann::json e;
        e["Rmax"] = s.Rmax;
        e["nodes"] = s.nodes;
        e["partial_lambda"] = s.partial_lambda;
        e["lambda_with_tail"] = s.lambda_with_tail;
        e["last_decade_fraction"] = s.last_decade_fraction;
        e["rel_err_est"] = s.rel_err_est;
        e["inner"] = tail_to_json(s.inner);
        e["outer"] = tail_to_json(s.outer);
        trace.push_back(e);
    }
    j["trace"] = trace;
    j["config"] = {{"tol", c.config.tol},
                   {"max_doublings", c.config.max_doublings},
                   {"base_nodes", c.config.base_nodes},
                   {"r1_factor", c.config.r1_factor},
                   {"sphere_samples", c.config.sphere.n_samples},
                   {"sphere_seed", c.config.sphere.seed}};
    j["profile_checksum"] = c.profile_checksum;
    j["model"] = c.model_name;
    j["model_checksum"] = c.model_checksum;
    return j.dump(2);
}

} // namespace diffcert::certify
