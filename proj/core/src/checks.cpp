#include "diffcert/checks.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "diffcert/errors.hpp"
#include "diffcert/numerics.hpp"
#include "diffcert/radial.hpp"
#include "diffcert/rng.hpp"

namespace diffcert::checks {

const char* to_string(Status s) {
    return s == Status::Violated ? "VIOLATED" : "NOT_FALSIFIED";
}

namespace {

constexpr const char* kBanner =
    "falsification-only: sampling can prove a violation but never the assumption";

std::vector<double> ball_point(const ModelSpec& m, const rng::Stream& s, std::uint64_t i,
                               double R, std::span<const double> center) {
    // uniform in the ball: direction times radius ~ u^{1/d}
    const auto dir = radial::unit_direction(m.d, s.u64_at(3 * i), i);
    const double u = s.u01_at(3 * i + 1);
    const double r = R * std::pow(u, 1.0 / m.d);
    std::vector<double> x(static_cast<std::size_t>(m.d));
    for (int k = 0; k < m.d; ++k) x[k] = center[k] + r * dir[k];
    return x;
}

double hs_norm_sq(std::span<const double> mat) {
    double s = 0.0;
    for (double v : mat) s += v * v;
    return s;
}

/// Eigenvalues of a symmetric d x d matrix by cyclic Jacobi (small d).
std::vector<double> sym_eigenvalues(std::vector<double> a, int d) {
    if (d == 1) return {a[0]};
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (int i = 0; i < d; ++i)
            for (int j = i + 1; j < d; ++j) off += a[i * d + j] * a[i * d + j];
        if (off < 1e-28) break;
        for (int p = 0; p < d; ++p) {
            for (int q = p + 1; q < d; ++q) {
                const double apq = a[p * d + q];
                if (std::fabs(apq) < 1e-300) continue;
                const double theta = (a[q * d + q] - a[p * d + p]) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < d; ++k) {
                    const double akp = a[k * d + p], akq = a[k * d + q];
                    a[k * d + p] = c * akp - s * akq;
                    a[k * d + q] = s * akp + c * akq;
                }
                for (int k = 0; k < d; ++k) {
                    const double apk = a[p * d + k], aqk = a[q * d + k];
                    a[p * d + k] = c * apk - s * aqk;
                    a[q * d + k] = s * apk + c * aqk;
                }
            }
        }
    }
    std::vector<double> ev(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) ev[static_cast<std::size_t>(i)] = a[i * d + i];
    std::sort(ev.begin(), ev.end());
    return ev;
}

double min_eig_sigma(const ModelSpec& m, std::span<const double> x) {
    const auto sigma = dsl::eval_diffusion(m, x);
    std::vector<double> a(static_cast<std::size_t>(m.d) * m.d, 0.0);
    for (int i = 0; i < m.d; ++i)
        for (int j = 0; j < m.d; ++j) {
            double v = 0.0;
            for (int k = 0; k < m.n; ++k)
                v += sigma[static_cast<std::size_t>(i) * m.n + k] *
                     sigma[static_cast<std::size_t>(j) * m.n + k];
            a[static_cast<std::size_t>(i) * m.d + j] = v;
        }
    return sym_eigenvalues(std::move(a), m.d).front();
}

double growth_ratio(const ModelSpec& m, std::span<const double> x) {
    const auto b = dsl::eval_drift(m, x);
    const auto sg = dsl::eval_diffusion(m, x);
    double xb = 0.0, x2 = 0.0;
    for (int i = 0; i < m.d; ++i) {
        xb += x[i] * b[i];
        x2 += x[i] * x[i];
    }
    return (2.0 * xb + hs_norm_sq(sg)) / (1.0 + x2);
}

double onesided_ratio(const ModelSpec& m, std::span<const double> x, std::span<const double> y) {
    const auto bx = dsl::eval_drift(m, x);
    const auto by = dsl::eval_drift(m, y);
    const auto sx = dsl::eval_diffusion(m, x);
    const auto sy = dsl::eval_diffusion(m, y);
    double num = 0.0, den = 0.0;
    for (int i = 0; i < m.d; ++i) {
        num += 2.0 * (x[i] - y[i]) * (bx[i] - by[i]);
        den += (x[i] - y[i]) * (x[i] - y[i]);
    }
    double ds = 0.0;
    for (std::size_t k = 0; k < sx.size(); ++k) ds += (sx[k] - sy[k]) * (sx[k] - sy[k]);
    if (den == 0.0) throw PreconditionError("degenerate pair");
    return (num + ds) / den;
}

} // namespace

AssumptionReport check_growth(const ModelSpec& m, double R, const CheckConfig& cfg) {
    AssumptionReport rep;
    rep.id = "A3";
    rep.note = kBanner;
    const rng::Stream s = rng::Stream::derive(cfg.seed, 0xA3);
    const int levels = 6;
    const std::vector<double> origin(static_cast<std::size_t>(m.d), 0.0);
    std::vector<double> level_max(levels, -num::kInf);
    std::vector<std::vector<double>> level_arg(levels);
    const std::int64_t per_level = std::max<std::int64_t>(cfg.n_samples / levels, 64);
    for (int lv = 0; lv < levels; ++lv) {
        const double Rl = R * std::pow(2.0, lv);
        const rng::Stream sl = s.child(static_cast<std::uint64_t>(lv));
        for (std::int64_t i = 0; i < per_level; ++i) {
            const auto x = ball_point(m, sl, static_cast<std::uint64_t>(i), Rl, origin);
            double v;
            try {
                v = growth_ratio(m, x);
            } catch (const Error&) {
                continue;
            }
            if (v > level_max[lv]) {
                level_max[lv] = v;
                level_arg[lv] = x;
            }
        }
        rep.fitted.emplace_back(Rl, level_max[lv]);
        rep.sample_budget += per_level;
    }
    // Divergence: positive maxima whose log grows against log R.
    std::vector<double> lr, lm;
    for (int lv = 0; lv < levels; ++lv) {
        if (level_max[lv] > 0.0) {
            lr.push_back(std::log(R * std::pow(2.0, lv)));
            lm.push_back(std::log(level_max[lv]));
        }
    }
    if (lr.size() >= 3) {
        const auto fit = num::linear_fit(lr, lm);
        if (fit.slope > 0.5) {
            rep.status = Status::Violated;
            rep.witness = level_arg[levels - 1];
            rep.witness_value = level_max[levels - 1];
            rep.note = "growth ratio diverges across radius doublings (log-log slope " +
                       num::format_g17(fit.slope) + "); " + kBanner;
        }
    }
    return rep;
}

AssumptionReport check_onesided(const ModelSpec& m, double r, const CheckConfig& cfg) {
    AssumptionReport rep;
    rep.id = "A2";
    rep.note = kBanner;
    const rng::Stream s = rng::Stream::derive(cfg.seed, 0xA2);
    const std::vector<double> origin(static_cast<std::size_t>(m.d), 0.0);

    // base table over sub-radii
    for (const double frac : {0.25, 0.5, 1.0}) {
        const double rr = frac * r;
        const rng::Stream sb = s.child(static_cast<std::uint64_t>(frac * 1000));
        double best = -num::kInf;
        const std::int64_t n_pairs = std::max<std::int64_t>(cfg.n_samples / 4, 128);
        for (std::int64_t i = 0; i < n_pairs; ++i) {
            const auto x = ball_point(m, sb, 2 * static_cast<std::uint64_t>(i), rr, origin);
            const auto y = ball_point(m, sb, 2 * static_cast<std::uint64_t>(i) + 1, rr, origin);
            try {
                best = std::max(best, onesided_ratio(m, x, y));
            } catch (const Error&) {
                continue;
            }
        }
        rep.fitted.emplace_back(rr, best);
        rep.sample_budget += n_pairs;
    }

    // pair-distance refinement: geometric shrink by 1/2 across 20 levels.
    // The best pair of the previous level is bisected (its two halves become
    // candidates), which tracks a point singularity along the segment; random
    // pairs at the level's separation keep exploring.
    const int levels = 20;
    std::vector<double> level_best(levels, -num::kInf);
    std::vector<double> wx, wy;               // overall best pair so far
    std::vector<double> prev_x, prev_y;       // best pair of the previous level
    const std::int64_t per_level = std::max<std::int64_t>(cfg.n_samples / 16, 64);
    for (int lv = 0; lv < levels; ++lv) {
        const double delta = r * std::pow(0.5, lv + 1);
        const rng::Stream sl = s.child(1000 + static_cast<std::uint64_t>(lv));
        std::vector<double> lvl_x, lvl_y;
        const auto consider = [&](const std::vector<double>& x, const std::vector<double>& y) {
            double v;
            try {
                v = onesided_ratio(m, x, y);
            } catch (const Error&) {
                return;
            }
            if (v > level_best[lv]) {
                level_best[lv] = v;
                lvl_x = x;
                lvl_y = y;
            }
        };
        if (!prev_x.empty()) {
            std::vector<double> mid(static_cast<std::size_t>(m.d));
            for (int k = 0; k < m.d; ++k) mid[k] = 0.5 * (prev_x[k] + prev_y[k]);
            consider(prev_x, mid);
            consider(mid, prev_y);
        }
        for (std::int64_t i = 0; i < per_level; ++i) {
            const auto mid = ball_point(m, sl, 2 * static_cast<std::uint64_t>(i), r, origin);
            const auto dir =
                radial::unit_direction(m.d, sl.u64_at(7777 + i), static_cast<std::uint64_t>(i));
            std::vector<double> x(mid), y(mid);
            for (int k = 0; k < m.d; ++k) {
                x[k] += 0.5 * delta * dir[k];
                y[k] -= 0.5 * delta * dir[k];
            }
            consider(x, y);
        }
        if (!lvl_x.empty()) {
            prev_x = lvl_x;
            prev_y = lvl_y;
            wx = lvl_x;
            wy = lvl_y;
        }
        rep.sample_budget += per_level;
    }
    // fitted log-slope across the last 5 levels with positive maxima
    std::vector<double> lx, ly;
    for (int lv = levels - 5; lv < levels; ++lv) {
        if (level_best[lv] > 0.0) {
            lx.push_back(std::log(1.0 / (r * std::pow(0.5, lv + 1))));
            ly.push_back(std::log(level_best[lv]));
        }
    }
    if (lx.size() == 5) {
        const auto fit = num::linear_fit(lx, ly);
        if (fit.slope > 0.5) {
            rep.status = Status::Violated;
            rep.witness = wx;
            rep.witness.insert(rep.witness.end(), wy.begin(), wy.end());
            rep.witness_value = level_best[levels - 1];
            rep.note = "one-sided ratio grows without bound under pair refinement (slope " +
                       num::format_g17(fit.slope) + "); " + kBanner;
        }
    }
    return rep;
}

AssumptionReport check_ellipticity(const ModelSpec& m, EllipticityRegion region, double R,
                                   const CheckConfig& cfg) {
    AssumptionReport rep;
    rep.id = region == EllipticityRegion::Ball ? "A4" : "A5";
    rep.note = kBanner;
    const rng::Stream s = rng::Stream::derive(cfg.seed, region == EllipticityRegion::Ball
                                                            ? 0xA40
                                                            : 0xA50);
    const double r_lo = region == EllipticityRegion::Ball ? 0.0 : m.r0;
    const double r_hi = region == EllipticityRegion::Ball ? m.r0 : std::max(R, 2.0 * m.r0);

    const auto clamp_region = [&](std::vector<double>& x) {
        double rr = 0.0;
        for (int k = 0; k < m.d; ++k) rr += (x[k] - m.x0[k]) * (x[k] - m.x0[k]);
        rr = std::sqrt(rr);
        double target = rr;
        if (rr < r_lo) target = r_lo;
        if (rr > r_hi) target = r_hi;
        if (target != rr && rr > 0.0) {
            for (int k = 0; k < m.d; ++k)
                x[k] = m.x0[k] + (x[k] - m.x0[k]) * (target / rr);
        }
    };

    double global_min = num::kInf;
    std::vector<double> argmin(static_cast<std::size_t>(m.d), 0.0);
    double scale = 0.0;

    // radial min-eigenvalue profile across the region
    const int levels = 8;
    const std::int64_t per_level = std::max<std::int64_t>(cfg.n_samples / levels, 64);
    for (int lv = 0; lv < levels; ++lv) {
        const double r_top = r_lo + (r_hi - r_lo) * (lv + 1) / levels;
        const double r_bot = r_lo + (r_hi - r_lo) * lv / levels;
        const rng::Stream sl = s.child(static_cast<std::uint64_t>(lv));
        double level_min = num::kInf;
        for (std::int64_t i = 0; i < per_level; ++i) {
            const auto dir =
                radial::unit_direction(m.d, sl.u64_at(2 * i), static_cast<std::uint64_t>(i));
            const double rr = r_bot + (r_top - r_bot) * sl.u01_at(2 * i + 1);
            std::vector<double> x(static_cast<std::size_t>(m.d));
            for (int k = 0; k < m.d; ++k) x[k] = m.x0[k] + rr * dir[k];
            double ev;
            try {
                ev = min_eig_sigma(m, x);
            } catch (const Error&) {
                continue;
            }
            scale = std::max(scale, std::fabs(ev));
            if (ev < level_min) level_min = ev;
            if (ev < global_min) {
                global_min = ev;
                argmin = x;
            }
        }
        rep.fitted.emplace_back(r_top, level_min);
        rep.sample_budget += per_level;
    }

    // local refinement of the sampled minimizer, constrained to the region
    double h = 0.1 * (r_hi - r_lo);
    double refined = global_min;
    std::vector<double> xa = argmin;
    for (int iter = 0; iter < 300 && h > 1e-14 * r_hi; ++iter) {
        bool improved = false;
        for (int k = 0; k < m.d && !improved; ++k) {
            for (const double sgn : {+1.0, -1.0}) {
                auto cand = xa;
                cand[k] += sgn * h;
                clamp_region(cand);
                double v;
                try {
                    v = min_eig_sigma(m, cand);
                } catch (const Error&) {
                    continue;
                }
                if (v < refined - 1e-18) {
                    refined = v;
                    xa = cand;
                    improved = true;
                    break;
                }
            }
        }
        if (!improved) h *= 0.5;
    }

    const double tol = std::max(1e-12, 1e-12 * scale);
    if (refined <= tol) {
        rep.status = Status::Violated;
        rep.witness = xa;
        rep.witness_value = refined;
        rep.note = "sigma sigma^T loses positive definiteness (min eigenvalue " +
                   num::format_g17(refined) + "); " + kBanner;
    }

    if (region == EllipticityRegion::Ball) {
        // Holder fit of |b(x)-b(y)| + |sigma sigma^T(x)-sigma sigma^T(y)|_HS on
        // the ball: reported only, never used downstream.
        const rng::Stream sh = s.child(0x401de7);
        std::vector<double> lx, ly;
        const std::int64_t n_pairs = std::max<std::int64_t>(cfg.n_samples / 4, 128);
        for (std::int64_t i = 0; i < n_pairs; ++i) {
            const auto x = ball_point(m, sh, 2 * static_cast<std::uint64_t>(i), m.r0,
                                      std::span<const double>(m.x0));
            const auto y = ball_point(m, sh, 2 * static_cast<std::uint64_t>(i) + 1, m.r0,
                                      std::span<const double>(m.x0));
            try {
                const auto bx = dsl::eval_drift(m, x);
                const auto by = dsl::eval_drift(m, y);
                double dist2 = 0.0, db2 = 0.0;
                for (int k = 0; k < m.d; ++k) {
                    dist2 += (x[k] - y[k]) * (x[k] - y[k]);
                    db2 += (bx[k] - by[k]) * (bx[k] - by[k]);
                }
                const auto sx = dsl::eval_diffusion(m, x);
                const auto sy = dsl::eval_diffusion(m, y);
                double da2 = 0.0;
                for (int i2 = 0; i2 < m.d; ++i2)
                    for (int j2 = 0; j2 < m.d; ++j2) {
                        double ax = 0.0, ay = 0.0;
                        for (int k = 0; k < m.n; ++k) {
                            ax += sx[static_cast<std::size_t>(i2) * m.n + k] *
                                  sx[static_cast<std::size_t>(j2) * m.n + k];
                            ay += sy[static_cast<std::size_t>(i2) * m.n + k] *
                                  sy[static_cast<std::size_t>(j2) * m.n + k];
                        }
                        da2 += (ax - ay) * (ax - ay);
                    }
                const double lhs = std::sqrt(db2) + std::sqrt(da2);
                if (lhs > 0.0 && dist2 > 0.0) {
                    lx.push_back(0.5 * std::log(dist2));
                    ly.push_back(std::log(lhs));
                }
            } catch (const Error&) {
                continue;
            }
        }
        if (lx.size() >= 16) {
            const auto fit = num::linear_fit(lx, ly);
            const double alpha_hat = std::clamp(fit.slope, 0.0, 1.0);
            double log_D = -num::kInf;
            for (std::size_t i = 0; i < lx.size(); ++i)
                log_D = std::max(log_D, ly[i] - alpha_hat * lx[i]);
            rep.fitted.emplace_back(-1.0, alpha_hat);      // level -1: Holder exponent
            rep.fitted.emplace_back(-2.0, std::exp(log_D)); // level -2: Holder constant
        }
    }
    return rep;
}

AssumptionReport check_local_bound(const ModelSpec& m, double r, const CheckConfig& cfg) {
    AssumptionReport rep;
    rep.id = "A1";
    rep.note = kBanner;
    const rng::Stream s = rng::Stream::derive(cfg.seed, 0xA1);
    const std::vector<double> origin(static_cast<std::size_t>(m.d), 0.0);

    const auto magnitude = [&](std::span<const double> x) {
        const auto b = dsl::eval_drift(m, x);
        const auto sg = dsl::eval_diffusion(m, x);
        double nb = 0.0;
        for (double v : b) nb += v * v;
        return std::sqrt(nb) + std::sqrt(hs_norm_sq(sg));
    };

    double best = -num::kInf;
    std::vector<double> arg(static_cast<std::size_t>(m.d), 0.0);
    for (std::int64_t i = 0; i < cfg.n_samples; ++i) {
        const auto x = ball_point(m, s, static_cast<std::uint64_t>(i), r, origin);
        try {
            const double v = magnitude(x);
            if (v > best) {
                best = v;
                arg = x;
            }
        } catch (const Error&) {
            rep.status = Status::Violated;
            rep.witness = x;
            rep.witness_value = num::kInf;
            rep.note = "non-finite coefficient evaluation; " + std::string(kBanner);
            rep.sample_budget = i + 1;
            return rep;
        }
    }
    rep.sample_budget = cfg.n_samples;
    rep.fitted.emplace_back(r, best);

    // ascend toward a potential blow-up; only a non-finite evaluation falsifies
    double h = 0.1 * r;
    std::vector<double> xa = arg;
    for (int iter = 0; iter < 4096 && h > 1e-308; ++iter) {
        bool improved = false;
        for (int k = 0; k < m.d && !improved; ++k) {
            for (int move = 0; move < 3 && !improved; ++move) {
                auto cand = xa;
                if (move < 2) {
                    cand[k] += (move == 0 ? +1.0 : -1.0) * h;
                } else {
                    // probe the coordinate hyperplane once the walk hugs it
                    if (!(std::fabs(xa[static_cast<std::size_t>(k)]) <= h)) continue;
                    cand[k] = 0.0;
                }
                double rad = 0.0;
                for (double c : cand) rad += c * c;
                if (rad > r * r) continue;
                double v;
                try {
                    v = magnitude(cand);
                } catch (const Error&) {
                    rep.status = Status::Violated;
                    rep.witness = cand;
                    rep.witness_value = num::kInf;
                    rep.note = "non-finite coefficient evaluation under refinement; " +
                               std::string(kBanner);
                    return rep;
                }
                if (v > best * (1.0 + 1e-12)) {
                    best = v;
                    xa = cand;
                    improved = true;
                }
            }
        }
        if (!improved) h *= 0.5;
    }
    rep.fitted.emplace_back(r, best);
    return rep;
}

std::vector<AssumptionReport> check_all(const ModelSpec& m, double R, const CheckConfig& cfg) {
    std::vector<AssumptionReport> out;
    out.push_back(check_local_bound(m, R, cfg));
    out.push_back(check_onesided(m, R, cfg));
    out.push_back(check_growth(m, R, cfg));
    out.push_back(check_ellipticity(m, EllipticityRegion::Ball, R, cfg));
    out.push_back(check_ellipticity(m, EllipticityRegion::Exterior, std::max(R, 2.0 * m.r0), cfg));
    return out;
}

std::string AssumptionReport::to_json() const {
    nlohmann::json j;
    j["assumption"] = id;
    j["status"] = to_string(status);
    j["witness"] = witness;
    j["witness_value"] = witness_value;
    j["sample_budget"] = sample_budget;
    nlohmann::json fit = nlohmann::json::array();
    for (const auto& [k, v] : fitted) fit.push_back({{"level", k}, {"value", v}});
    j["fitted"] = fit;
    j["note"] = note;
    return j.dump(2);
}

} // namespace diffcert::checks
