#include "diffcert/radial.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "diffcert/errors.hpp"
#include "diffcert/numerics.hpp"
#include "diffcert/rng.hpp"

namespace diffcert::radial {

double coeff_A(const ModelSpec& m, std::span<const double> x) {
    double s = 0.0;
    for (const auto& p : m.diffusion_prog) {
        const double v = p.eval_checked(x);
        s += v * v;
    }
    return 0.5 * s;
}

double coeff_B(const ModelSpec& m, std::span<const double> x) {
    double s = 0.0;
    for (int i = 0; i < m.d; ++i)
        s += (x[i] - m.x0[i]) * m.drift_prog[i].eval_checked(x);
    return s;
}

double coeff_C(const ModelSpec& m, std::span<const double> x) {
    double u2 = 0.0;
    for (int i = 0; i < m.d; ++i) u2 += (x[i] - m.x0[i]) * (x[i] - m.x0[i]);
    if (u2 == 0.0) throw PreconditionError("coeff_C is undefined at x = x0");
    // |sigma^T (x-x0)|^2 = sum_j (sum_i sigma_ij (x_i - x0_i))^2
    double num = 0.0;
    std::vector<double> sigma(static_cast<std::size_t>(m.d) * m.n);
    for (std::size_t k = 0; k < sigma.size(); ++k)
        sigma[k] = m.diffusion_prog[k].eval_checked(x);
    for (int j = 0; j < m.n; ++j) {
        double vj = 0.0;
        for (int i = 0; i < m.d; ++i)
            vj += sigma[static_cast<std::size_t>(i) * m.n + j] * (x[i] - m.x0[i]);
        num += vj * vj;
    }
    return num / u2;
}

std::vector<double> unit_direction(int d, std::uint64_t seed, std::uint64_t index) {
    const rng::Stream s = rng::Stream::derive(seed, 0xD12EC7);
    std::vector<double> u(static_cast<std::size_t>(d));
    for (;;) {
        double norm2 = 0.0;
        for (int i = 0; i < d; ++i) {
            u[i] = rng::normal_icdf(s.u01_at(index * static_cast<std::uint64_t>(d) + i));
            norm2 += u[i] * u[i];
        }
        if (norm2 > 1e-12) {
            const double inv = 1.0 / std::sqrt(norm2);
            for (double& v : u) v *= inv;
            return u;
        }
        index += 1u << 20; // essentially unreachable; re-key deterministically
    }
}

namespace {

struct SphereValues {
    double a, b, c;
};

SphereValues values_at(const ModelSpec& m, std::span<const double> x) {
    return {coeff_A(m, x), coeff_B(m, x), coeff_C(m, x)};
}

void check_positive_c(std::span<const double> x, double c) {
    if (!(c > 0.0))
        throw EllipticityError(std::vector<double>(x.begin(), x.end()), c,
                               "sigma sigma^T is not positive definite on the probed sphere "
                               "(C = " + num::format_g17(c) + ")");
}

double iota_ratio(const SphereValues& v) { return (2.0 * v.a - v.c + 2.0 * v.b) / v.c; }

std::vector<double> point_on_sphere(const ModelSpec& m, std::span<const double> dir, double r) {
    std::vector<double> x(static_cast<std::size_t>(m.d));
    for (int i = 0; i < m.d; ++i) x[i] = m.x0[i] + r * dir[i];
    return x;
}

/// Derivative-free descent over rotations of a point on the sphere.
/// objective(x) is minimized; rotations act in coordinate planes.
template <typename Objective>
double rotate_descent(const ModelSpec& m, std::vector<double>& dir, double r,
                      const Objective& objective, const SphereOptConfig& cfg,
                      double* last_step) {
    double best = objective(point_on_sphere(m, dir, r));
    if (m.d == 1) {
        if (last_step) *last_step = 0.0;
        return best;
    }
    double h = 0.25; // radians
    double residual = 0.0;
    for (int iter = 0; iter < cfg.n_refine && h > 1e-9; ++iter) {
        bool improved = false;
        for (int i = 0; i < m.d && !improved; ++i) {
            for (int j = i + 1; j < m.d && !improved; ++j) {
                for (const double sgn : {+1.0, -1.0}) {
                    std::vector<double> cand = dir;
                    const double cth = std::cos(sgn * h), sth = std::sin(sgn * h);
                    cand[i] = dir[i] * cth - dir[j] * sth;
                    cand[j] = dir[i] * sth + dir[j] * cth;
                    const double v = objective(point_on_sphere(m, cand, r));
                    if (v < best - cfg.tol * (1.0 + std::fabs(best))) {
                        residual = best - v;
                        best = v;
                        dir = std::move(cand);
                        improved = true;
                        break;
                    }
                }
            }
        }
        if (!improved) h *= 0.5;
    }
    if (last_step) *last_step = residual;
    return best;
}

template <typename Objective>
double sphere_extremum(const ModelSpec& m, double r, const SphereOptConfig& cfg,
                       const Objective& objective, SphereOptDiag* diag) {
    if (m.d == 1) {
        // Exact: the sphere is two points.
        std::vector<double> xp{m.x0[0] + r}, xm{m.x0[0] - r};
        const double vp = objective(xp), vm = objective(xm);
        if (diag) *diag = {2, 0.0};
        return std::min(vp, vm);
    }
    const int n = std::max(cfg.n_samples, 2);
    struct Cand {
        double value;
        std::uint64_t index;
    };
    std::vector<Cand> cands;
    cands.reserve(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        const auto dir = unit_direction(m.d, cfg.seed, static_cast<std::uint64_t>(k));
        cands.push_back({objective(point_on_sphere(m, dir, r)), static_cast<std::uint64_t>(k)});
    }
    std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
        if (a.value != b.value) return a.value < b.value;
        return a.index < b.index;
    });
    double best = cands.front().value;
    double residual = 0.0;
    const int k_refine = std::min<std::size_t>(cands.size(), static_cast<std::size_t>(cfg.top_k));
    for (int k = 0; k < k_refine; ++k) {
        auto dir = unit_direction(m.d, cfg.seed, cands[static_cast<std::size_t>(k)].index);
        double step = 0.0;
        const double v = rotate_descent(m, dir, r, objective, cfg, &step);
        if (v < best) {
            best = v;
            residual = step;
        }
    }
    if (diag) *diag = {n, residual};
    return best;
}

} // namespace

double gamma_at(const ModelSpec& m, double r, const SphereOptConfig& cfg, SphereOptDiag* diag) {
    const double v = sphere_extremum(m, r, cfg, [&m](std::span<const double> x) {
        const double c = coeff_C(m, x);
        check_positive_c(x, c);
        return c;
    }, diag);
    return v;
}

double iota_at(const ModelSpec& m, double r, const SphereOptConfig& cfg, SphereOptDiag* diag) {
    // Supremum as a minimization of the negated ratio.
    const double v = sphere_extremum(m, r, cfg, [&m](std::span<const double> x) {
        const SphereValues sv = values_at(m, x);
        check_positive_c(x, sv.c);
        return -iota_ratio(sv);
    }, diag);
    return -v;
}

RadialProfile build_profile_from(const std::shared_ptr<const ModelSpec>& m, double r_start,
                                 double Rmax, int M, const SphereOptConfig& cfg) {
    if (!m) throw PreconditionError("build_profile: null model");
    if (!(r_start > 0.0)) throw PreconditionError("build_profile: start radius must be positive");
    if (!(Rmax > r_start)) throw PreconditionError("build_profile: Rmax must exceed the start radius");
    if (M < 16) throw PreconditionError("build_profile: at least 16 nodes required");

    RadialProfile p;
    p.r0 = m->r0;
    p.Rmax = Rmax;
    p.model = m;
    p.cfg = cfg;
    p.r.resize(static_cast<std::size_t>(M));
    p.t.resize(static_cast<std::size_t>(M));
    p.gamma.resize(static_cast<std::size_t>(M));
    p.iota.resize(static_cast<std::size_t>(M));
    p.diag.resize(static_cast<std::size_t>(M));

    const double t0 = std::log(r_start), t1 = std::log(Rmax);
    for (int k = 0; k < M; ++k) {
        const double t = t0 + (t1 - t0) * k / (M - 1);
        p.t[static_cast<std::size_t>(k)] = t;
        p.r[static_cast<std::size_t>(k)] = std::exp(t);
    }
    p.r.front() = r_start;
    p.r.back() = Rmax;

    for (int k = 0; k < M; ++k) {
        const std::size_t i = static_cast<std::size_t>(k);
        SphereOptDiag dg{}, di{};
        p.gamma[i] = gamma_at(*m, p.r[i], cfg, &dg);
        p.iota[i] = iota_at(*m, p.r[i], cfg, &di);
        p.diag[i] = {dg.n_samples, std::max(dg.refine_residual, di.refine_residual)};
    }

    // I(r) = integral of iota(s)/s ds = integral of iota over t = ln s.
    p.I = num::cumulative_cubic(p.t, p.iota);
    return p;
}

RadialProfile build_profile(const std::shared_ptr<const ModelSpec>& m, double Rmax, int M,
                            const SphereOptConfig& cfg) {
    if (!m) throw PreconditionError("build_profile: null model");
    return build_profile_from(m, m->r0, Rmax, M, cfg);
}

std::string RadialProfile::to_csv() const {
    std::string out = "r,gamma,iota,I,opt_residual\n";
    for (std::size_t k = 0; k < r.size(); ++k) {
        out += num::format_g17(r[k]);
        out += ',';
        out += num::format_g17(gamma[k]);
        out += ',';
        out += num::format_g17(iota[k]);
        out += ',';
        out += num::format_g17(I[k]);
        out += ',';
        out += num::format_g17(diag[k].refine_residual);
        out += '\n';
    }
    return out;
}

std::uint64_t RadialProfile::checksum() const { return num::fnv1a64(to_csv()); }

} // namespace diffcert::radial
