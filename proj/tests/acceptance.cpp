// Acceptance suite: runs the certifier end to end against closed forms,
// independent oracles and Monte Carlo cross-checks. One criterion per
// invocation (`acceptance N`) or all of them (`acceptance all`); prints one
// PASS/FAIL line per criterion and exits with the number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "diffcert/certify.hpp"
#include "diffcert/lyapunov.hpp"
#include "diffcert/model.hpp"
#include "diffcert/rng.hpp"
#include "diffcert/simulate.hpp"
#include "support/oracles.hpp"

using namespace diffcert;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + what;
        }
    }
    void note(const std::string& what) {
        detail += (detail.empty() ? "" : "; ") + what;
    }
};

std::shared_ptr<const dsl::ModelSpec> poly(double K, double kappa, int d = 1) {
    return std::make_shared<const dsl::ModelSpec>(dsl::catalog(
        "polynomial_drift", {{"K", K}, {"kappa", kappa}, {"d", static_cast<double>(d)}}));
}

std::shared_ptr<const dsl::ModelSpec> oscillating(double K, double kappa, double rho) {
    return std::make_shared<const dsl::ModelSpec>(
        dsl::catalog("oscillating_drift", {{"K", K}, {"kappa", kappa}, {"rho", rho}}));
}

std::shared_ptr<const dsl::ModelSpec> langevin(double alpha, double beta) {
    return std::make_shared<const dsl::ModelSpec>(dsl::catalog(
        "langevin_tempered", {{"alpha", alpha}, {"beta", beta}, {"c", 1.0}, {"d", 1.0}}));
}

struct LyapunovBundle {
    certify::Certificate cert;
    radial::RadialProfile profile;
    lyap::LyapunovFn L;
};

LyapunovBundle build_bundle(const std::shared_ptr<const dsl::ModelSpec>& m) {
    certify::CertifyConfig cfg;
    LyapunovBundle b;
    b.cert = certify::certify_model(m, cfg);
    if (b.cert.verdict != certify::Verdict::Finite)
        throw Error("expected a FINITE certificate for " + m->name);
    const int nodes = static_cast<int>(
        cfg.base_nodes * std::max(1.0, std::ceil(std::log(b.cert.Rmax / m->r0) / std::log(8.0))));
    b.profile = radial::build_profile(m, b.cert.Rmax, nodes, cfg.sphere);
    b.L = lyap::build_lyapunov(b.profile, b.cert, b.cert.r1);
    return b;
}

// --------------------------------------------------------------------------

Outcome criterion_1() {
    Outcome out;
    const auto m = poly(1, 2);
    const auto p = radial::build_profile(m, 8.0, 4096, {});
    double worst = 0.0;
    const std::size_t step = p.size() / 64;
    int checked = 0;
    for (std::size_t k = step; k < p.size(); k += step) {
        const double exact = oracles::poly_I(1, 2, 1, p.r[k]);
        worst = std::max(worst, std::fabs(p.I[k] - exact) / std::fabs(exact));
        ++checked;
    }
    out.require(checked >= 64 - 2, "need ~64 radii, got " + std::to_string(checked));
    out.require(worst <= 1e-6, "worst rel err " + num::format_g17(worst));
    out.note("max |I - closed form| rel = " + num::format_g17(worst));
    return out;
}

Outcome criterion_2() {
    Outcome out;
    const auto cert = certify::certify_model(langevin(0.2, 0.3), {});
    out.require(cert.verdict == certify::Verdict::Finite,
                std::string("verdict ") + certify::to_string(cert.verdict));
    const double rel = std::fabs(cert.lambda_est - 0.125) / 0.125;
    out.require(rel <= 1e-4, "lambda rel err " + num::format_g17(rel));
    out.note("lambda = " + num::format_g17(cert.lambda_est));
    return out;
}

struct SweepCase {
    std::string name;
    std::shared_ptr<const dsl::ModelSpec> model;
    certify::Verdict expected;
};

std::vector<SweepCase> sweep_grid() {
    return {
        {"Ex1 kappa=1.5", poly(1, 1.5), certify::Verdict::Finite},
        {"Ex1 kappa=2", poly(1, 2), certify::Verdict::Finite},
        {"Ex1 kappa=4", poly(1, 4), certify::Verdict::Finite},
        {"Ex1 kappa=1", poly(1, 1), certify::Verdict::Infinite},
        {"Ex2 kappa=1.5 rho=0.5", oscillating(1, 1.5, 0.5), certify::Verdict::Finite},
        {"Ex2 kappa=3 rho=0.5", oscillating(1, 3, 0.5), certify::Verdict::Finite},
        {"Ex3 (0.2,0.3)", langevin(0.2, 0.3), certify::Verdict::Finite},
        {"Ex3 (0.3,0.25)", langevin(0.3, 0.25), certify::Verdict::Infinite},
    };
}

Outcome criterion_3() {
    Outcome out;
    for (const auto& c : sweep_grid()) {
        const auto cert = certify::certify_model(c.model, {});
        if (cert.verdict != c.expected) {
            out.require(false, c.name + ": expected " +
                                   std::string(certify::to_string(c.expected)) + ", got " +
                                   certify::to_string(cert.verdict));
        }
    }
    if (!out.pass)
        out.note(
            "the oscillating-drift cells at rho=0.5 have outward-drift bands (cos x < -rho); "
            "the truncated criterion integral grows without bound across doublings "
            "(see the certificate trace), so the certifier reports INFINITE");
    return out;
}

Outcome criterion_4() {
    Outcome out;
    // Example 1 family: the inner integral decays too steeply at large radius
    // for a globally uniform log grid, so the independent oracle combines the
    // incomplete-gamma closed form of the inner integral with a 1-D
    // log-Riemann outer sum. Example 3 keeps the plain nested brute sum (its
    // integrands are powers, which the uniform grid resolves at every u).
    for (const double kappa : {1.5, 2.0, 4.0}) {
        const std::string name = "Ex1 kappa=" + num::format_g17(kappa);
        const auto cert = certify::certify_model(poly(1, kappa), {});
        if (cert.verdict != certify::Verdict::Finite) {
            out.require(false, name + " not FINITE");
            continue;
        }
        const double Rmax = kappa < 2 ? 1e5 : (kappa < 3 ? 1e3 : 30.0);
        const double oracle = oracles::poly_lambda_oracle(1, kappa, 1, Rmax, 20000);
        const double rel = std::fabs(cert.lambda_est - oracle) / oracle;
        out.require(rel <= 0.01, name + ": rel " + num::format_g17(rel));
        out.note(name + " lambda=" + num::format_g17(cert.lambda_est) + " oracle=" +
                 num::format_g17(oracle));
    }
    {
        const auto cert = certify::certify_model(langevin(0.2, 0.3), {});
        if (cert.verdict != certify::Verdict::Finite) {
            out.require(false, "Ex3 (0.2,0.3) not FINITE");
        } else {
            const double brute = oracles::lambda_brute(
                [](double v) { return oracles::langevin_I(0.2, 0.3, 2.0, v); },
                [](double v) { return oracles::langevin_gamma(1.0, 0.2, 0.3, v); }, 2.0, 1e4,
                10000, 10000);
            const double rel = std::fabs(cert.lambda_est - brute) / brute;
            out.require(rel <= 0.01, "Ex3 (0.2,0.3): rel " + num::format_g17(rel));
            out.note("Ex3 (0.2,0.3) lambda=" + num::format_g17(cert.lambda_est) + " brute=" +
                     num::format_g17(brute));
        }
    }
    return out;
}

Outcome criterion_5() {
    Outcome out;
    const auto m = poly(1, 2);
    const auto b = build_bundle(m);
    std::vector<double> witness;
    const auto [c1, c2] =
        lyap::lyapunov_constants(b.cert, *m, b.L, b.cert.r1, 4096, &witness);
    out.require(c1 == 1.0 / (2.0 * (b.cert.lambda_est + 1.0)), "c1 formula");

    lyap::DriftCheckConfig dc;
    dc.n_samples = 10000;
    const auto rep = lyap::drift_check(*m, b.L, c1, c2, b.cert.r1, dc);
    out.require(rep.pass, "drift check failed (max violation " +
                              num::format_g17(rep.max_violation) + ")");

    // radial generator <= -1/2 at sampled exterior points (numerical slack,
    // same convention as the drift check's PASS definition)
    double worst = -num::kInf;
    const rng::Stream s = rng::Stream::derive(0xAC5, 0);
    for (int i = 0; i < 2000; ++i) {
        const double r =
            b.cert.r1 + (b.L.rmax() * 0.95 - b.cert.r1) * s.u01_at(static_cast<std::uint64_t>(i));
        const double x[1] = {i % 2 == 0 ? r : -r};
        const double g = lyap::radial_generator(b.L, *m, x);
        worst = std::max(worst, g + 0.5 - 1e-8 * (1.0 + std::fabs(g)));
    }
    out.require(worst <= 0.0,
                "radial generator exceeded -1/2 by " + num::format_g17(worst));
    out.note("c1=" + num::format_g17(c1) + " c2=" + num::format_g17(c2));
    return out;
}

struct RationalField : lyap::ScalarField {
    // f(x) = 1/(1 + |x|^2): smooth with closed-form derivatives
    int d;
    explicit RationalField(int dd) : d(dd) {}
    double value(std::span<const double> x) const override {
        double s = 0;
        for (double v : x) s += v * v;
        return 1.0 / (1.0 + s);
    }
    void gradient(std::span<const double> x, std::span<double> g) const override {
        const double f = value(x);
        for (int i = 0; i < d; ++i) g[i] = -2.0 * x[i] * f * f;
    }
    void hessian(std::span<const double> x, std::span<double> h) const override {
        const double f = value(x);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                double v = 8.0 * x[i] * x[j] * f * f * f;
                if (i == j) v -= 2.0 * f * f;
                h[static_cast<std::size_t>(i) * d + j] = v;
            }
    }
};

double generator_fd_value_only(const dsl::ModelSpec& m, const lyap::ScalarField& f,
                               std::span<const double> x) {
    const int d = m.d;
    double nx = 0.0;
    for (double v : x) nx += v * v;
    const double h = 1e-5 * (1.0 + std::sqrt(nx));
    std::vector<double> g(static_cast<std::size_t>(d)), hess(static_cast<std::size_t>(d) * d);
    std::vector<double> q(x.begin(), x.end());
    for (int i = 0; i < d; ++i) {
        q[i] = x[i] + h;
        const double fp = f.value(q);
        q[i] = x[i] - h;
        const double fm = f.value(q);
        q[i] = x[i];
        g[i] = (fp - fm) / (2.0 * h);
        hess[static_cast<std::size_t>(i) * d + i] = (fp - 2.0 * f.value(x) + fm) / (h * h);
    }
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) {
            const auto at = [&](double si, double sj) {
                q[i] = x[i] + si * h;
                q[j] = x[j] + sj * h;
                const double v = f.value(q);
                q[i] = x[i];
                q[j] = x[j];
                return v;
            };
            const double mixed = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4 * h * h);
            hess[static_cast<std::size_t>(i) * d + j] = mixed;
            hess[static_cast<std::size_t>(j) * d + i] = mixed;
        }
    const auto b = dsl::eval_drift(m, x);
    const auto sg = dsl::eval_diffusion(m, x);
    double acc = 0.0;
    for (int i = 0; i < d; ++i) acc += b[i] * g[i];
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            double a_ij = 0.0;
            for (int k = 0; k < m.n; ++k)
                a_ij += sg[static_cast<std::size_t>(i) * m.n + k] *
                        sg[static_cast<std::size_t>(j) * m.n + k];
            acc += 0.5 * a_ij * hess[static_cast<std::size_t>(i) * d + j];
        }
    return acc;
}

Outcome criterion_6() {
    Outcome out;
    const std::vector<std::pair<std::string, std::shared_ptr<const dsl::ModelSpec>>> models = {
        {"Ex1", poly(1, 2)},
        {"Ex2", oscillating(1, 2, 0.5)},
        {"Ex3", langevin(0.2, 0.3)},
    };
    for (const auto& [name, m] : models) {
        const RationalField f(m->d);
        const rng::Stream s = rng::Stream::derive(0xFD, 0);
        double worst = 0.0;
        for (int i = 0; i < 100; ++i) {
            const double r = 1.2 + 4.0 * s.u01_at(2 * static_cast<std::uint64_t>(i));
            const double x[1] = {i % 2 == 0 ? r : -r};
            const double ga = lyap::apply_generator(*m, f, x);
            const double gf = generator_fd_value_only(*m, f, x);
            worst = std::max(worst, std::fabs(ga - gf) /
                                        std::max({std::fabs(ga), std::fabs(gf), 1e-9}));
        }
        out.require(worst <= 1e-5, name + " FD rel " + num::format_g17(worst));
    }
    // radial route vs generic route on the actual Lyapunov function
    for (const auto& m : {poly(1, 2), langevin(0.2, 0.3)}) {
        const auto b = build_bundle(m);
        const rng::Stream s = rng::Stream::derive(0xFD2, 0);
        double worst = 0.0;
        for (int i = 0; i < 1000; ++i) {
            const double r =
                b.cert.r1 + (b.L.rmax() - b.cert.r1) * s.u01_at(static_cast<std::uint64_t>(i));
            const double x[1] = {i % 2 == 0 ? r : -r};
            const double ga = lyap::apply_generator(*m, b.L, x);
            const double gr = lyap::radial_generator(b.L, *m, x);
            worst = std::max(worst, std::fabs(ga - gr) / std::max(std::fabs(gr), 1e-12));
        }
        out.require(worst <= 1e-7, m->name + " radial-vs-generic rel " + num::format_g17(worst));
    }
    return out;
}

sim::TVCurve run_criterion7_curve(std::uint64_t seed) {
    sim::SimConfig cfg;
    cfg.dt = 1e-3;
    cfg.checkpoints = {0.5, 1.0, 2.0, 4.0};
    cfg.n_paths = 200000;
    cfg.seed = seed;
    const auto m = poly(1, 2);
    return sim::uniform_tv_curve(
        *m, {{1.0}, {-1.0}, {3.0}, {-3.0}, {6.0}, {-6.0}}, std::vector<double>{0.0}, cfg);
}

Outcome criterion_7() {
    Outcome out;
    const auto curve = run_criterion7_curve(20250807);
    out.require(curve.valid, "run invalid (dropped paths)");
    for (std::size_t j = 1; j < curve.sup_tv.size(); ++j)
        out.require(curve.sup_tv[j] <= curve.sup_tv[j - 1] + 2.0 * curve.noise_floor,
                    "sup_tv increased at t=" + num::format_g17(curve.times[j]));
    out.require(curve.fit.ok, "rate fit refused");
    if (curve.fit.ok)
        out.require(curve.fit.beta_hat > 0.0,
                    "beta_hat = " + num::format_g17(curve.fit.beta_hat));
    std::string sup = "sup_tv =";
    for (double v : curve.sup_tv) sup += " " + num::format_g17(v);
    out.note(sup + "; beta_hat = " + num::format_g17(curve.fit.beta_hat) +
             "; floor = " + num::format_g17(curve.noise_floor));
    return out;
}

Outcome criterion_8() {
    Outcome out;
    const auto m = std::make_shared<const dsl::ModelSpec>(
        dsl::make_model("ou", 1, 1, {}, 1.0, {}, {"-x1"}, {{"1.4142135623730951"}}));
    const double tv1 = oracles::ou_tv(1.0, 0.0, 1.0);
    const double tv100 = oracles::ou_tv(100.0, 0.0, 1.0);
    out.require(tv100 - tv1 >= 0.6, "oracle contrast " + num::format_g17(tv100 - tv1));

    sim::SimConfig cfg;
    cfg.dt = 1e-3;
    cfg.checkpoints = {1.0};
    cfg.n_paths = 100000;
    cfg.seed = 808;
    const auto curve =
        sim::uniform_tv_curve(*m, {{1.0}, {100.0}}, std::vector<double>{0.0}, cfg);
    out.require(std::fabs(curve.tv[0][0] - tv1) <= 0.05,
                "x=1: mc " + num::format_g17(curve.tv[0][0]) + " vs oracle " +
                    num::format_g17(tv1));
    out.require(std::fabs(curve.tv[1][0] - tv100) <= 0.05,
                "x=100: mc " + num::format_g17(curve.tv[1][0]) + " vs oracle " +
                    num::format_g17(tv100));
    out.note("oracle tv(1)=" + num::format_g17(tv1) + " tv(100)=" + num::format_g17(tv100) +
             "; mc " + num::format_g17(curve.tv[0][0]) + " / " +
             num::format_g17(curve.tv[1][0]));
    return out;
}

Outcome criterion_9() {
    Outcome out;
    const auto m = poly(1, 2);
    sim::SimConfig cfg;
    cfg.dt = 1e-3;
    cfg.checkpoints = {10.0};
    cfg.n_paths = 10000;
    cfg.seed = 909;
    for (const double x0 : {2.0, 3.0, 5.0}) {
        const double x[1] = {x0};
        const auto h = sim::hitting_mc(*m, x, m->r0, 10.0, cfg);
        const double eb = lyap::escape_bound(*m, 0.5 * m->r0, 64.0, x);
        out.require(1.0 - h.p_hat <= eb + 3.0 * h.ci_half,
                    "x=" + num::format_g17(x0) + ": 1-p=" + num::format_g17(1.0 - h.p_hat) +
                        " bound=" + num::format_g17(eb));
        out.note("x=" + num::format_g17(x0) + " p_hit=" + num::format_g17(h.p_hat) +
                 " bound=" + num::format_g17(eb));
    }
    return out;
}

sim::TVCurve run_criterion10_curve(std::uint64_t seed) {
    sim::SimConfig cfg;
    cfg.dt = 5e-3;
    cfg.checkpoints = {0.5, 1.0, 2.0, 4.0};
    cfg.n_paths = 30000;
    cfg.seed = seed;
    sim::SubordinatorSpec st;
    st.kind = sim::SubordinatorSpec::Kind::Stable;
    st.alpha = 0.5;
    const auto m = poly(1, 2);
    return sim::subordinate_tv(*m, st, {{1.0}, {-1.0}, {3.0}, {-3.0}, {6.0}, {-6.0}},
                               std::vector<double>{0.0}, cfg, 64.0);
}

Outcome criterion_10() {
    Outcome out;
    // sampler check: E[e^{-S(1)}] = e^{-1} within 3 standard errors at 1e5 draws
    sim::SubordinatorSpec st;
    st.kind = sim::SubordinatorSpec::Kind::Stable;
    st.alpha = 0.5;
    const auto sp = sim::subordinator_paths(st, std::vector<double>{1.0}, 100000, 1010);
    double acc = 0, acc2 = 0;
    for (const auto& p : sp) {
        const double v = std::exp(-p[0]);
        acc += v;
        acc2 += v * v;
    }
    const double n = static_cast<double>(sp.size());
    const double mean = acc / n;
    const double se = std::sqrt((acc2 / n - mean * mean) / n);
    out.require(std::fabs(mean - std::exp(-1.0)) <= 3.0 * se,
                "Laplace identity: mean " + num::format_g17(mean) + " se " +
                    num::format_g17(se));

    const auto curve = run_criterion10_curve(1010);
    for (std::size_t j = 1; j < curve.sup_tv.size(); ++j)
        out.require(curve.sup_tv[j] <= curve.sup_tv[j - 1] + 2.0 * curve.noise_floor,
                    "subordinate sup_tv increased at t=" + num::format_g17(curve.times[j]));
    std::string sup = "sup_tv =";
    for (double v : curve.sup_tv) sup += " " + num::format_g17(v);
    out.note("E[e^-S]=" + num::format_g17(mean) + "; " + sup +
             "; capped=" + std::to_string(curve.capped_paths));
    return out;
}

Outcome criterion_11() {
    Outcome out;
    // criterion 2 artifact: certificate JSON
    const auto certA = certify::certificate_to_json(certify::certify_model(langevin(0.2, 0.3), {}));
    const auto certB = certify::certificate_to_json(certify::certify_model(langevin(0.2, 0.3), {}));
    out.require(certA == certB, "certificate JSON differs between reruns");

    // criterion 5 artifacts: lyapunov CSV + drift report
    const auto mk_drift = [&]() {
        const auto m = poly(1, 2);
        const auto b = build_bundle(m);
        const auto [c1, c2] = lyap::lyapunov_constants(b.cert, *m, b.L, b.cert.r1, 4096);
        lyap::DriftCheckConfig dc;
        dc.n_samples = 10000;
        return lyap::lyapunov_to_csv(b.L, *m) +
               lyap::drift_report_to_json(lyap::drift_check(*m, b.L, c1, c2, b.cert.r1, dc));
    };
    out.require(mk_drift() == mk_drift(), "lyapunov artifacts differ between reruns");

    // criterion 7 artifacts: TV curve CSVs and fit JSON
    const auto curveA = run_criterion7_curve(20250807);
    const auto curveB = run_criterion7_curve(20250807);
    out.require(curveA.curve_csv() == curveB.curve_csv() &&
                    curveA.sup_csv() == curveB.sup_csv() &&
                    curveA.fit_json() == curveB.fit_json(),
                "TV artifacts differ between reruns");
    return out;
}

struct Criterion {
    int id;
    const char* title;
    double budget_seconds;
    std::function<Outcome()> run;
};

const std::vector<Criterion>& criteria() {
    static const std::vector<Criterion> all = {
        {1, "closed-form I reproduction (Example 1)", 5.0, criterion_1},
        {2, "closed-form lambda (Example 3)", 10.0, criterion_2},
        {3, "verdict soundness sweep", 120.0, criterion_3},
        {4, "oracle equivalence for finite lambdas", 0.0, criterion_4},
        {5, "Lyapunov certificate (Example 1)", 30.0, criterion_5},
        {6, "generator consistency", 0.0, criterion_6},
        {7, "uniform TV decay (Example 1)", 300.0, criterion_7},
        {8, "non-uniform OU contrast", 120.0, criterion_8},
        {9, "hitting-bound consistency", 120.0, criterion_9},
        {10, "subordination", 300.0, criterion_10},
        {11, "determinism of criteria 2, 5, 7", 0.0, criterion_11},
    };
    return all;
}

int run_one(const Criterion& c) {
    const auto t0 = Clock::now();
    Outcome out;
    try {
        out = c.run();
    } catch (const std::exception& e) {
        out.pass = false;
        out.note(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    if (c.budget_seconds > 0.0 && secs > c.budget_seconds) {
        out.pass = false;
        out.note("runtime " + num::format_g17(secs) + " s exceeded the " +
                 num::format_g17(c.budget_seconds) + " s budget");
    }
    std::printf("[%s] criterion %d: %s (%.1f s)%s%s\n", out.pass ? "PASS" : "FAIL", c.id,
                c.title, secs, out.detail.empty() ? "" : " -- ", out.detail.c_str());
    std::fflush(stdout);
    return out.pass ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    int failures = 0;
    if (argc > 1 && std::strcmp(argv[1], "all") != 0) {
        const int want = std::atoi(argv[1]);
        for (const auto& c : criteria())
            if (c.id == want) return run_one(c);
        std::fprintf(stderr, "no criterion %d\n", want);
        return 64;
    }
    for (const auto& c : criteria()) failures += run_one(c);
    std::printf("%d of %zu criteria failed\n", failures, criteria().size());
    return failures;
}
