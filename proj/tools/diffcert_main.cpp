// diffcert: certifies uniform ergodicity of Ito diffusions via the radial
// integral criterion, builds the explicit Lyapunov certificate, and
// cross-validates with Monte Carlo total-variation decay, hitting
// probabilities and subordinated time changes.
//
// Exit codes: certify 0=FINITE 2=INFINITE 3=INCONCLUSIVE 1=error;
// lyapunov 0 iff the drift check passes; check-assumptions 0=not falsified
// 2=violated. Structured results go to files under --out; stdout is
// human-readable only.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "diffcert/certify.hpp"
#include "diffcert/checks.hpp"
#include "diffcert/io.hpp"
#include "diffcert/lyapunov.hpp"
#include "diffcert/model.hpp"
#include "diffcert/simulate.hpp"
#include "diffcert/threading.hpp"
#include "diffcert/version.hpp"

namespace {

using namespace diffcert;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct ModelOptions {
    std::string file;
    std::string catalog_name;
    std::vector<std::string> params;

    std::map<std::string, double> param_map() const {
        std::map<std::string, double> out;
        for (const auto& kv : params) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos)
                throw PreconditionError("--param expects name=value, got '" + kv + "'");
            out[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
        }
        return out;
    }
};

std::map<std::string, double> catalog_defaults(const std::string& name) {
    if (name == "polynomial_drift") return {{"K", 1.0}, {"kappa", 2.0}, {"d", 1.0}};
    if (name == "oscillating_drift") return {{"K", 1.0}, {"kappa", 2.0}, {"rho", 0.5}};
    if (name == "langevin_tempered")
        return {{"alpha", 0.2}, {"beta", 0.3}, {"c", 1.0}, {"d", 1.0}};
    return {};
}

std::shared_ptr<const dsl::ModelSpec> load_model(const ModelOptions& opt) {
    const auto overrides = opt.param_map();
    if (!opt.file.empty()) {
        auto m = dsl::model_from_json(io::read_file(opt.file));
        if (!overrides.empty()) {
            // flags override file values: rebuild with patched parameters
            json j = json::parse(dsl::model_to_json(m));
            for (const auto& [k, v] : overrides) j["params"][k] = v;
            m = dsl::model_from_json(j.dump());
        }
        return std::make_shared<const dsl::ModelSpec>(std::move(m));
    }
    if (!opt.catalog_name.empty()) {
        auto params = catalog_defaults(opt.catalog_name);
        for (const auto& [k, v] : overrides) params[k] = v;
        return std::make_shared<const dsl::ModelSpec>(dsl::catalog(opt.catalog_name, params));
    }
    throw PreconditionError("a model is required: --model FILE or --catalog NAME");
}

void print_warnings(const dsl::ModelSpec& m) {
    for (const auto& w : m.warnings)
        std::cerr << "warning: " << m.name << ": " << w << "\n";
}

std::vector<double> parse_point(const std::string& s, int d) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
    if (static_cast<int>(out.size()) != d)
        throw PreconditionError("point '" + s + "' does not match dimension " +
                                std::to_string(d));
    return out;
}

std::vector<std::vector<double>> parse_points(const std::string& s, int d) {
    std::vector<std::vector<double>> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ';'))
        if (!tok.empty()) out.push_back(parse_point(tok, d));
    return out;
}

std::vector<double> parse_times(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
    return out;
}

sim::SubordinatorSpec parse_subordinator(const std::string& s) {
    sim::SubordinatorSpec spec;
    const auto colon = s.find(':');
    const std::string kind = s.substr(0, colon);
    const std::string args = colon == std::string::npos ? "" : s.substr(colon + 1);
    std::vector<double> a;
    std::stringstream ss(args);
    std::string tok;
    while (std::getline(ss, tok, ',')) a.push_back(std::stod(tok));
    if (kind == "stable") {
        spec.kind = sim::SubordinatorSpec::Kind::Stable;
        if (!a.empty()) spec.alpha = a[0];
    } else if (kind == "cpois") {
        spec.kind = sim::SubordinatorSpec::Kind::CompoundPoisson;
        if (a.size() > 0) spec.rate = a[0];
        if (a.size() > 1) spec.jump_mean = a[1];
    } else if (kind == "drift") {
        spec.kind = sim::SubordinatorSpec::Kind::DriftCompound;
        if (a.size() > 0) spec.drift = a[0];
        if (a.size() > 1) spec.rate = a[1];
        if (a.size() > 2) spec.jump_mean = a[2];
    } else {
        throw PreconditionError("unknown subordinator '" + kind +
                                "' (expected stable:A | cpois:RATE,MEAN | drift:C,RATE,MEAN)");
    }
    return spec;
}

io::RunManifest make_manifest(const std::string& command, const dsl::ModelSpec& m,
                              std::uint64_t seed, const json& config) {
    io::RunManifest man;
    man.tool_version = kVersion;
    man.command = command;
    man.model_checksum = dsl::model_checksum(m);
    man.seed = seed;
    man.config_echo_json = config.dump();
    return man;
}

int run_certify(const ModelOptions& mopt, const std::string& out_dir, certify::CertifyConfig cfg) {
    const auto model = load_model(mopt);
    print_warnings(*model);
    const auto t0 = Clock::now();

    json echo = {{"tol", cfg.tol},
                 {"rmax_doublings", cfg.max_doublings},
                 {"nodes", cfg.base_nodes},
                 {"r1_factor", cfg.r1_factor},
                 {"seed", cfg.sphere.seed},
                 {"model", json::parse(dsl::model_to_json(*model))}};
    io::RunManifest man = make_manifest("certify", *model, cfg.sphere.seed, echo);

    certify::Certificate cert = certify::certify_model(model, cfg);
    man.stage_seconds.emplace_back("certify", seconds_since(t0));

    const double Rnodes = std::log(cert.Rmax / model->r0) / std::log(8.0);
    const radial::RadialProfile profile = radial::build_profile(
        model, cert.Rmax,
        static_cast<int>(cfg.base_nodes * std::max(1.0, std::ceil(Rnodes))), cfg.sphere);
    io::emit(man, out_dir, "profile.csv", profile.to_csv());
    io::emit(man, out_dir, "certificate.json", certify::certificate_to_json(cert));
    io::write_file((std::filesystem::path(out_dir) / "manifest.json").string(), man.to_json());

    std::cout << "model " << model->name << ": verdict " << certify::to_string(cert.verdict);
    if (cert.verdict == certify::Verdict::Finite)
        std::cout << ", lambda = " << num::format_g17(cert.lambda_est)
                  << ", c1 = " << num::format_g17(*cert.c1);
    std::cout << " (Rmax " << cert.Rmax << ", " << cert.trace.size() << " windows)\n";
    std::cout << "wrote " << out_dir << "/certificate.json, profile.csv, manifest.json\n";

    switch (cert.verdict) {
        case certify::Verdict::Finite: return 0;
        case certify::Verdict::Infinite: return 2;
        case certify::Verdict::Inconclusive: return 3;
    }
    return 1;
}

int run_lyapunov(const ModelOptions& mopt, const std::string& out_dir,
                 certify::CertifyConfig cfg, int c2_samples, int check_samples,
                 double r_test) {
    const auto model = load_model(mopt);
    print_warnings(*model);
    const auto t0 = Clock::now();

    json echo = {{"tol", cfg.tol},
                 {"nodes", cfg.base_nodes},
                 {"r1_factor", cfg.r1_factor},
                 {"c2_samples", c2_samples},
                 {"check_samples", check_samples},
                 {"model", json::parse(dsl::model_to_json(*model))}};
    io::RunManifest man = make_manifest("lyapunov", *model, cfg.sphere.seed, echo);

    certify::Certificate cert = certify::certify_model(model, cfg);
    man.stage_seconds.emplace_back("certify", seconds_since(t0));
    if (cert.verdict != certify::Verdict::Finite) {
        std::cerr << "cannot build a Lyapunov certificate: verdict is "
                  << certify::to_string(cert.verdict) << "\n";
        return 1;
    }

    const auto t1 = Clock::now();
    const double Rnodes = std::log(cert.Rmax / model->r0) / std::log(8.0);
    const radial::RadialProfile profile = radial::build_profile(
        model, cert.Rmax,
        static_cast<int>(cfg.base_nodes * std::max(1.0, std::ceil(Rnodes))), cfg.sphere);
    const lyap::LyapunovFn L = lyap::build_lyapunov(profile, cert, cert.r1);
    std::vector<double> witness;
    const auto [c1, c2] = lyap::lyapunov_constants(cert, *model, L, cert.r1, c2_samples, &witness);
    cert.c2 = c2;
    cert.c2_witness = witness;
    cert.c2_samples = c2_samples;
    man.stage_seconds.emplace_back("lyapunov_build", seconds_since(t1));

    const auto t2 = Clock::now();
    lyap::DriftCheckConfig dc;
    dc.n_samples = check_samples;
    dc.R_test = r_test;
    const lyap::DriftCheckReport rep = lyap::drift_check(*model, L, c1, c2, cert.r1, dc);
    man.stage_seconds.emplace_back("drift_check", seconds_since(t2));

    io::emit(man, out_dir, "certificate.json", certify::certificate_to_json(cert));
    io::emit(man, out_dir, "lyapunov.csv", lyap::lyapunov_to_csv(L, *model));
    io::emit(man, out_dir, "drift_report.json", lyap::drift_report_to_json(rep));
    io::write_file((std::filesystem::path(out_dir) / "manifest.json").string(), man.to_json());

    std::cout << "lambda = " << num::format_g17(cert.lambda_est)
              << ", c1 = " << num::format_g17(c1) << ", c2 = " << num::format_g17(c2)
              << ", r1 = " << num::format_g17(cert.r1) << "\n";
    std::cout << "drift check: " << (rep.pass ? "PASS" : "FAIL")
              << " (max violation " << num::format_g17(rep.max_violation) << " at "
              << rep.n_samples << " samples)\n";
    std::cout << "wrote " << out_dir << "/lyapunov.csv, drift_report.json\n";
    return rep.pass ? 0 : 1;
}

int run_simulate(const ModelOptions& mopt, const std::string& out_dir, const std::string& x_str,
                 sim::SimConfig cfg, bool hit, double eps_frac, double rcap) {
    const auto model = load_model(mopt);
    print_warnings(*model);
    const auto x0pt = parse_point(x_str, model->d);
    const auto t0 = Clock::now();

    json echo = {{"x", x0pt},          {"dt", cfg.dt},   {"checkpoints", cfg.checkpoints},
                 {"paths", cfg.n_paths}, {"seed", cfg.seed}, {"hit", hit}};
    io::RunManifest man = make_manifest("simulate", *model, cfg.seed, echo);

    const sim::EnsembleResult e = sim::em_ensemble(*model, x0pt, cfg);
    man.stage_seconds.emplace_back("simulate", seconds_since(t0));
    io::emit(man, out_dir, "ensemble_stats.csv", sim::ensemble_stats_csv(e));

    if (hit) {
        const double T = cfg.checkpoints.back();
        const sim::HittingEstimate h = sim::hitting_mc(*model, x0pt, model->r0, T, cfg);
        const double eb = lyap::escape_bound(*model, eps_frac * model->r0, rcap, x0pt);
        json hj = {{"p_hit", h.p_hat},
                   {"ci_half", h.ci_half},
                   {"n_paths", h.n},
                   {"T", h.T},
                   {"escape_bound", eb},
                   {"consistent", 1.0 - h.p_hat <= eb + 3.0 * h.ci_half}};
        io::emit(man, out_dir, "hitting.json", hj.dump(2));
        std::cout << "hitting probability " << h.p_hat << " +- " << h.ci_half
                  << ", escape bound " << eb << "\n";
    }
    io::write_file((std::filesystem::path(out_dir) / "manifest.json").string(), man.to_json());
    std::cout << "paths " << e.n_paths << ", dropped " << e.dropped
              << (e.valid ? "" : " (RUN INVALID: >0.1% dropped)") << "\n";
    std::cout << "wrote " << out_dir << "/ensemble_stats.csv\n";
    return e.valid ? 0 : 1;
}

int run_tv(const ModelOptions& mopt, const std::string& out_dir, const std::string& starts_str,
           const std::string& ref_str, sim::SimConfig cfg,
           const std::string& sub_str, double t_cap) {
    const auto model = load_model(mopt);
    print_warnings(*model);
    const auto starts = parse_points(starts_str, model->d);
    const auto ref = parse_point(ref_str, model->d);
    const auto t0 = Clock::now();

    json echo = {{"starts", starts},   {"ref", ref},       {"dt", cfg.dt},
                 {"checkpoints", cfg.checkpoints}, {"paths", cfg.n_paths}, {"seed", cfg.seed}};
    if (!sub_str.empty()) {
        echo["subordinator"] = sub_str;
        echo["t_cap"] = t_cap;
    }
    io::RunManifest man =
        make_manifest(sub_str.empty() ? "tv" : "subordinate", *model, cfg.seed, echo);

    sim::TVCurve curve;
    if (sub_str.empty()) {
        curve = sim::uniform_tv_curve(*model, starts, ref, cfg);
    } else {
        curve = sim::subordinate_tv(*model, parse_subordinator(sub_str), starts, ref, cfg, t_cap);
    }
    man.stage_seconds.emplace_back("tv", seconds_since(t0));

    io::emit(man, out_dir, "tv_curve.csv", curve.curve_csv());
    io::emit(man, out_dir, "tv_sup.csv", curve.sup_csv());
    io::emit(man, out_dir, "tv_fit.json", curve.fit_json());
    io::write_file((std::filesystem::path(out_dir) / "manifest.json").string(), man.to_json());

    std::cout << "sup TV:";
    for (std::size_t j = 0; j < curve.times.size(); ++j)
        std::cout << "  t=" << curve.times[j] << ": " << curve.sup_tv[j];
    std::cout << "\n";
    if (curve.fit.ok)
        std::cout << "fitted rate beta = " << curve.fit.beta_hat
                  << " (residual " << curve.fit.residual << ")\n";
    else
        std::cout << "rate fit refused (" << curve.fit.points_used
                  << " points above the noise floor)\n";
    std::cout << "wrote " << out_dir << "/tv_curve.csv, tv_sup.csv, tv_fit.json\n";
    return curve.valid ? 0 : 1;
}

int run_check(const ModelOptions& mopt, const std::string& out_dir, double radius,
              checks::CheckConfig cfg) {
    const auto model = load_model(mopt);
    print_warnings(*model);
    json echo = {{"radius", radius}, {"samples", cfg.n_samples}, {"seed", cfg.seed}};
    io::RunManifest man = make_manifest("check-assumptions", *model, cfg.seed, echo);

    const auto reports = checks::check_all(*model, radius, cfg);
    bool violated = false;
    std::string all = "[\n";
    for (std::size_t i = 0; i < reports.size(); ++i) {
        all += reports[i].to_json();
        if (i + 1 < reports.size()) all += ",";
        all += "\n";
        violated = violated || reports[i].status == checks::Status::Violated;
        std::cout << reports[i].id << ": " << checks::to_string(reports[i].status) << "\n";
    }
    all += "]\n";
    io::emit(man, out_dir, "assumptions.json", all);
    io::write_file((std::filesystem::path(out_dir) / "manifest.json").string(), man.to_json());
    std::cout << "wrote " << out_dir << "/assumptions.json\n";
    return violated ? 2 : 0;
}

int run_report(const std::string& run_dir) {
    std::string md = "# Run report\n\n";
    const auto add_json = [&](const std::string& name, const std::string& title) {
        const auto path = (std::filesystem::path(run_dir) / name).string();
        if (!std::filesystem::exists(path)) return;
        md += "## " + title + "\n\n```json\n" + io::read_file(path) + "\n```\n\n";
    };
    const auto mention_csv = [&](const std::string& name, const std::string& title) {
        const auto path = (std::filesystem::path(run_dir) / name).string();
        if (!std::filesystem::exists(path)) return;
        md += "## " + title + "\n\nSee [" + name + "](" + name + ").\n\n";
    };
    add_json("certificate.json", "Certificate");
    add_json("drift_report.json", "Drift check");
    add_json("tv_fit.json", "TV decay fit");
    add_json("hitting.json", "Hitting probability vs escape bound");
    add_json("assumptions.json", "Assumption checks");
    mention_csv("profile.csv", "Radial profile");
    mention_csv("lyapunov.csv", "Lyapunov tables");
    mention_csv("tv_sup.csv", "Sup TV curve");
    mention_csv("tv_curve.csv", "Per-start TV curves");
    mention_csv("ensemble_stats.csv", "Ensemble statistics");
    add_json("manifest.json", "Manifest");
    const auto out = (std::filesystem::path(run_dir) / "report.md").string();
    io::write_file(out, md);
    std::cout << "wrote " << out << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"uniform-ergodicity certifier and simulation harness for Ito diffusions"};
    app.require_subcommand(1);

    std::string out_dir = "out";
    unsigned workers = 0;
    app.add_option("--out", out_dir, "output directory")->capture_default_str();
    app.add_option("--workers", workers, "worker thread cap (0 = all cores)");

    ModelOptions mopt;
    const auto add_model_opts = [&](CLI::App* sub) {
        sub->add_option("--model", mopt.file, "model JSON file");
        sub->add_option("--catalog", mopt.catalog_name,
                        "catalog model: polynomial_drift | oscillating_drift | langevin_tempered");
        sub->add_option("--param", mopt.params, "parameter override name=value (repeatable)");
    };

    certify::CertifyConfig ccfg;
    auto* certify_cmd = app.add_subcommand("certify", "evaluate the integral criterion");
    add_model_opts(certify_cmd);
    certify_cmd->add_option("--tol", ccfg.tol, "relative tolerance on lambda")
        ->capture_default_str();
    certify_cmd->add_option("--rmax-doublings", ccfg.max_doublings, "truncation doubling budget")
        ->capture_default_str();
    certify_cmd->add_option("--nodes", ccfg.base_nodes, "grid nodes per initial window")
        ->capture_default_str();
    certify_cmd->add_option("--r1-factor", ccfg.r1_factor, "petite-ball radius factor")
        ->capture_default_str();
    certify_cmd->add_option("--seed", ccfg.sphere.seed, "sphere-sampling seed");

    int c2_samples = 4096, check_samples = 10000;
    double r_test = 0.0;
    auto* lyap_cmd =
        app.add_subcommand("lyapunov", "build the Lyapunov function and verify the drift bound");
    add_model_opts(lyap_cmd);
    lyap_cmd->add_option("--tol", ccfg.tol, "certify tolerance")->capture_default_str();
    lyap_cmd->add_option("--nodes", ccfg.base_nodes, "grid nodes")->capture_default_str();
    lyap_cmd->add_option("--r1-factor", ccfg.r1_factor, "petite-ball radius factor")
        ->capture_default_str();
    lyap_cmd->add_option("--c2-samples", c2_samples, "samples for the c2 supremum")
        ->capture_default_str();
    lyap_cmd->add_option("--check-samples", check_samples, "drift-check samples")
        ->capture_default_str();
    lyap_cmd->add_option("--rtest", r_test, "drift-check radius (0: table range)");
    lyap_cmd->add_option("--seed", ccfg.sphere.seed, "sphere-sampling seed");

    sim::SimConfig scfg;
    std::string x_str = "2", starts_str, ref_str = "0", t_str = "1", sub_str;
    bool hit = false;
    double eps_frac = 0.5, rcap = 64.0, t_cap = 64.0;

    auto* sim_cmd = app.add_subcommand("simulate", "Euler-Maruyama ensembles");
    add_model_opts(sim_cmd);
    sim_cmd->add_option("--x", x_str, "start point (comma-separated)")->capture_default_str();
    sim_cmd->add_option("--dt", scfg.dt, "step size")->capture_default_str();
    sim_cmd->add_option("--t", t_str, "checkpoint times, comma-separated")->capture_default_str();
    sim_cmd->add_option("--paths", scfg.n_paths, "ensemble size")->capture_default_str();
    sim_cmd->add_option("--seed", scfg.seed, "master seed")->capture_default_str();
    sim_cmd->add_flag("--hit", hit, "track entry into B_r0(x0) and compare the escape bound");
    sim_cmd->add_option("--eps-frac", eps_frac, "escape-bound eps as a fraction of r0")
        ->capture_default_str();
    sim_cmd->add_option("--rcap", rcap, "escape-bound truncation radius")->capture_default_str();

    auto* tv_cmd = app.add_subcommand("tv", "empirical total-variation decay over a start grid");
    add_model_opts(tv_cmd);
    tv_cmd->add_option("--starts", starts_str, "start points 'x;y;z' (coords comma-separated)")
        ->required();
    tv_cmd->add_option("--ref", ref_str, "reference start point")->capture_default_str();
    tv_cmd->add_option("--dt", scfg.dt, "step size")->capture_default_str();
    tv_cmd->add_option("--t", t_str, "checkpoint times")->capture_default_str();
    tv_cmd->add_option("--paths", scfg.n_paths, "paths per start")->capture_default_str();
    tv_cmd->add_option("--seed", scfg.seed, "master seed")->capture_default_str();

    auto* sub_cmd = app.add_subcommand("subordinate", "TV decay of the time-changed process");
    add_model_opts(sub_cmd);
    sub_cmd->add_option("--starts", starts_str, "start points")->required();
    sub_cmd->add_option("--ref", ref_str, "reference start point")->capture_default_str();
    sub_cmd->add_option("--dt", scfg.dt, "step size")->capture_default_str();
    sub_cmd->add_option("--t", t_str, "checkpoint times")->capture_default_str();
    sub_cmd->add_option("--paths", scfg.n_paths, "paths per start")->capture_default_str();
    sub_cmd->add_option("--seed", scfg.seed, "master seed")->capture_default_str();
    sub_cmd->add_option("--sub", sub_str, "subordinator: stable:A | cpois:RATE,MEAN | drift:C,RATE,MEAN")
        ->required();
    sub_cmd->add_option("--t-cap", t_cap, "horizon cap for random time changes")
        ->capture_default_str();

    double check_radius = 4.0;
    checks::CheckConfig kcfg;
    auto* check_cmd = app.add_subcommand("check-assumptions", "sample-based falsifiers");
    add_model_opts(check_cmd);
    check_cmd->add_option("--radius", check_radius, "probe radius")->capture_default_str();
    check_cmd->add_option("--samples", kcfg.n_samples, "sample budget per check")
        ->capture_default_str();
    check_cmd->add_option("--seed", kcfg.seed, "sampling seed");

    std::string run_dir;
    auto* report_cmd = app.add_subcommand("report", "combine run outputs into a markdown summary");
    report_cmd->add_option("--run", run_dir, "run directory")->required();

    CLI11_PARSE(app, argc, argv);
    set_worker_count(workers);

    try {
        if (app.got_subcommand(certify_cmd)) return run_certify(mopt, out_dir, ccfg);
        if (app.got_subcommand(lyap_cmd))
            return run_lyapunov(mopt, out_dir, ccfg, c2_samples, check_samples, r_test);
        if (app.got_subcommand(sim_cmd)) {
            scfg.checkpoints = parse_times(t_str);
            return run_simulate(mopt, out_dir, x_str, scfg, hit, eps_frac, rcap);
        }
        if (app.got_subcommand(tv_cmd)) {
            scfg.checkpoints = parse_times(t_str);
            return run_tv(mopt, out_dir, starts_str, ref_str, scfg, "", 0.0);
        }
        if (app.got_subcommand(sub_cmd)) {
            scfg.checkpoints = parse_times(t_str);
            return run_tv(mopt, out_dir, starts_str, ref_str, scfg, sub_str, t_cap);
        }
        if (app.got_subcommand(check_cmd))
            return run_check(mopt, out_dir, check_radius, kcfg);
        if (app.got_subcommand(report_cmd)) return run_report(run_dir);
    } catch (const EllipticityError& e) {
        json err = {{"error", "ellipticity"}, {"message", e.what()}, {"witness", e.witness()},
                    {"value", e.value()}};
        std::cerr << err.dump(2) << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
