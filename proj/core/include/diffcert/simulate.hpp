#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "diffcert/model.hpp"

namespace diffcert::sim {

using dsl::ModelSpec;

struct SimConfig {
    double dt = 1e-3;
    std::vector<double> checkpoints; // strictly increasing, > 0
    std::int64_t n_paths = 10000;
    std::uint64_t seed = 1;
    double blowup_radius = 1e8; // overflow guard: paths beyond are dropped
};

/// Endpoint ensembles of Euler-Maruyama trajectories. states[j] holds the
/// j-th checkpoint as a dim-major matrix (d rows of n_paths values); alive[j]
/// masks paths that had not blown up by that checkpoint.
struct EnsembleResult {
    std::vector<double> times;
    std::vector<std::vector<double>> states;
    std::vector<std::vector<std::uint8_t>> alive;
    std::int64_t n_paths = 0;
    int d = 1;
    std::int64_t dropped = 0;
    bool valid = true; // dropped <= 0.1% of paths
    std::int64_t hits = 0;
    bool hitting_tracked = false;
};

struct EmOptions {
    bool track_hitting = false;
    double hit_radius = 0.0; // entry into B_radius(x0) counts as a hit
    /// Per-path step budgets for random-time-change runs: budgets[p][j] is the
    /// number of steps after which checkpoint j is recorded for path p
    /// (non-decreasing in j). Empty: fixed horizon from cfg.checkpoints.
    std::vector<std::vector<std::int64_t>> step_budgets;
};

/// Independent Euler-Maruyama trajectories with per-path counter-based noise
/// substreams derived from (cfg.seed, stream_id, path index). Results are
/// bit-identical for any worker count.
EnsembleResult em_ensemble(const ModelSpec& m, std::span<const double> x_init,
                           const SimConfig& cfg, std::uint64_t stream_id = 0,
                           const EmOptions& opt = {});

/// Sample matrix extracted from one checkpoint (alive paths only), dim-major.
struct SampleMatrix {
    std::vector<double> data;
    int d = 1;
    std::int64_t n = 0;
    std::span<const double> dim(int i) const {
        return {data.data() + static_cast<std::size_t>(i) * n, static_cast<std::size_t>(n)};
    }
};
SampleMatrix extract_sample(const EnsembleResult& e, std::size_t checkpoint);

struct TvConfig {
    int n_projections = 32;       // d > 3 fallback
    std::uint64_t proj_seed = 0xBEEF;
};

struct TvEstimate {
    double tv = 0.0;
    bool lower_bound = false; // projection estimator (d > 3)
    int bins = 0;
};

/// Histogram total-variation estimate between two samples of equal dimension.
/// d <= 3: common-bin histogram L1/2 with Freedman-Diaconis widths on the
/// pooled sample; d > 3: max over fixed random 1-d projections (a lower-bound
/// diagnostic, flagged in the result).
TvEstimate tv_estimate(const SampleMatrix& a, const SampleMatrix& b, const TvConfig& cfg = {});

/// Calibrated same-law noise floor of the histogram estimator (d <= 3),
/// per-sample-size; shipped from a calibration run against N(0,1) pairs.
double tv_noise_floor(std::int64_t n_samples, int d);

struct ExpFit {
    bool ok = false;
    double B_hat = 0.0;
    double beta_hat = 0.0;
    double residual = 0.0;
    int points_used = 0;
};

struct TVCurve {
    std::vector<double> times;
    std::vector<std::vector<double>> starts; // start points (d coords each)
    std::vector<std::vector<double>> tv;     // [start][time]
    std::vector<double> sup_tv;
    ExpFit fit;
    double noise_floor = 0.0;
    std::int64_t n_paths = 0;
    std::string estimator;
    std::int64_t dropped_total = 0;
    bool valid = true;
    std::uint64_t seed = 0;
    std::int64_t capped_paths = 0; // subordinated runs only
    std::string subordinator;      // empty for plain curves

    std::string curve_csv() const; // t, start_index, start coords, tv
    std::string sup_csv() const;   // t, sup_tv
    std::string fit_json() const;  // {B_hat, beta_hat, residual, ...}
};

/// Empirical TV decay proxy: sup over starts of TV(p(t,x,.), p(t,x_ref,.)),
/// with independent noise streams per start.
TVCurve uniform_tv_curve(const ModelSpec& m, const std::vector<std::vector<double>>& starts,
                         std::span<const double> x_ref, const SimConfig& cfg,
                         const TvConfig& tv_cfg = {});

/// Least squares of log sup_tv against t over points above the noise floor.
/// Refused (ok = false) with fewer than 3 usable points.
ExpFit fit_exponential(const TVCurve& curve);

struct HittingEstimate {
    double p_hat = 0.0;
    double ci_half = 0.0; // sqrt(p(1-p)/n) + 1/n
    std::int64_t n = 0;
    double T = 0.0;
};

/// Fraction of paths entering B_r0(x0) by time T (per-step crossing check).
HittingEstimate hitting_mc(const ModelSpec& m, std::span<const double> x, double r0, double T,
                           const SimConfig& cfg);

struct SubordinatorSpec {
    enum class Kind { Stable, CompoundPoisson, DriftCompound };
    Kind kind = Kind::Stable;
    double alpha = 0.5;     // stable index in (0,1)
    double rate = 1.0;      // Poisson rate
    double jump_mean = 1.0; // exponential jump mean
    double drift = 0.0;     // deterministic drift (DriftCompound)

    std::string describe() const;
};

/// Non-decreasing subordinator paths sampled at the given times; paths[p][j]
/// = S_p(times[j]), S(0) = 0.
std::vector<std::vector<double>> subordinator_paths(const SubordinatorSpec& s,
                                                    std::span<const double> times,
                                                    std::int64_t n_paths, std::uint64_t seed);

/// TV decay of the subordinate process X(S(t)): each path runs to its own
/// random horizon S(t_j) (same dt), capped at t_cap with the number of capped
/// paths reported.
TVCurve subordinate_tv(const ModelSpec& m, const SubordinatorSpec& s,
                       const std::vector<std::vector<double>>& starts,
                       std::span<const double> x_ref, const SimConfig& cfg,
                       double t_cap = 64.0, const TvConfig& tv_cfg = {});

/// Per-checkpoint mean and variance per coordinate, CSV formatted.
std::string ensemble_stats_csv(const EnsembleResult& e);

} // namespace diffcert::sim
