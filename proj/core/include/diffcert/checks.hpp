#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "diffcert/model.hpp"

namespace diffcert::checks {

using dsl::ModelSpec;

enum class Status { NotFalsified, Violated };
const char* to_string(Status s);

/// Sample-based falsifier output. A falsifier can prove a violation (with a
/// reproducible witness) but can only report "not falsified" otherwise; the
/// assumptions are universally quantified and sampling cannot prove them.
struct AssumptionReport {
    std::string id;       // A1..A5
    Status status = Status::NotFalsified;
    std::vector<double> witness;         // point(s): single point or a pair flattened
    double witness_value = 0.0;          // the violating quantity
    std::int64_t sample_budget = 0;
    // fitted constants, meaning depends on the assumption
    std::vector<std::pair<double, double>> fitted; // (radius or level, value)
    std::string note;

    std::string to_json() const;
};

struct CheckConfig {
    std::int64_t n_samples = 4096;
    std::uint64_t seed = 0xA55E55;
};

/// (A3) linear growth: fits sup of (2<x,b> + |sigma|_HS^2)/(1+|x|^2) over
/// balls of doubling radius; VIOLATED when the per-level maxima grow with a
/// positive log-log slope.
AssumptionReport check_growth(const ModelSpec& m, double R, const CheckConfig& cfg);

/// (A2) one-sided Lipschitz on B_r: pair ratios with geometric pair-distance
/// refinement; VIOLATED when the fitted log-slope across the last shrink
/// levels exceeds 0.5.
AssumptionReport check_onesided(const ModelSpec& m, double r, const CheckConfig& cfg);

/// Probe region for the ellipticity falsifier: the A4 ball B_r0(x0) or the
/// A5 exterior annulus r0 <= |x-x0| <= R.
enum class EllipticityRegion { Ball, Exterior };

/// (A4)/(A5) ellipticity: minimum eigenvalue of sigma sigma^T over samples
/// (small-dimension symmetric eigensolve), refined around the sampled
/// minimizer within the chosen region. The Ball report additionally carries a
/// Holder fit of the coefficients on B_r0(x0) (reported, not asserted).
AssumptionReport check_ellipticity(const ModelSpec& m, EllipticityRegion region, double R,
                                   const CheckConfig& cfg);

/// (A1) local boundedness: maximum of |b| + |sigma|_HS over samples; VIOLATED
/// only when an evaluation is non-finite (domain error witnesses the blow-up).
AssumptionReport check_local_bound(const ModelSpec& m, double r, const CheckConfig& cfg);

std::vector<AssumptionReport> check_all(const ModelSpec& m, double R, const CheckConfig& cfg);

} // namespace diffcert::checks
