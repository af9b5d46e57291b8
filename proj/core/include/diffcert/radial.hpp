#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "diffcert/model.hpp"

namespace diffcert::radial {

using dsl::ModelSpec;

/// Pointwise coefficient functionals.
/// A(x)   = 1/2 Tr sigma sigma^T
/// B(x)   = <x - x0, b(x)>
/// C(x)   = |sigma(x)^T (x - x0)|^2 / |x - x0|^2,  x != x0
double coeff_A(const ModelSpec& m, std::span<const double> x);
double coeff_B(const ModelSpec& m, std::span<const double> x);
double coeff_C(const ModelSpec& m, std::span<const double> x);

struct SphereOptConfig {
    int n_samples = 64;    // directions per sphere (>= 2)
    int n_refine = 48;     // refinement iterations per candidate
    double tol = 1e-10;    // refinement tolerance on the objective
    std::uint64_t seed = 0x5EEDBA5E;
    int top_k = 8;         // candidates kept for local refinement
};

/// Diagnostics recorded per profile node.
struct SphereOptDiag {
    int n_samples = 0;
    double refine_residual = 0.0; // objective change in the last refinement step
};

/// Numerical infimum of C over the sphere |x-x0| = r. Exact two-point minimum
/// for d = 1; sampled directions plus on-sphere rotation descent otherwise.
/// Throws EllipticityError (with witness) if a non-positive C is found.
double gamma_at(const ModelSpec& m, double r, const SphereOptConfig& cfg,
                SphereOptDiag* diag = nullptr);

/// Numerical supremum of (2A - C + 2B)/C over the sphere |x-x0| = r.
double iota_at(const ModelSpec& m, double r, const SphereOptConfig& cfg,
               SphereOptDiag* diag = nullptr);

/// Radial envelopes tabulated on a log-spaced grid r0 = r[0] < ... < r[M-1] = Rmax.
/// I is the cumulative integral of iota(s)/s with I[0] = 0 exactly.
struct RadialProfile {
    double r0 = 1.0;
    double Rmax = 8.0;
    std::vector<double> r;     // radii
    std::vector<double> t;     // ln r
    std::vector<double> gamma; // > 0
    std::vector<double> iota;
    std::vector<double> I;
    std::vector<SphereOptDiag> diag;

    // Provenance: the model and sphere configuration the profile was built
    // from, so downstream consumers can extend the grid.
    std::shared_ptr<const ModelSpec> model;
    SphereOptConfig cfg;

    std::size_t size() const { return r.size(); }

    /// CSV dump with columns r, gamma, iota, I, opt_residual.
    std::string to_csv() const;
    std::uint64_t checksum() const;
};

/// Tabulates gamma, iota and I on a log-spaced grid of M nodes over [r0, Rmax].
RadialProfile build_profile(const std::shared_ptr<const ModelSpec>& m, double Rmax, int M,
                            const SphereOptConfig& cfg);

/// Same, with an explicit start radius (used by the escape-probability bound,
/// which integrates from r0 - eps).
RadialProfile build_profile_from(const std::shared_ptr<const ModelSpec>& m, double r_start,
                                 double Rmax, int M, const SphereOptConfig& cfg);

/// Deterministic unit direction k of a counter-based stream (normalized
/// Gaussian coordinates). Used for sphere sampling everywhere.
std::vector<double> unit_direction(int d, std::uint64_t seed, std::uint64_t index);

} // namespace diffcert::radial
