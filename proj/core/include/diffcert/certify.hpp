#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "diffcert/radial.hpp"

namespace diffcert::certify {

using radial::RadialProfile;

enum class Verdict { Finite, Infinite, Inconclusive };
const char* to_string(Verdict v);

enum class TailClass { Power, ExpDecay, ExpGrowth, Zero };
const char* to_string(TailClass c);

/// Fitted tail model of a positive integrand given as (r, log f(r)) samples.
struct TailFit {
    TailClass cls = TailClass::Zero;
    double slope = 0.0;        // power class: d log f / d log r
    double rate_b = 0.0;       // exp class: log f ~ a - b r^q (b < 0 means growth)
    double rate_q = 0.0;
    double residual = 0.0;     // RMS residual of the winning fit, log units
    bool divergent = false;    // tail integral of f does not converge
    double log_tail = -1e308;  // log of the extrapolated tail integral (if convergent)
};

/// Least-squares classification of a tail from >= 16 samples spanning at
/// least one decade in r. Power slope >= -1 or exponential growth flag the
/// tail as divergent.
TailFit classify_tail(std::span<const double> r, std::span<const double> log_f);

/// Log-domain integral machinery over a radial profile:
///   inner   J(u) = int_u^Rmax e^{I(v)} / gamma(v) dv  (+ fitted tail)
///   outer   Lambda(R) = int_{r0}^{R} e^{-I(u)} J(u) du
/// All sums are log-sum-exp; integrands that underflow or overflow e^{+-700}
/// stay representable.
class IntegralTables {
public:
    /// stride > 1 subsamples the profile (used for quadrature error estimates).
    static IntegralTables build(const RadialProfile& p, std::size_t stride = 1);

    /// log J(u), O(1) per query. Includes the fitted inner tail when convergent.
    double log_inner_at(double u) const;

    const TailFit& inner_tail() const { return inner_tail_; }
    const TailFit& outer_tail() const { return outer_tail_; }
    bool inner_divergent() const { return inner_tail_.divergent; }
    bool outer_divergent() const { return outer_tail_.divergent; }

    /// Truncated outer integral at Rmax.
    double partial_lambda() const;
    /// Truncated outer integral plus the fitted outer tail.
    double lambda_with_tail() const;
    /// Fraction of the truncated outer integral carried by the last decade.
    double last_decade_fraction() const;

    // Node tables consumed by the Lyapunov construction.
    std::span<const double> r() const { return r_; }
    std::span<const double> t() const { return t_; }
    std::span<const double> I() const { return I_; }
    std::span<const double> gamma() const { return gamma_; }
    std::span<const double> iota() const { return iota_; }
    std::span<const double> log_F() const { return log_F_; }       // log(e^{-I} J)
    std::span<const double> lbar() const { return lbar_; }          // cumulative outer
    double r0() const { return r_.front(); }
    double rmax() const { return r_.back(); }

private:
    std::vector<double> r_, t_, I_, gamma_, iota_;
    std::vector<double> log_inner_integrand_; // I - ln gamma
    std::vector<double> suffix_log_J_;        // truncated at Rmax
    std::vector<double> log_J_full_;          // suffix + tail
    std::vector<double> log_F_;               // -I + log J_full
    std::vector<double> prefix_log_lambda_;   // cumulative outer integral
    std::vector<double> lbar_;
    TailFit inner_tail_, outer_tail_;
};

struct CertifyConfig {
    double tol = 1e-4;          // relative tolerance on Lambda
    int max_doublings = 12;     // truncation doublings after the initial Rmax
    int base_nodes = 4096;      // grid nodes for the initial window [r0, 8 r0]
    double r1_factor = 2.0;     // petite-ball radius r1 = r1_factor * r0
    radial::SphereOptConfig sphere;
};

struct DoublingStep {
    double Rmax = 0.0;
    int nodes = 0;
    double partial_lambda = 0.0;
    double lambda_with_tail = 0.0;
    double last_decade_fraction = 0.0;
    double rel_err_est = 0.0;
    TailFit inner, outer;
};

struct Certificate {
    Verdict verdict = Verdict::Inconclusive;
    double lambda_est = 0.0; // +inf under an Infinite verdict
    double Rmax = 0.0;
    TailFit tail_inner, tail_outer;
    double rel_err_est = 0.0;
    std::optional<double> c1; // 1/(2(lambda+1)), present iff Finite
    std::optional<double> c2; // sampled drift-inequality constant (filled later)
    double r1 = 0.0;          // petite-ball radius, > r0
    double petite_radius = 0.0;
    std::vector<double> c2_witness;
    int c2_samples = 0;
    std::vector<DoublingStep> trace;
    CertifyConfig config;
    std::uint64_t profile_checksum = 0;
    std::string model_name;
    std::uint64_t model_checksum = 0;
};

/// Evaluates the integral criterion starting from the given profile, doubling
/// the truncation radius until the estimate stabilizes (Finite), divergence is
/// classified on two consecutive windows (Infinite), or the doubling budget is
/// exhausted (Inconclusive). Never fabricates a verdict.
Certificate lambda(const RadialProfile& p, const CertifyConfig& cfg);

/// Convenience entry: builds the initial profile at Rmax = 8 r0 and runs lambda.
Certificate certify_model(const std::shared_ptr<const dsl::ModelSpec>& m,
                          const CertifyConfig& cfg);

std::string certificate_to_json(const Certificate& c);

} // namespace diffcert::certify
