#pragma once

#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "diffcert/certify.hpp"
#include "diffcert/numerics.hpp"

namespace diffcert::lyap {

using certify::Certificate;
using dsl::ModelSpec;
using radial::RadialProfile;

/// A twice-differentiable scalar field the extended generator can act on.
struct ScalarField {
    virtual ~ScalarField() = default;
    virtual double value(std::span<const double> x) const = 0;
    virtual void gradient(std::span<const double> x, std::span<double> g) const = 0;
    /// Row-major d x d Hessian.
    virtual void hessian(std::span<const double> x, std::span<double> h) const = 0;
};

/// The explicit Lyapunov function of the certificate:
///   L(x) = Lbar(|x-x0|) + 1            for |x-x0| >= r1,
///   L(x) = quintic blend               on [0, r1] (C^2 at both ends,
///                                       zero slope and curvature at 0, value 1 at 0),
/// with Lbar(r) = int_{r0}^r e^{-I(u)} J(u) du tabulated on the profile grid.
/// Radial tables: lbar (monotone cubic in ln r), lbar1 = e^{-I} J (log-linear
/// in ln r), lbar2 = -iota lbar1 / r - 1/gamma (linear in ln r).
class LyapunovFn : public ScalarField {
public:
    double value(std::span<const double> x) const override;
    void gradient(std::span<const double> x, std::span<double> g) const override;
    void hessian(std::span<const double> x, std::span<double> h) const override;

    /// Radial evaluations of L (with the +1 offset), dL/dr, d^2L/dr^2.
    double radial_value(double r) const;
    double radial_d1(double r) const;
    double radial_d2(double r) const;

    /// Tabulated Lbar and derivatives on [r0, Rmax] (no blend, no offset).
    double lbar_at(double r) const;
    double lbar1_at(double r) const;
    double lbar2_at(double r) const;

    double r0() const { return r_.front(); }
    double r1() const { return r1_; }
    double rmax() const { return r_.back(); }
    double lambda() const { return lambda_; }
    int dimension() const { return d_; }
    std::span<const double> grid() const { return r_; }
    std::span<const double> lbar_table() const { return lbar_; }
    std::span<const double> lbar1_table() const { return lbar1_; }
    std::span<const double> lbar2_table() const { return lbar2_; }

    friend LyapunovFn build_lyapunov(const RadialProfile& p, const Certificate& cert, double r1);

private:
    std::vector<double> r_, t_, lbar_, log_lbar1_, lbar1_, lbar2_;
    num::CubicHermite lbar_interp_; // in t = ln r
    num::QuinticBlend blend_;
    std::vector<double> x0_;
    double r1_ = 0.0;
    double lambda_ = 0.0;
    int d_ = 1;
};

/// Builds the Lyapunov function from a profile and a FINITE certificate.
/// Refuses INFINITE / INCONCLUSIVE certificates.
LyapunovFn build_lyapunov(const RadialProfile& p, const Certificate& cert, double r1);

/// Extended generator: G f(x) = <b(x), grad f(x)> + 1/2 Tr(sigma sigma^T(x) hess f(x)).
double apply_generator(const ModelSpec& m, const ScalarField& f, std::span<const double> x);

/// The proof's radial form of G L at |x-x0| >= r1:
///   1/2 C(x) Lbar''(r) + Lbar'(r)/(2r) (2A(x) - C(x) + 2B(x)).
double radial_generator(const LyapunovFn& L, const ModelSpec& m, std::span<const double> x);

/// c1 = 1/(2(lambda+1)) from the certificate; c2 = max(0, sup of G L + c1 L)
/// over n_samples stratified points of the closed ball of radius r1, refined
/// locally around the sampled maximizer (recorded as witness).
std::pair<double, double> lyapunov_constants(const Certificate& cert, const ModelSpec& m,
                                             const LyapunovFn& L, double r1, int n_samples,
                                             std::vector<double>* witness = nullptr);

struct DriftCheckConfig {
    int n_samples = 10000;
    double R_test = 0.0; // 0: use the Lyapunov table range
    std::uint64_t seed = 0xD21F7C4E;
};

struct DriftCheckReport {
    bool pass = false;
    double max_violation = 0.0;
    std::vector<double> witness;
    double generator_at_witness = 0.0;
    double slack = 0.0;
    int n_samples = 0;
    double c1 = 0.0, c2 = 0.0, r1 = 0.0, R_test = 0.0;
};

/// Samples G L(x) + c1 L(x) - c2 1{|x-x0| <= r1} <= 0 over radius-stratified
/// points; PASS iff the maximal violation is within numerical slack.
DriftCheckReport drift_check(const ModelSpec& m, const LyapunovFn& L, double c1, double c2,
                             double r1, const DriftCheckConfig& cfg);

std::string drift_report_to_json(const DriftCheckReport& r);

/// Upper bound on the probability of never entering B_{r0}(x0) from x:
/// Lbar_esc(|x-x0|) / Lbar_esc(infinity) with Lbar_esc(r) = int_{r0-eps}^r e^{-I} du,
/// the denominator extrapolated past Rcap (0 when e^{-I} grows exponentially:
/// entry is then certain under the bound).
double escape_bound(const ModelSpec& m, double eps, double Rcap, std::span<const double> x,
                    const radial::SphereOptConfig& sphere = {}, int nodes = 4096);

/// CSV columns r, lbar, lbar1, lbar2, radial_generator_bound where the bound
/// column is the sampled supremum of G L over the sphere at that radius.
std::string lyapunov_to_csv(const LyapunovFn& L, const ModelSpec& m, int sphere_samples = 16);

} // namespace diffcert::lyap
