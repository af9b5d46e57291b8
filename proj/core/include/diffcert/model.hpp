#pragma once

#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "diffcert/expr.hpp"

namespace diffcert::dsl {

/// A diffusion model: drift b (d expressions), diffusion sigma (d x n grid of
/// expressions), a center x0 and radius r0, and a named parameter table.
/// Immutable after construction; evaluation is pure and thread-safe.
struct ModelSpec {
    std::string name;
    int d = 1;
    int n = 1;
    std::vector<double> x0;
    double r0 = 1.0;
    std::vector<std::string> param_names;
    std::vector<double> param_values;
    std::vector<Expr> drift;     // d entries
    std::vector<Expr> diffusion; // d*n entries, row-major
    std::vector<std::string> warnings;

    // Parameter-bound compiled programs, one per expression.
    std::vector<Program> drift_prog;
    std::vector<Program> diffusion_prog;

    double param(const std::string& key) const;
    bool has_param(const std::string& key) const;
};

/// Builds a ModelSpec from expression strings; parses, validates and compiles.
ModelSpec make_model(std::string name, int d, int n, std::vector<double> x0, double r0,
                     const std::map<std::string, double>& params,
                     const std::vector<std::string>& drift_exprs,
                     const std::vector<std::vector<std::string>>& diffusion_exprs);

/// Built-in model families:
///   polynomial_drift(K, kappa, d)   sigma = I_d,  b = -K x |x|^(kappa-1)
///   oscillating_drift(K, kappa, rho) d = 1, sigma = 1,
///                                    b = -K x |x|^(kappa-1) (cos x + rho)
///   langevin_tempered(alpha, beta, c, d)
///                                    sigma = c^-beta |x|^(beta/alpha) I_d,
///                                    b = -((1-2 beta)/(2 alpha)) c^-2beta x |x|^(2 beta/alpha - 2)
/// Out-of-range parameters are accepted with a warning recorded on the model.
ModelSpec catalog(const std::string& name, const std::map<std::string, double>& params);

/// Componentwise drift at x. Deterministic, pure; throws DomainError on
/// expression domain violations.
std::vector<double> eval_drift(const ModelSpec& m, std::span<const double> x);

/// Diffusion matrix at x, row-major d x n.
std::vector<double> eval_diffusion(const ModelSpec& m, std::span<const double> x);

/// Model file round trip: {name, d, n, x0, r0, params, drift, diffusion}.
ModelSpec model_from_json(const std::string& text);
std::string model_to_json(const ModelSpec& m);

/// Stable checksum of the canonical JSON form.
std::uint64_t model_checksum(const ModelSpec& m);

} // namespace diffcert::dsl
