#include "diffcert/model.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "diffcert/numerics.hpp"

namespace diffcert::dsl {

using nlohmann::json;

double ModelSpec::param(const std::string& key) const {
    for (std::size_t i = 0; i < param_names.size(); ++i)
        if (param_names[i] == key) return param_values[i];
    throw PreconditionError("model '" + name + "' has no parameter '" + key + "'");
}

bool ModelSpec::has_param(const std::string& key) const {
    return std::find(param_names.begin(), param_names.end(), key) != param_names.end();
}

ModelSpec make_model(std::string name, int d, int n, std::vector<double> x0, double r0,
                     const std::map<std::string, double>& params,
                     const std::vector<std::string>& drift_exprs,
                     const std::vector<std::vector<std::string>>& diffusion_exprs) {
    if (d < 1) throw PreconditionError("state dimension must be >= 1");
    if (n < 1) throw PreconditionError("noise dimension must be >= 1");
    if (!(r0 > 0.0)) throw PreconditionError("r0 must be positive");
    if (static_cast<int>(drift_exprs.size()) != d)
        throw PreconditionError("drift must have exactly d entries");
    if (static_cast<int>(diffusion_exprs.size()) != d)
        throw PreconditionError("diffusion must have exactly d rows");
    for (const auto& row : diffusion_exprs)
        if (static_cast<int>(row.size()) != n)
            throw PreconditionError("diffusion rows must have exactly n entries");
    if (x0.empty()) x0.assign(static_cast<std::size_t>(d), 0.0);
    if (static_cast<int>(x0.size()) != d)
        throw PreconditionError("x0 must have exactly d entries");

    ModelSpec m;
    m.name = std::move(name);
    m.d = d;
    m.n = n;
    m.x0 = std::move(x0);
    m.r0 = r0;
    for (const auto& [k, v] : params) {
        if (!std::isfinite(v))
            throw PreconditionError("parameter '" + k + "' is not finite");
        m.param_names.push_back(k);
        m.param_values.push_back(v);
    }

    for (const auto& s : drift_exprs)
        m.drift.push_back(parse_expr(s, d, m.param_names));
    for (const auto& row : diffusion_exprs)
        for (const auto& s : row)
            m.diffusion.push_back(parse_expr(s, d, m.param_names));

    for (const auto& e : m.drift)
        m.drift_prog.push_back(Program::compile(e, m.param_values, m.x0));
    for (const auto& e : m.diffusion)
        m.diffusion_prog.push_back(Program::compile(e, m.param_values, m.x0));
    return m;
}

namespace {

double need(const std::map<std::string, double>& p, const char* key) {
    const auto it = p.find(key);
    if (it == p.end())
        throw PreconditionError(std::string("catalog model needs parameter '") + key + "'");
    return it->second;
}

std::vector<std::vector<std::string>> identity_matrix(int d) {
    std::vector<std::vector<std::string>> rows(d, std::vector<std::string>(d, "0"));
    for (int i = 0; i < d; ++i) rows[i][i] = "1";
    return rows;
}

std::vector<std::vector<std::string>> scalar_matrix(int d, const std::string& s) {
    std::vector<std::vector<std::string>> rows(d, std::vector<std::string>(d, "0"));
    for (int i = 0; i < d; ++i) rows[i][i] = s;
    return rows;
}

} // namespace

ModelSpec catalog(const std::string& name, const std::map<std::string, double>& params) {
    if (name == "polynomial_drift") {
        const double K = need(params, "K");
        const double kappa = need(params, "kappa");
        const int d = static_cast<int>(params.count("d") ? params.at("d") : 1.0);
        std::vector<std::string> drift;
        for (int i = 1; i <= d; ++i)
            drift.push_back("-K*x" + std::to_string(i) + "*abs(x)^(kappa-1)");
        ModelSpec m = make_model("polynomial_drift", d, d, {}, 1.0,
                                 {{"K", K}, {"kappa", kappa}}, drift, identity_matrix(d));
        if (!(K > 0.0)) m.warnings.push_back("K should be positive");
        if (!(kappa > 1.0)) m.warnings.push_back("kappa should exceed 1 for a finite criterion");
        return m;
    }
    if (name == "oscillating_drift") {
        const double K = need(params, "K");
        const double kappa = need(params, "kappa");
        const double rho = need(params, "rho");
        ModelSpec m = make_model("oscillating_drift", 1, 1, {}, 1.0,
                                 {{"K", K}, {"kappa", kappa}, {"rho", rho}},
                                 {"-K*x1*abs(x)^(kappa-1)*(cos(x1)+rho)"}, {{"1"}});
        if (!(K > 0.0)) m.warnings.push_back("K should be positive");
        if (!(kappa > 1.0)) m.warnings.push_back("kappa should exceed 1 for a finite criterion");
        if (!(rho > 0.0)) m.warnings.push_back("rho should be positive");
        return m;
    }
    if (name == "langevin_tempered") {
        const double alpha = need(params, "alpha");
        const double beta = need(params, "beta");
        const double c = need(params, "c");
        const int d = static_cast<int>(params.count("d") ? params.at("d") : 1.0);
        std::vector<std::string> drift;
        for (int i = 1; i <= d; ++i)
            drift.push_back("-((1-2*beta)/(2*alpha))*c^(-2*beta)*x" + std::to_string(i) +
                            "*abs(x)^(2*beta/alpha-2)");
        ModelSpec m = make_model("langevin_tempered", d, d, {}, 2.0,
                                 {{"alpha", alpha}, {"beta", beta}, {"c", c}}, drift,
                                 scalar_matrix(d, "c^(-beta)*abs(x)^(beta/alpha)"));
        if (!(alpha > 0.0 && alpha < 1.0 / d))
            m.warnings.push_back("alpha should lie in (0, 1/d)");
        if (!(beta > 0.0 && beta < (1.0 + alpha * (2.0 - d)) / 2.0))
            m.warnings.push_back("beta should lie in (0, (1+alpha(2-d))/2)");
        if (!(c > 0.0)) m.warnings.push_back("c should be positive");
        return m;
    }
    throw PreconditionError("unknown catalog model '" + name + "'");
}

std::vector<double> eval_drift(const ModelSpec& m, std::span<const double> x) {
    std::vector<double> out(static_cast<std::size_t>(m.d));
    for (int i = 0; i < m.d; ++i) out[i] = m.drift_prog[i].eval_checked(x);
    return out;
}

std::vector<double> eval_diffusion(const ModelSpec& m, std::span<const double> x) {
    std::vector<double> out(static_cast<std::size_t>(m.d) * m.n);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = m.diffusion_prog[k].eval_checked(x);
    return out;
}

ModelSpec model_from_json(const std::string& text) {
    json j = json::parse(text);
    std::map<std::string, double> params;
    if (j.contains("params"))
        for (auto& [k, v] : j.at("params").items()) params[k] = v.get<double>();
    std::vector<std::string> drift = j.at("drift").get<std::vector<std::string>>();
    std::vector<std::vector<std::string>> diffusion =
        j.at("diffusion").get<std::vector<std::vector<std::string>>>();
    std::vector<double> x0;
    if (j.contains("x0")) x0 = j.at("x0").get<std::vector<double>>();
    return make_model(j.value("name", std::string("model")), j.at("d").get<int>(),
                      j.at("n").get<int>(), std::move(x0), j.at("r0").get<double>(), params,
                      drift, diffusion);
}

std::string model_to_json(const ModelSpec& m) {
    json j;
    j["name"] = m.name;
    j["d"] = m.d;
    j["n"] = m.n;
    j["x0"] = m.x0;
    j["r0"] = m.r0;
    json params = json::object();
    for (std::size_t i = 0; i < m.param_names.size(); ++i)
        params[m.param_names[i]] = m.param_values[i];
    j["params"] = params;
    json drift = json::array();
    for (const auto& e : m.drift) drift.push_back(e.pretty());
    j["drift"] = drift;
    json diffusion = json::array();
    for (int i = 0; i < m.d; ++i) {
        json row = json::array();
        for (int k = 0; k < m.n; ++k)
            row.push_back(m.diffusion[static_cast<std::size_t>(i) * m.n + k].pretty());
        diffusion.push_back(row);
    }
    j["diffusion"] = diffusion;
    return j.dump(2);
}

std::uint64_t model_checksum(const ModelSpec& m) {
    return num::fnv1a64(model_to_json(m));
}

} // namespace diffcert::dsl
