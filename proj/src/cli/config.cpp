#include "infobound/cli/config.hpp"

#include "infobound/errors.hpp"
#include "infobound/zoo.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <set>

namespace infobound::cli {

namespace {

void allow_only(const json& obj, const std::string& where, std::initializer_list<const char*> keys) {
    if (!obj.is_object()) throw ConfigError(where + " must be an object");
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key())) throw ConfigError("unknown key '" + it.key() + "' in " + where);
}

double get_number(const json& v, const std::string& name) {
    if (!v.is_number()) throw ConfigError(name + " must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(name + " must be finite");
    return x;
}

std::uint64_t get_unsigned(const json& v, const std::string& name) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
    throw ConfigError(name + " must be a non-negative integer");
}

std::string get_string(const json& v, const std::string& name) {
    if (!v.is_string()) throw ConfigError(name + " must be a string");
    return v.get<std::string>();
}

std::vector<double> get_vector(const json& v, const std::string& name) {
    if (v.is_number()) return {get_number(v, name)};
    if (!v.is_array()) throw ConfigError(name + " must be a number or an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) out.push_back(get_number(e, name));
    if (out.empty()) throw ConfigError(name + " must not be empty");
    return out;
}

template <class T>
T number_or(const json& obj, const char* key, T fallback, const std::string& where) {
    if (!obj.contains(key)) return fallback;
    if constexpr (std::is_floating_point_v<T>)
        return get_number(obj.at(key), where + "." + key);
    else
        return static_cast<T>(get_unsigned(obj.at(key), where + "." + key));
}

std::optional<ParameterSpace> interval_from(const json& p, int default_grid, const std::string& where) {
    if (!p.contains("lower") && !p.contains("upper") && !p.contains("grid")) return std::nullopt;
    const double lo = number_or(p, "lower", 0.0, where);
    const double hi = number_or(p, "upper", 1.0, where);
    const int grid = number_or(p, "grid", default_grid, where);
    return ParameterSpace::interval(lo, hi, grid);
}

Normalization parse_normalization(const json& v) {
    const auto s = get_string(v, "prior.normalization");
    if (s == "on_grid") return Normalization::OnGrid;
    if (s == "as_given") return Normalization::AsGiven;
    throw ConfigError("prior.normalization must be on_grid or as_given");
}

std::vector<std::vector<double>> parse_theta_grid(const json& v) {
    std::vector<std::vector<double>> out;
    if (v.is_object()) {
        allow_only(v, "theta_grid", {"lower", "upper", "step"});
        if (!v.contains("lower") || !v.contains("upper") || !v.contains("step"))
            throw ConfigError("theta_grid needs lower, upper and step");
        const double lo = get_number(v.at("lower"), "theta_grid.lower");
        const double hi = get_number(v.at("upper"), "theta_grid.upper");
        const double step = get_number(v.at("step"), "theta_grid.step");
        if (step <= 0.0 || hi < lo) throw ConfigError("theta_grid needs lower <= upper and step > 0");
        const auto count = static_cast<long>(std::floor((hi - lo) / step + 1e-9)) + 1;
        for (long i = 0; i < count; ++i) out.push_back({lo + static_cast<double>(i) * step});
        return out;
    }
    if (!v.is_array()) throw ConfigError("theta_grid must be an array or {lower, upper, step}");
    for (const auto& e : v) out.push_back(get_vector(e, "theta_grid entry"));
    return out;
}

}  // namespace

ExperimentConfig parse_config(const json& doc) {
    allow_only(doc, "config",
               {"model_id", "model_params", "prior", "theta", "theta_grid", "bounds", "bias", "bias_jacobian",
                "barankin", "mc", "sweep", "numerics", "output"});
    ExperimentConfig cfg;
    if (doc.contains("model_id")) cfg.model.id = get_string(doc.at("model_id"), "model_id");
    if (doc.contains("model_params")) {
        if (!doc.at("model_params").is_object()) throw ConfigError("model_params must be an object");
        cfg.model.params = doc.at("model_params");
    }
    if (doc.contains("prior")) {
        const auto& p = doc.at("prior");
        allow_only(p, "prior", {"id", "a", "b", "c", "mean", "sd", "normalization"});
        if (p.contains("id")) cfg.prior.id = get_string(p.at("id"), "prior.id");
        cfg.prior.a = number_or(p, "a", cfg.prior.a, "prior");
        cfg.prior.b = number_or(p, "b", cfg.prior.b, "prior");
        cfg.prior.c = number_or(p, "c", cfg.prior.c, "prior");
        if (p.contains("mean")) cfg.prior.mean = get_vector(p.at("mean"), "prior.mean");
        if (p.contains("sd")) cfg.prior.sd = get_vector(p.at("sd"), "prior.sd");
        if (p.contains("normalization")) cfg.prior.normalization = parse_normalization(p.at("normalization"));
        static const std::set<std::string> priors{"uniform", "constant", "beta", "gaussian"};
        if (!priors.count(cfg.prior.id)) throw ConfigError("unknown prior '" + cfg.prior.id + "'");
    }
    if (doc.contains("theta")) cfg.theta = get_vector(doc.at("theta"), "theta");
    if (doc.contains("theta_grid")) cfg.theta_grid = parse_theta_grid(doc.at("theta_grid"));
    if (doc.contains("bounds")) {
        cfg.bounds_given = true;
        if (!doc.at("bounds").is_array()) throw ConfigError("bounds must be an array of names");
        for (const auto& b : doc.at("bounds")) {
            const auto name = get_string(b, "bounds entry");
            const auto kind = bound_kind_from_string(name);
            if (!kind) throw ConfigError("unknown bound '" + name + "'");
            cfg.bounds.push_back(*kind);
        }
    }
    if (doc.contains("bias")) {
        cfg.bias = get_string(doc.at("bias"), "bias");
        try {
            (void)EstimatorSpec::parse(*cfg.bias);
        } catch (const Error& e) {
            throw ConfigError(std::string("bias: ") + e.what());
        }
    }
    if (doc.contains("bias_jacobian")) {
        const auto s = get_string(doc.at("bias_jacobian"), "bias_jacobian");
        if (s == "diagonal")
            cfg.bias_jacobian = BiasJacobianMode::Diagonal;
        else if (s == "full")
            cfg.bias_jacobian = BiasJacobianMode::Full;
        else
            throw ConfigError("bias_jacobian must be diagonal or full");
    }
    if (doc.contains("barankin")) {
        const auto& b = doc.at("barankin");
        allow_only(b, "barankin", {"n_max", "restarts", "grid_points", "seed", "max_sweeps"});
        cfg.barankin.n_max = number_or(b, "n_max", cfg.barankin.n_max, "barankin");
        cfg.barankin.restarts = number_or(b, "restarts", cfg.barankin.restarts, "barankin");
        cfg.barankin.grid_points = number_or(b, "grid_points", cfg.barankin.grid_points, "barankin");
        cfg.barankin.seed = number_or(b, "seed", cfg.barankin.seed, "barankin");
        cfg.barankin.max_sweeps = number_or(b, "max_sweeps", cfg.barankin.max_sweeps, "barankin");
        if (cfg.barankin.n_max < 1 || cfg.barankin.restarts < 1 || cfg.barankin.grid_points < 3)
            throw ConfigError("barankin needs n_max >= 1, restarts >= 1, grid_points >= 3");
    }
    if (doc.contains("mc")) {
        const auto& m = doc.at("mc");
        allow_only(m, "mc", {"trials", "obs_per_trial", "seed", "estimator"});
        cfg.mc.trials = number_or(m, "trials", cfg.mc.trials, "mc");
        cfg.mc.obs_per_trial = number_or(m, "obs_per_trial", cfg.mc.obs_per_trial, "mc");
        if (m.contains("seed")) cfg.mc.seed = get_unsigned(m.at("seed"), "mc.seed");
        if (m.contains("estimator")) cfg.mc.estimator = get_string(m.at("estimator"), "mc.estimator");
        if (cfg.mc.trials < 1 || cfg.mc.obs_per_trial < 1) throw ConfigError("mc needs trials and obs_per_trial >= 1");
        try {
            (void)EstimatorSpec::parse(cfg.mc.estimator);
        } catch (const Error& e) {
            throw ConfigError(std::string("mc.estimator: ") + e.what());
        }
    }
    if (doc.contains("sweep")) {
        const auto& s = doc.at("sweep");
        allow_only(s, "sweep", {"eps_out", "snr", "theta", "obs_per_trial"});
        if (s.contains("eps_out") && s.contains("snr")) throw ConfigError("sweep takes eps_out or snr, not both");
        if (s.contains("eps_out")) cfg.sweep.eps_out = get_vector(s.at("eps_out"), "sweep.eps_out");
        if (s.contains("snr"))
            for (double snr : get_vector(s.at("snr"), "sweep.snr")) {
                if (snr < 0.0) throw ConfigError("sweep.snr must be >= 0");
                cfg.sweep.eps_out.push_back(zoo::outlier_weight_from_snr(snr));
            }
        for (double e : cfg.sweep.eps_out)
            if (!(e > 0.0 && e < 1.0)) throw ConfigError("sweep eps_out values must lie in (0, 1)");
        cfg.sweep.theta = number_or(s, "theta", cfg.sweep.theta, "sweep");
        cfg.sweep.obs_per_trial = number_or(s, "obs_per_trial", cfg.sweep.obs_per_trial, "sweep");
        if (cfg.sweep.obs_per_trial < 1) throw ConfigError("sweep.obs_per_trial must be >= 1");
    }
    if (doc.contains("numerics")) {
        const auto& n = doc.at("numerics");
        allow_only(n, "numerics", {"h_fd", "h_c"});
        cfg.numerics.h_fd = number_or(n, "h_fd", cfg.numerics.h_fd, "numerics");
        cfg.numerics.h_c = number_or(n, "h_c", cfg.numerics.h_c, "numerics");
        if (!(cfg.numerics.h_fd > 0.0) || !(cfg.numerics.h_c > 0.0))
            throw ConfigError("numerics steps must be positive");
    }
    if (doc.contains("output")) {
        const auto& o = doc.at("output");
        allow_only(o, "output", {"dir", "format"});
        if (o.contains("dir")) cfg.output_dir = get_string(o.at("dir"), "output.dir");
        if (o.contains("format")) cfg.format = get_string(o.at("format"), "output.format");
        if (cfg.format != "csv" && cfg.format != "json") throw ConfigError("output.format must be csv or json");
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("config is not valid JSON: " + std::string(e.what()));
    }
    return parse_config(doc);
}

FiniteModel build_model(const ModelSpec& spec) {
    const auto& p = spec.params;
    const std::string where = "model_params";
    try {
        if (spec.id == "bernoulli") {
            allow_only(p, where, {"lower", "upper", "grid"});
            return zoo::bernoulli(interval_from(p, 101, where));
        }
        if (spec.id == "binomial") {
            allow_only(p, where, {"n", "lower", "upper", "grid"});
            return zoo::binomial(number_or(p, "n", 1u, where), interval_from(p, 101, where));
        }
        if (spec.id == "categorical") {
            allow_only(p, where, {"d", "grid"});
            return zoo::categorical(number_or(p, "d", std::size_t{3}, where), number_or(p, "grid", 0, where));
        }
        if (spec.id == "pulse") {
            allow_only(p, where, {"d", "eps_out", "snr", "sigma", "grid"});
            double eps = number_or(p, "eps_out", 0.1, where);
            if (p.contains("snr")) {
                if (p.contains("eps_out")) throw ConfigError("model_params takes eps_out or snr, not both");
                eps = zoo::outlier_weight_from_snr(get_number(p.at("snr"), "model_params.snr"));
            }
            return zoo::pulse(number_or(p, "d", std::size_t{16}, where), eps, number_or(p, "sigma", 1.0, where),
                              number_or(p, "grid", 0, where));
        }
        if (spec.id == "iid") {
            allow_only(p, where, {"base", "n"});
            if (!p.contains("base")) throw ConfigError("iid model needs a base");
            const auto& base = p.at("base");
            allow_only(base, "model_params.base", {"model_id", "model_params"});
            ModelSpec inner;
            if (base.contains("model_id")) inner.id = get_string(base.at("model_id"), "base.model_id");
            if (base.contains("model_params")) inner.params = base.at("model_params");
            return zoo::iid(build_model(inner), number_or(p, "n", 1u, where));
        }
        if (spec.id == "table") {
            allow_only(p, where, {"lower", "upper", "rows"});
            if (!p.contains("rows") || !p.at("rows").is_array()) throw ConfigError("table model needs rows");
            std::vector<std::vector<double>> rows;
            for (const auto& r : p.at("rows")) rows.push_back(get_vector(r, "table row"));
            const double lo = number_or(p, "lower", 0.0, where);
            const double hi = number_or(p, "upper", 1.0, where);
            auto space = ParameterSpace::interval(lo, hi, static_cast<int>(rows.size()));
            return zoo::table(std::move(space), std::move(rows));
        }
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::InvalidArgument) throw ConfigError(e.what());
        throw;
    }
    throw ConfigError("unknown model '" + spec.id + "'");
}

Prior build_prior(const PriorSpec& spec, const ParameterSpace& space) {
    const auto vec = [&](const std::optional<std::vector<double>>& v) -> std::optional<Vector> {
        if (!v) return std::nullopt;
        if (v->size() != space.dim()) throw ConfigError("prior vector length does not match the parameter dimension");
        return Eigen::Map<const Vector>(v->data(), static_cast<Eigen::Index>(v->size()));
    };
    try {
        if (spec.id == "uniform") return zoo::uniform_prior(space, spec.normalization);
        if (spec.id == "constant") return zoo::constant_prior(space, spec.c);
        if (spec.id == "beta") return zoo::beta_prior(space, spec.a, spec.b, spec.normalization);
        if (spec.id == "gaussian") return zoo::gaussian_prior(space, spec.normalization, vec(spec.mean), vec(spec.sd));
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::InvalidArgument) throw ConfigError(e.what());
        throw;
    }
    throw ConfigError("unknown prior '" + spec.id + "'");
}

std::vector<Vector> evaluation_points(const ExperimentConfig& config) {
    std::vector<Vector> out;
    const auto push = [&](const std::vector<double>& t) {
        out.push_back(Eigen::Map<const Vector>(t.data(), static_cast<Eigen::Index>(t.size())));
    };
    if (config.theta) push(*config.theta);
    for (const auto& t : config.theta_grid) push(t);
    return out;
}

}  // namespace infobound::cli
