#include "infobound/cli/commands.hpp"

#include "infobound/bounds.hpp"
#include "infobound/divergence.hpp"
#include "infobound/errors.hpp"
#include "infobound/fisher.hpp"
#include "infobound/montecarlo.hpp"
#include "infobound/rng.hpp"
#include "infobound/zoo.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <optional>
#include <set>
#include <sstream>

namespace infobound::cli {

namespace {

constexpr std::uint64_t kVerifySeed = 20240611;

double relative_frobenius(const Matrix& a, const Matrix& b) {
    return (a - b).norm() / std::max(b.norm(), 1e-300);
}

Vector require_theta(const ExperimentConfig& config, const char* command) {
    if (!config.theta) throw ConfigError(std::string(command) + " needs theta");
    return Eigen::Map<const Vector>(config.theta->data(), static_cast<Eigen::Index>(config.theta->size()));
}

void require_dim(const FiniteModel& model, const Vector& theta) {
    if (static_cast<std::size_t>(theta.size()) != model.dim())
        throw ConfigError("theta has " + std::to_string(theta.size()) + " entries but " + model.name() + " has " +
                          std::to_string(model.dim()) + " parameters");
}

// Exact bias of a single-observation estimator: the estimate on each atom does
// not depend on θ, so b(θ) = Σ_x p_θ(x) θ̂(x) - θ.
BiasFn exact_bias(const FiniteModel& model, const EstimatorFn& estimator) {
    std::vector<Vector> per_atom;
    for (std::size_t x = 0; x < model.alphabet_size(); ++x) {
        const std::size_t obs[1] = {x};
        per_atom.push_back(estimator(obs));
    }
    return [&model, per_atom](const Vector& theta) {
        const Vector p = eval_pmf(model, theta);
        Vector mean = Vector::Zero(theta.size());
        for (std::size_t x = 0; x < per_atom.size(); ++x) mean += p[static_cast<Eigen::Index>(x)] * per_atom[x];
        return Vector(mean - theta);
    };
}

void append_matrix_rows(BoundsTable& table, const std::optional<Vector>& theta, BoundKind kind, const Matrix& value) {
    for (Eigen::Index i = 0; i < value.rows(); ++i)
        for (Eigen::Index j = 0; j < value.cols(); ++j) {
            BoundsRow row;
            for (std::size_t c = 0; c < table.dim; ++c)
                row.theta.push_back(theta ? std::optional<double>((*theta)[static_cast<Eigen::Index>(c)]) : std::nullopt);
            row.bound_kind = std::string(to_string(kind));
            row.entry_i = static_cast<int>(i) + 1;
            row.entry_j = static_cast<int>(j) + 1;
            row.value = value(i, j);
            table.rows.push_back(std::move(row));
        }
}

// ---- verify ----------------------------------------------------------------

struct Case {
    std::string label;
    const FiniteModel* model;
    const Prior* prior;
};

class Sampler {
public:
    Sampler(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

    /// Uniform point in the central part of the box that keeps `step_margin`
    /// clear of every face and of the model constraint.
    Vector interior(const FiniteModel& model, double step_margin) {
        const auto& space = model.params();
        if (model.name() == "table") return space.node(space.grid_size() / 2);
        for (int attempt = 0; attempt < 1000; ++attempt) {
            Vector t(space.dim());
            for (std::size_t i = 0; i < space.dim(); ++i) {
                const auto e = static_cast<Eigen::Index>(i);
                const double lo = space.lower()[e];
                const double hi = space.upper()[e];
                const double scale = 1.0 + std::max(std::abs(lo), std::abs(hi));
                const double margin = std::min(std::max(0.2 * (hi - lo), 1.5 * step_margin * scale), 0.45 * (hi - lo));
                t[e] = lo + margin + (hi - lo - 2.0 * margin) * next();
            }
            try {
                // third differences reach three steps out
                require_interior(model, t, 3.0 * step_margin);
                if (!model.has_constraint() || model.constraint_slack(t) > 0.15) return t;
            } catch (const Error&) {
            }
        }
        throw Error(ErrorKind::OutOfDomain, "no interior point of " + model.name() + " clears the step margin");
    }

    std::optional<Vector> try_interior(const FiniteModel& model, double step_margin) {
        try {
            return interior(model, step_margin);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::OutOfDomain) throw;
            return std::nullopt;
        }
    }

    double next() { return rng::counter_uniform(seed_, stream_, index_++); }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t index_ = 0;
};

struct CheckResult {
    std::string name;
    bool pass = true;
    double value = 0.0;
    double tolerance = 0.0;
    std::string detail;
};

class Suite {
public:
    void run(const std::string& name, double tolerance, const std::function<double(std::string&)>& body,
             bool upper = true) {
        CheckResult r{name, true, 0.0, tolerance, {}};
        try {
            r.value = body(r.detail);
            r.pass = upper ? r.value <= tolerance : r.value >= tolerance;
        } catch (const Error& e) {
            r.pass = false;
            r.value = std::nan("");
            r.detail = e.what();
        }
        results_.push_back(std::move(r));
    }

    const std::vector<CheckResult>& results() const { return results_; }

private:
    std::vector<CheckResult> results_;
};

}  // namespace

json fim_report(const ExperimentConfig& config) {
    const FiniteModel model = build_model(config.model);
    const Prior prior = build_prior(config.prior, model.params());
    const Vector theta = require_theta(config, "fim");
    require_dim(model, theta);

    const InfoMatrix g = fisher_matrix(model, theta);
    const InfoMatrix j = prior_term(prior, theta);
    const InfoMatrix gi = bayesian_metric(model, prior, theta);
    const InfoMatrix gd = metric_from_divergence(model, prior, theta, config.numerics.h_fd);

    json doc;
    doc["model"] = model.name();
    doc["prior"] = prior.name();
    doc["theta"] = to_json(theta);
    doc["lambda"] = prior.density(theta);
    doc["fisher"] = to_json(g.values());
    doc["prior_term"] = to_json(j.values());
    doc["bayesian"] = to_json(gi.values());
    doc["divergence_metric"] = to_json(gd.values());
    doc["agreement_residual"] = relative_frobenius(gd.values(), gi.values());
    doc["h_fd"] = config.numerics.h_fd;
    return doc;
}

BoundsTable bounds_table(const ExperimentConfig& config) {
    const FiniteModel model = build_model(config.model);
    if (config.bounds.empty()) throw ConfigError("bound list is empty");
    const auto points = evaluation_points(config);
    for (const auto& t : points) require_dim(model, t);

    BoundsTable table;
    table.dim = model.dim();
    for (BoundKind kind : config.bounds) {
        if (kind == BoundKind::BayesianCrlb) {
            const Prior prior = build_prior(config.prior, model.params());
            append_matrix_rows(table, std::nullopt, kind, bayesian_crlb(model, prior).value);
            continue;
        }
        if (points.empty()) throw ConfigError(std::string(to_string(kind)) + " needs theta or theta_grid");
        if (kind == BoundKind::Barankin && model.dim() != 1)
            throw ConfigError("barankin needs a scalar parameter");
        std::optional<Prior> prior;
        std::optional<BiasFn> bias;
        EstimatorFn estimator;
        if (kind == BoundKind::CrlbBiased) {
            if (!config.bias) throw ConfigError("crlb_biased needs a bias estimator spec");
            const auto spec = EstimatorSpec::parse(*config.bias);
            if (spec.kind == EstimatorSpec::Kind::PosteriorMean) prior.emplace(build_prior(config.prior, model.params()));
            estimator = make_estimator(spec, model, prior ? &*prior : nullptr);
            bias = exact_bias(model, estimator);
        }
        for (const auto& theta : points) {
            Matrix value;
            switch (kind) {
                case BoundKind::CrlbUnbiased: value = crlb_unbiased(model, theta).value; break;
                case BoundKind::CrlbBiased:
                    value = crlb_biased(model, theta, *bias, config.bias_jacobian).value;
                    break;
                case BoundKind::Barankin: value = barankin_sup(model, theta[0], config.barankin).value; break;
                case BoundKind::BayesianCrlb: break;
            }
            append_matrix_rows(table, theta, kind, value);
        }
    }
    return table;
}

std::vector<SweepRow> sweep_rows(const ExperimentConfig& config, unsigned threads) {
    if (config.model.id != "pulse") throw ConfigError("sweep needs the pulse model");
    if (config.sweep.eps_out.empty()) throw ConfigError("sweep needs eps_out or snr values");
    if (!config.mc.seed) throw ConfigError("sweep runs Monte Carlo and needs mc.seed");
    const auto& p = config.model.params;
    const std::size_t d = p.contains("d") ? p.at("d").get<std::size_t>() : 16;
    const double sigma = p.contains("sigma") ? p.at("sigma").get<double>() : 1.0;
    const int grid = p.contains("grid") ? p.at("grid").get<int>() : 0;
    for (auto it = p.begin(); it != p.end(); ++it)
        if (it.key() != "d" && it.key() != "sigma" && it.key() != "grid")
            throw ConfigError("unknown key '" + it.key() + "' in model_params for sweep");
    const double theta = config.sweep.theta != 0.0 ? config.sweep.theta : static_cast<double>(d / 2);
    const auto n = static_cast<unsigned>(config.sweep.obs_per_trial);
    const auto estimator = EstimatorSpec::parse(config.mc.estimator);
    if (estimator.kind == EstimatorSpec::Kind::PosteriorMean) throw ConfigError("sweep estimator needs no prior");

    std::vector<SweepRow> rows;
    for (double eps : config.sweep.eps_out) {
        FiniteModel base = [&] {
            try {
                return zoo::pulse(d, eps, sigma, grid);
            } catch (const Error& e) {
                if (e.kind() == ErrorKind::InvalidArgument) throw ConfigError(e.what());
                throw;
            }
        }();
        const FiniteModel joint = n == 1 ? base : zoo::iid(base, n);
        const Vector t = Vector::Constant(1, theta);
        SweepRow row;
        row.eps_out = eps;
        row.snr = (1.0 - eps) / eps;
        row.crlb = crlb_unbiased(joint, t).value(0, 0);
        row.barankin = barankin_sup(joint, theta, config.barankin).value(0, 0);
        McSettings mc{config.mc.trials, n, *config.mc.seed, threads};
        const McEstimate est = empirical_mse(base, t, estimator, mc);
        row.mc_mse = est.mse(0, 0);
        row.mc_ci = est.ci_halfwidth(0, 0);
        rows.push_back(row);
    }
    return rows;
}

VerifyReport verify_report(const ExperimentConfig& config, unsigned threads) {
    const std::uint64_t seed = config.mc.seed.value_or(kVerifySeed);
    const double h_fd = config.numerics.h_fd;
    const double h_c = config.numerics.h_c;

    std::vector<FiniteModel> models;
    std::vector<Prior> priors;
    std::vector<Case> cases;
    if (!config.model.id.empty()) {
        models.push_back(build_model(config.model));
        priors.push_back(build_prior(config.prior, models[0].params()));
    } else {
        models.push_back(zoo::bernoulli());
        models.push_back(zoo::categorical(3));
        models.push_back(zoo::pulse(16, 0.2));
    }
    // priors are rebuilt per model space in the default set
    std::vector<std::vector<Prior>> model_priors(models.size());
    for (std::size_t m = 0; m < models.size(); ++m) {
        const auto& space = models[m].params();
        if (!config.model.id.empty()) {
            model_priors[m].push_back(priors[0]);
        } else {
            model_priors[m].push_back(zoo::uniform_prior(space, Normalization::OnGrid));
            model_priors[m].push_back(zoo::beta_prior(space, 2.0, 2.0, Normalization::OnGrid));
            model_priors[m].push_back(zoo::gaussian_prior(space, Normalization::OnGrid));
        }
    }
    for (std::size_t m = 0; m < models.size(); ++m)
        for (const auto& pr : model_priors[m]) cases.push_back({models[m].name() + "/" + pr.name(), &models[m], &pr});

    Suite suite;
    std::uint64_t stream = 0;

    suite.run("pmf_normalization", 1e-12, [&](std::string&) {
        double worst = 0.0;
        for (const auto& model : models) {
            const auto& space = model.params();
            const std::size_t n = space.grid_size();
            const std::size_t stride = std::max<std::size_t>(1, n / 25);
            for (std::size_t i = stride / 2; i < n; i += stride) {
                const Vector t = space.node(i);
                if (model.has_constraint() && !(model.constraint_slack(t) > 0.0)) continue;
                const Vector p = eval_pmf(model, t);
                worst = std::max(worst, std::abs(p.sum() - 1.0));
                if (p.minCoeff() < model.floor()) worst = std::max(worst, 1.0);
            }
        }
        return worst;
    });

    // models whose box cannot hold the stencil are listed, not evaluated
    const auto note_skipped = [](std::string& detail, const std::set<std::string>& skipped, bool any) {
        if (!any) throw Error(ErrorKind::OutOfDomain, "no model admits the finite-difference step");
        for (const auto& name : skipped) detail += (detail.empty() ? "skipped " : ", skipped ") + name;
    };

    suite.run("score_zero_mean", 5e-6, [&](std::string& detail) {
        Sampler s(seed, stream++);
        double worst = 0.0;
        std::set<std::string> skipped;
        bool any = false;
        for (const auto& model : models)
            for (int r = 0; r < 5; ++r) {
                const auto t = s.try_interior(model, h_fd);
                if (!t) {
                    skipped.insert(model.name());
                    break;
                }
                any = true;
                worst = std::max(worst, (score(model, *t, h_fd) * eval_pmf(model, *t)).cwiseAbs().maxCoeff());
            }
        note_skipped(detail, skipped, any);
        return worst;
    });

    suite.run("metric_consistency", 1e-3, [&](std::string& detail) {
        Sampler s(seed, stream++);
        double worst = 0.0;
        std::set<std::string> skipped;
        bool any = false;
        for (const auto& c : cases)
            for (int r = 0; r < 3; ++r) {
                const auto t = s.try_interior(*c.model, h_fd);
                if (!t) {
                    skipped.insert(c.model->name());
                    break;
                }
                any = true;
                const double e = relative_frobenius(metric_from_divergence(*c.model, *c.prior, *t, h_fd).values(),
                                                    bayesian_metric(*c.model, *c.prior, *t).values());
                if (e > worst) {
                    worst = e;
                    detail = c.label;
                }
            }
        note_skipped(detail, skipped, any);
        return worst;
    });

    std::vector<double> ratios;
    suite.run("duality_residual", 1e-2, [&](std::string& detail) {
        Sampler s(seed, stream++);
        double worst = 0.0;
        for (const auto& c : cases) {
            const Vector t = s.interior(*c.model, h_c);
            const double r1 = check_dualistic_structure(*c.model, *c.prior, t, h_c);
            const double r2 = check_dualistic_structure(*c.model, *c.prior, t, h_c / 2.0);
            ratios.push_back(r1 / r2);
            if (r1 > worst) {
                worst = r1;
                detail = c.label;
            }
        }
        return worst;
    });

    suite.run("duality_order", 0.0, [&](std::string& detail) {
        if (ratios.empty()) throw Error(ErrorKind::InvalidArgument, "no duality residuals to compare");
        double worst = 0.0;
        for (double r : ratios) {
            const double miss = r < 3.0 ? 3.0 - r : (r > 5.0 ? r - 5.0 : 0.0);
            worst = std::max(worst, miss);
        }
        detail = "distance of the halving ratio from [3, 5]";
        return worst;
    });

    suite.run("kl_nonnegativity", 0.0, [&](std::string&) {
        Sampler s(seed, stream++);
        double most_negative = 0.0;
        for (int r = 0; r < 200; ++r) {
            Vector p(4), q(4);
            for (int i = 0; i < 4; ++i) {
                p[i] = 0.01 + 2.0 * s.next();
                q[i] = 0.01 + 2.0 * s.next();
            }
            const double v = kl_unnormalized(UnnormalizedMeasure(p), UnnormalizedMeasure(q));
            most_negative = std::min(most_negative, v);
            if (!(v > 0.0)) most_negative = std::min(most_negative, -1.0);
            if (kl_unnormalized(UnnormalizedMeasure(p), UnnormalizedMeasure(p)) != 0.0) most_negative = -1.0;
        }
        return most_negative;
    }, false);

    suite.run("barankin_dominates_crlb", -1e-9, [&](std::string& detail) {
        Sampler s(seed, stream++);
        double worst = 0.0;
        BarankinSearch search;
        search.n_max = 2;
        search.restarts = 2;
        for (const auto& model : models) {
            if (model.dim() != 1) continue;
            const Vector t = s.interior(model, kCurvatureRelStep);
            const double gap = barankin_sup(model, t[0], search).value(0, 0) - crlb_unbiased(model, t).value(0, 0);
            if (gap < worst) {
                worst = gap;
                detail = model.name();
            }
        }
        return worst;
    }, false);

    suite.run("groves_rothenberg_psd", -1e-8, [&](std::string& detail) {
        double worst = std::numeric_limits<double>::infinity();
        for (const auto& c : cases) {
            const Matrix gap = groves_rothenberg_gap(*c.model, *c.prior);
            const double e = Eigen::SelfAdjointEigenSolver<Matrix>(gap).eigenvalues().minCoeff();
            if (e < worst) {
                worst = e;
                detail = c.label;
            }
        }
        return worst;
    }, false);

    suite.run("mc_dominance", 0.0, [&](std::string& detail) {
        const FiniteModel bern = zoo::bernoulli();
        const FiniteModel joint = zoo::iid(bern, 10);
        const Vector t = Vector::Constant(1, 0.3);
        McSettings mc{4000, 10, seed, threads};
        const McEstimate est = empirical_mse(bern, t, EstimatorSpec::parse("mean"), mc);
        const double crlb = crlb_unbiased(joint, t).value(0, 0);
        detail = "bernoulli sample mean, n = 10, theta = 0.3";
        return est.mse(0, 0) - (crlb - est.ci_halfwidth(0, 0));
    }, false);

    VerifyReport report;
    json checks = json::array();
    for (const auto& r : suite.results()) {
        checks.push_back({{"name", r.name},
                          {"pass", r.pass},
                          {"value", r.value},
                          {"tolerance", r.tolerance},
                          {"detail", r.detail}});
        if (!r.pass) {
            report.pass = false;
            report.failed.push_back(r.detail.empty() ? r.name : r.name + " (" + r.detail + ")");
        }
    }
    report.doc = {{"checks", checks}, {"pass", report.pass}, {"seed", seed}, {"h_fd", h_fd}, {"h_c", h_c}};
    return report;
}

namespace {

std::filesystem::path output_dir(const ExperimentConfig& config, const std::string& flag) {
    std::string dir = flag;
    if (dir.empty() && config.output_dir) dir = *config.output_dir;
    if (dir.empty())
        if (const char* env = std::getenv("INFOBOUND_OUT_DIR")) dir = env;
    if (dir.empty()) dir = ".";
    std::filesystem::create_directories(dir);
    return dir;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << text;
}

int dispatch(const std::string& command, const std::string& config_path, const std::string& out_flag,
             std::optional<std::uint64_t> seed, const std::string& format_flag, unsigned threads) {
    ExperimentConfig config = config_path.empty() ? ExperimentConfig{} : load_config(config_path);
    if (seed) config.mc.seed = seed;
    if (!format_flag.empty()) config.format = format_flag;
    const bool as_json = config.format == "json";

    if (command == "fim") {
        const json doc = fim_report(config);
        write_file(output_dir(config, out_flag) / "fim.json", dump_json(doc));
        return kOk;
    }
    if (command == "bounds") {
        if (config_path.empty()) throw ConfigError("bounds needs --config");
        const BoundsTable table = bounds_table(config);
        std::ostringstream ss;
        if (as_json)
            write_json(ss, bounds_to_json(table));
        else
            write_bounds_csv(ss, table);
        write_file(output_dir(config, out_flag) / (as_json ? "bounds.json" : "bounds.csv"), ss.str());
        return kOk;
    }
    if (command == "sweep") {
        const auto rows = sweep_rows(config, threads);
        std::ostringstream ss;
        if (as_json)
            write_json(ss, sweep_to_json(rows));
        else
            write_sweep_csv(ss, rows);
        write_file(output_dir(config, out_flag) / (as_json ? "sweep.json" : "sweep.csv"), ss.str());
        return kOk;
    }
    // verify
    const VerifyReport report = verify_report(config, threads);
    write_file(output_dir(config, out_flag) / "verify.json", dump_json(report.doc));
    for (const auto& f : report.failed) std::cerr << "verify: failed " << f << '\n';
    return report.pass ? kOk : kPropertyFailure;
}

}  // namespace

int run(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args);
}

int run(const std::vector<std::string>& args) {
    CLI::App app{"Information-geometric error bounds for finite-alphabet models"};
    app.require_subcommand(1);
    std::string config_path, out_dir, format;
    std::optional<std::uint64_t> seed;
    unsigned threads = 1;
    for (const char* name : {"fim", "bounds", "sweep", "verify"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "experiment config (JSON)");
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--seed", seed, "overrides mc.seed");
        sub->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--threads", threads, "Monte Carlo worker threads")->check(CLI::Range(1u, 1024u));
    }
    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        app.exit(e);
        return kOk;
    } catch (const CLI::ParseError& e) {
        std::cerr << "infobound: " << e.what() << '\n';
        return kConfigError;
    }
    const std::string command = app.get_subcommands().front()->get_name();
    try {
        return dispatch(command, config_path, out_dir, seed, format, threads);
    } catch (const ConfigError& e) {
        std::cerr << "infobound " << command << ": config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const Error& e) {
        std::cerr << "infobound " << command << ": " << e.what() << '\n';
        return kNumericalError;
    } catch (const json::exception& e) {
        std::cerr << "infobound " << command << ": config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "infobound " << command << ": " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "infobound " << command << ": " << e.what() << '\n';
        return kNumericalError;
    }
}

}  // namespace infobound::cli
