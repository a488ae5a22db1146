#include "infobound/montecarlo.hpp"

#include "infobound/errors.hpp"
#include "infobound/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <memory>
#include <sstream>
#include <thread>

namespace infobound {

namespace {

constexpr std::uint64_t kThetaDrawIndex = std::uint64_t{1} << 63;
constexpr double kLogUnderflow = -700.0;
constexpr int kGoldenIterations = 50;

using Counts = std::vector<std::pair<std::size_t, double>>;

Counts tally(std::span<const std::size_t> data, std::size_t alphabet_size) {
    std::map<std::size_t, double> acc;
    for (std::size_t x : data) {
        if (x >= alphabet_size) throw Error(ErrorKind::InvalidArgument, "observation outside the alphabet");
        acc[x] += 1.0;
    }
    return {acc.begin(), acc.end()};
}

std::vector<Vector> feasible_nodes(const FiniteModel& model) {
    std::vector<Vector> nodes;
    const auto& space = model.params();
    const std::size_t n = space.grid_size();
    for (std::size_t m = 0; m < n; ++m) {
        Vector theta = space.node(m);
        if (model.has_constraint() && !(model.constraint_slack(theta) > 0.0)) continue;
        nodes.push_back(std::move(theta));
    }
    if (nodes.empty()) throw Error(ErrorKind::InvalidArgument, "model has no feasible grid nodes");
    return nodes;
}

Matrix log_pmf_table(const FiniteModel& model, const std::vector<Vector>& nodes) {
    Matrix table(static_cast<Eigen::Index>(nodes.size()), static_cast<Eigen::Index>(model.alphabet_size()));
    for (std::size_t m = 0; m < nodes.size(); ++m)
        table.row(static_cast<Eigen::Index>(m)) = eval_pmf(model, nodes[m]).array().log().transpose();
    return table;
}

double mean_value(const FiniteModel& model, std::span<const std::size_t> data) {
    double acc = 0.0;
    for (std::size_t x : data) acc += model.alphabet().value(x);
    return acc / static_cast<double>(data.size());
}

void require_data(std::span<const std::size_t> data) {
    if (data.empty()) throw Error(ErrorKind::InvalidArgument, "estimator needs at least one observation");
}

// Evaluates body(t) for t in [0, trials) over `threads` contiguous blocks. On failure
// the exception of the lowest failing trial index is rethrown.
template <typename Body>
void parallel_trials(std::size_t trials, unsigned threads, Body body) {
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(trials, 1))));
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::size_t> error_trial(threads, std::numeric_limits<std::size_t>::max());
    auto run_block = [&](unsigned w) {
        const std::size_t begin = trials * w / threads;
        const std::size_t end = trials * (w + 1) / threads;
        for (std::size_t t = begin; t < end; ++t) {
            try {
                body(t);
            } catch (...) {
                errors[w] = std::current_exception();
                error_trial[w] = t;
                return;
            }
        }
    };
    if (threads == 1) {
        run_block(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (unsigned w = 0; w < threads; ++w) pool.emplace_back(run_block, w);
        for (auto& th : pool) th.join();
    }
    const auto first = std::min_element(error_trial.begin(), error_trial.end());
    if (*first != std::numeric_limits<std::size_t>::max())
        std::rethrow_exception(errors[static_cast<std::size_t>(first - error_trial.begin())]);
}

McEstimate summarize(const std::vector<Vector>& estimates, const std::vector<Vector>& truths,
                     std::uint64_t seed) {
    const std::size_t trials = estimates.size();
    const Eigen::Index k = estimates.front().size();
    const double inv = 1.0 / static_cast<double>(trials);

    McEstimate out;
    out.trials = trials;
    out.seed = seed;
    out.mean = Vector::Zero(k);
    out.mean_error = Vector::Zero(k);
    for (std::size_t t = 0; t < trials; ++t) {
        out.mean += estimates[t];
        out.mean_error += estimates[t] - truths[t];
    }
    out.mean *= inv;
    out.mean_error *= inv;

    out.cov = Matrix::Zero(k, k);
    out.mse = Matrix::Zero(k, k);
    for (std::size_t t = 0; t < trials; ++t) {
        const Vector e = estimates[t] - truths[t];
        const Vector c = e - out.mean_error;
        out.mse += e * e.transpose();
        out.cov += c * c.transpose();
    }
    out.mse *= inv;
    out.cov *= inv;

    // 3σ half-widths from the sample variance of the per-trial products
    Matrix var_mse = Matrix::Zero(k, k);
    Matrix var_cov = Matrix::Zero(k, k);
    for (std::size_t t = 0; t < trials; ++t) {
        const Vector e = estimates[t] - truths[t];
        const Vector c = e - out.mean_error;
        var_mse += (e * e.transpose() - out.mse).cwiseAbs2();
        var_cov += (c * c.transpose() - out.cov).cwiseAbs2();
    }
    const double denom = trials > 1 ? static_cast<double>(trials - 1) : 1.0;
    out.ci_halfwidth = 3.0 * (var_mse / denom * inv).cwiseSqrt();
    out.cov_ci_halfwidth = 3.0 * (var_cov / denom * inv).cwiseSqrt();
    return out;
}

}  // namespace

CategoricalSampler::CategoricalSampler(const Vector& pmf) {
    cdf_.resize(static_cast<std::size_t>(pmf.size()));
    double acc = 0.0;
    for (Eigen::Index x = 0; x < pmf.size(); ++x) {
        acc += pmf[x];
        cdf_[static_cast<std::size_t>(x)] = acc;
    }
    for (double& c : cdf_) c /= acc;
    cdf_.back() = 1.0;
}

std::size_t CategoricalSampler::draw(double u) const {
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    return std::min(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1);
}

std::vector<std::size_t> sample(const FiniteModel& model, const Vector& theta, std::size_t count,
                                std::uint64_t seed, std::uint64_t stream) {
    const CategoricalSampler sampler(eval_pmf(model, theta));
    std::vector<std::size_t> out(count);
    for (std::size_t i = 0; i < count; ++i) out[i] = sampler.draw(rng::counter_uniform(seed, stream, i));
    return out;
}

GridMle::GridMle(const FiniteModel& model)
    : model_(model), nodes_(feasible_nodes(model)), log_pmf_(log_pmf_table(model, nodes_)) {}

double GridMle::log_likelihood(const Vector& theta, const Counts& counts) const {
    const Vector p = eval_pmf(model_, theta);
    double ll = 0.0;
    for (const auto& [x, c] : counts) ll += c * std::log(p[static_cast<Eigen::Index>(x)]);
    return ll;
}

Vector GridMle::estimate(std::span<const std::size_t> data) const {
    require_data(data);
    const Counts counts = tally(data, model_.alphabet_size());

    std::size_t best_node = 0;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m < nodes_.size(); ++m) {
        double ll = 0.0;
        for (const auto& [x, c] : counts) ll += c * log_pmf_(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(x));
        if (ll > best) {
            best = ll;
            best_node = m;
        }
    }

    Vector theta = nodes_[best_node];
    const auto& space = model_.params();
    const Vector width = space.cell_width();
    const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
        double a = std::max(theta[i] - width[i], space.lower()[i] + 1e-9 * (1.0 + std::abs(space.lower()[i])));
        double b = std::min(theta[i] + width[i], space.upper()[i] - 1e-9 * (1.0 + std::abs(space.upper()[i])));
        if (model_.has_constraint()) {
            // keep the constraint slack positive along this axis (slack is affine in the zoo)
            const double slack = model_.constraint_slack(theta);
            b = std::min(b, theta[i] + slack - 1e-9);
        }
        if (!(b > a)) continue;
        auto eval_at = [&](double t) {
            Vector trial = theta;
            trial[i] = t;
            try {
                return log_likelihood(trial, counts);
            } catch (const Error& e) {
                if (e.kind() == ErrorKind::OutOfDomain) return -std::numeric_limits<double>::infinity();
                throw;
            }
        };
        double x1 = b - ratio * (b - a);
        double x2 = a + ratio * (b - a);
        double f1 = eval_at(x1);
        double f2 = eval_at(x2);
        for (int it = 0; it < kGoldenIterations; ++it) {
            if (f1 < f2) {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + ratio * (b - a);
                f2 = eval_at(x2);
            } else {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - ratio * (b - a);
                f1 = eval_at(x1);
            }
        }
        const double x = f1 >= f2 ? x1 : x2;
        const double fx = std::max(f1, f2);
        if (fx > best) {
            best = fx;
            theta[i] = x;
        }
    }
    return theta;
}

Vector mle_grid(const FiniteModel& model, std::span<const std::size_t> data) {
    return GridMle(model).estimate(data);
}

GridPosterior::GridPosterior(const FiniteModel& model, const Prior& prior)
    : nodes_(feasible_nodes(model)), log_pmf_(log_pmf_table(model, nodes_)) {
    if (prior.space().dim() != model.dim())
        throw Error(ErrorKind::DimensionMismatch, "prior and model parameter dimensions differ");
    log_prior_.resize(static_cast<Eigen::Index>(nodes_.size()));
    for (std::size_t m = 0; m < nodes_.size(); ++m)
        log_prior_[static_cast<Eigen::Index>(m)] = prior.log_density(nodes_[m]);
    const double top = log_prior_.maxCoeff();
    for (Eigen::Index m = 0; m < log_prior_.size(); ++m) prior_live_ += log_prior_[m] - top >= kLogUnderflow;
}

Vector GridPosterior::estimate(std::span<const std::size_t> data) const {
    require_data(data);
    const Counts counts = tally(data, static_cast<std::size_t>(log_pmf_.cols()));
    Vector log_post = log_prior_;
    for (const auto& [x, c] : counts) log_post += c * log_pmf_.col(static_cast<Eigen::Index>(x));
    const double peak = log_post.maxCoeff();
    if (!std::isfinite(peak))
        throw Error(ErrorKind::PosteriorUnderflow, "no grid node carries posterior mass");

    Vector acc = Vector::Zero(nodes_.front().size());
    double total = 0.0;
    std::size_t live = 0;
    for (std::size_t m = 0; m < nodes_.size(); ++m) {
        const double rel = log_post[static_cast<Eigen::Index>(m)] - peak;
        if (rel < kLogUnderflow) continue;
        const double w = std::exp(rel);
        acc += w * nodes_[m];
        total += w;
        ++live;
    }
    // the data squeezed a spread prior onto one node: the grid cannot resolve it
    if (live == 1 && prior_live_ > 1)
        throw Error(ErrorKind::PosteriorUnderflow, "every node but one is below exp(" +
                                                       std::to_string(static_cast<int>(kLogUnderflow)) + ") of the peak");
    return acc / total;
}

Vector posterior_mean(const FiniteModel& model, const Prior& prior, std::span<const std::size_t> data) {
    return GridPosterior(model, prior).estimate(data);
}

EstimatorSpec EstimatorSpec::parse(std::string_view text) {
    auto parse_number = [&](std::string_view rest) {
        double v = 0.0;
        const auto res = std::from_chars(rest.data(), rest.data() + rest.size(), v);
        if (res.ec != std::errc() || res.ptr != rest.data() + rest.size())
            throw Error(ErrorKind::InvalidArgument, "bad estimator parameter in '" + std::string(text) + "'");
        return v;
    };
    if (text == "mle") return {Kind::Mle, 0.0};
    if (text == "posterior_mean") return {Kind::PosteriorMean, 0.0};
    if (text == "mean") return {Kind::Mean, 0.0};
    if (text == "identity") return {Kind::Identity, 0.0};
    if (text.starts_with("shrink:")) return {Kind::Shrink, parse_number(text.substr(7))};
    if (text.starts_with("const:")) return {Kind::Constant, parse_number(text.substr(6))};
    throw Error(ErrorKind::InvalidArgument, "unknown estimator '" + std::string(text) + "'");
}

std::string EstimatorSpec::name() const {
    switch (kind) {
        case Kind::Mle: return "mle";
        case Kind::PosteriorMean: return "posterior_mean";
        case Kind::Mean: return "mean";
        case Kind::Identity: return "identity";
        case Kind::Shrink:
        case Kind::Constant: {
            std::ostringstream os;
            os.precision(12);
            os << (kind == Kind::Shrink ? "shrink:" : "const:") << parameter;
            return os.str();
        }
    }
    return "unknown";
}

EstimatorFn make_estimator(const EstimatorSpec& spec, const FiniteModel& model, const Prior* prior) {
    const auto k = static_cast<Eigen::Index>(model.dim());
    auto scalar_only = [&] {
        if (k != 1) throw Error(ErrorKind::InvalidArgument, "estimator '" + spec.name() + "' needs a scalar parameter");
    };
    switch (spec.kind) {
        case EstimatorSpec::Kind::Mle: {
            auto mle = std::make_shared<GridMle>(model);
            return [mle](std::span<const std::size_t> data) { return mle->estimate(data); };
        }
        case EstimatorSpec::Kind::PosteriorMean: {
            if (!prior) throw Error(ErrorKind::InvalidArgument, "posterior_mean needs a prior");
            auto post = std::make_shared<GridPosterior>(model, *prior);
            return [post](std::span<const std::size_t> data) { return post->estimate(data); };
        }
        case EstimatorSpec::Kind::Mean:
            scalar_only();
            return [&model](std::span<const std::size_t> data) {
                require_data(data);
                return Vector(Vector::Constant(1, mean_value(model, data)));
            };
        case EstimatorSpec::Kind::Identity:
            scalar_only();
            return [&model](std::span<const std::size_t> data) {
                require_data(data);
                return Vector(Vector::Constant(1, model.alphabet().value(data.front())));
            };
        case EstimatorSpec::Kind::Shrink: {
            scalar_only();
            const double c = spec.parameter;
            return [&model, c](std::span<const std::size_t> data) {
                require_data(data);
                return Vector(Vector::Constant(1, c * mean_value(model, data)));
            };
        }
        case EstimatorSpec::Kind::Constant: {
            const double v = spec.parameter;
            return [k, v](std::span<const std::size_t>) { return Vector(Vector::Constant(k, v)); };
        }
    }
    throw Error(ErrorKind::InvalidArgument, "unknown estimator kind");
}

McEstimate empirical_mse(const FiniteModel& model, const Vector& theta_true, const EstimatorSpec& estimator,
                         const McSettings& settings, const Prior* prior) {
    if (settings.trials < 1 || settings.obs_per_trial < 1)
        throw Error(ErrorKind::InvalidArgument, "need at least one trial and one observation per trial");
    const EstimatorFn estimate = make_estimator(estimator, model, prior);
    const CategoricalSampler sampler(eval_pmf(model, theta_true));

    std::vector<Vector> estimates(settings.trials);
    parallel_trials(settings.trials, settings.threads, [&](std::size_t t) {
        std::vector<std::size_t> data(settings.obs_per_trial);
        for (std::size_t i = 0; i < data.size(); ++i)
            data[i] = sampler.draw(rng::counter_uniform(settings.seed, t, i));
        estimates[t] = estimate(data);
    });
    const std::vector<Vector> truths(settings.trials, theta_true);
    return summarize(estimates, truths, settings.seed);
}

PriorAveragedEstimate prior_averaged_mse(const FiniteModel& model, const Prior& prior,
                                         const EstimatorSpec& estimator, const McSettings& settings) {
    if (settings.trials < 2 || settings.obs_per_trial < 1)
        throw Error(ErrorKind::InvalidArgument, "need at least two trials and one observation per trial");
    const std::vector<Vector> nodes = feasible_nodes(model);
    Vector weights(static_cast<Eigen::Index>(nodes.size()));
    for (std::size_t m = 0; m < nodes.size(); ++m) weights[static_cast<Eigen::Index>(m)] = prior.log_density(nodes[m]);
    weights = (weights.array() - weights.maxCoeff()).exp();
    const CategoricalSampler node_sampler(weights / weights.sum());

    std::vector<CategoricalSampler> samplers;
    samplers.reserve(nodes.size());
    for (const auto& node : nodes) samplers.emplace_back(eval_pmf(model, node));

    const EstimatorFn estimate = make_estimator(estimator, model, &prior);
    std::vector<Vector> estimates(settings.trials);
    std::vector<std::size_t> drawn(settings.trials);
    parallel_trials(settings.trials, settings.threads, [&](std::size_t t) {
        const std::size_t m = node_sampler.draw(rng::counter_uniform(settings.seed, t, kThetaDrawIndex));
        drawn[t] = m;
        std::vector<std::size_t> data(settings.obs_per_trial);
        for (std::size_t i = 0; i < data.size(); ++i)
            data[i] = samplers[m].draw(rng::counter_uniform(settings.seed, t, i));
        estimates[t] = estimate(data);
    });

    std::vector<Vector> truths(settings.trials);
    for (std::size_t t = 0; t < settings.trials; ++t) truths[t] = nodes[drawn[t]];

    PriorAveragedEstimate out{summarize(estimates, truths, settings.seed), {}};

    // pooled within-node variance about each node's conditional mean
    const Eigen::Index k = estimates.front().size();
    std::vector<Vector> node_mean(nodes.size(), Vector::Zero(k));
    std::vector<std::size_t> node_count(nodes.size(), 0);
    for (std::size_t t = 0; t < settings.trials; ++t) {
        node_mean[drawn[t]] += estimates[t];
        ++node_count[drawn[t]];
    }
    std::size_t groups = 0;
    for (std::size_t m = 0; m < nodes.size(); ++m) {
        if (node_count[m] > 0) {
            node_mean[m] /= static_cast<double>(node_count[m]);
            ++groups;
        }
    }
    Matrix pooled = Matrix::Zero(k, k);
    for (std::size_t t = 0; t < settings.trials; ++t) {
        const Vector c = estimates[t] - node_mean[drawn[t]];
        pooled += c * c.transpose();
    }
    const std::size_t dof = settings.trials > groups ? settings.trials - groups : 1;
    out.conditional_variance = pooled / static_cast<double>(dof);
    return out;
}

}  // namespace infobound
