#pragma once

#include "infobound/model.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace infobound {

/// Inverse-CDF draws from a fixed pmf.
class CategoricalSampler {
public:
    explicit CategoricalSampler(const Vector& pmf);
    std::size_t draw(double u) const;

private:
    std::vector<double> cdf_;
};

/// `count` i.i.d. draws from eval_pmf(model, θ). Draw i uses
/// rng::counter_uniform(seed, stream, i).
std::vector<std::size_t> sample(const FiniteModel& model, const Vector& theta, std::size_t count,
                                std::uint64_t seed, std::uint64_t stream = 0);

/// Maximum likelihood over the parameter grid, refined by one golden-section
/// pass per coordinate within a cell of the best node. Log-pmf tables for the
/// grid are built once; estimate() is const and safe to call concurrently.
class GridMle {
public:
    explicit GridMle(const FiniteModel& model);
    Vector estimate(std::span<const std::size_t> data) const;

private:
    double log_likelihood(const Vector& theta, const std::vector<std::pair<std::size_t, double>>& counts) const;

    const FiniteModel& model_;
    std::vector<Vector> nodes_;
    Matrix log_pmf_;  // node × atom
};

Vector mle_grid(const FiniteModel& model, std::span<const std::size_t> data);

/// Posterior mean on the parameter grid: Σ θ λ(θ) Π p_θ(x_i) / Σ λ(θ) Π p_θ(x_i),
/// accumulated in log space. Throws PosteriorUnderflow when the data leaves a
/// single node within exp(-700) of the peak while the prior alone spread wider.
class GridPosterior {
public:
    GridPosterior(const FiniteModel& model, const Prior& prior);
    Vector estimate(std::span<const std::size_t> data) const;

private:
    std::vector<Vector> nodes_;
    Vector log_prior_;
    Matrix log_pmf_;
    std::size_t prior_live_ = 0;
};

Vector posterior_mean(const FiniteModel& model, const Prior& prior, std::span<const std::size_t> data);

/// Declarative estimator names: "mle", "posterior_mean", "mean" (average atom
/// value), "identity" (value of the first observation), "shrink:c" (c × mean),
/// "const:v".
struct EstimatorSpec {
    enum class Kind { Mle, PosteriorMean, Mean, Identity, Shrink, Constant };
    Kind kind = Kind::Mle;
    double parameter = 0.0;

    static EstimatorSpec parse(std::string_view text);
    std::string name() const;
};

using EstimatorFn = std::function<Vector(std::span<const std::size_t>)>;

/// `prior` is required for posterior_mean and ignored otherwise. The returned
/// callable may reference `model` and `prior`; keep them alive.
EstimatorFn make_estimator(const EstimatorSpec& spec, const FiniteModel& model, const Prior* prior = nullptr);

struct McEstimate {
    Vector mean;              ///< mean of θ̂
    Vector mean_error;        ///< mean of θ̂ - θ
    Matrix cov;               ///< covariance of θ̂ - θ (1/trials normalization)
    Matrix mse;               ///< mean of (θ̂ - θ)(θ̂ - θ)ᵀ
    Matrix ci_halfwidth;      ///< 3σ half-widths on mse entries
    Matrix cov_ci_halfwidth;  ///< 3σ half-widths on cov entries
    std::size_t trials = 0;
    std::uint64_t seed = 0;
};

struct McSettings {
    std::size_t trials = 1000;
    std::size_t obs_per_trial = 1;
    std::uint64_t seed = 0;
    unsigned threads = 1;
};

/// Runs the estimator on fresh samples for each trial; trial t draws from stream t.
/// Results are bit-identical for any thread count.
McEstimate empirical_mse(const FiniteModel& model, const Vector& theta_true, const EstimatorSpec& estimator,
                         const McSettings& settings, const Prior* prior = nullptr);

struct PriorAveragedEstimate {
    McEstimate about_truth;        ///< errors measured against the drawn θ
    Matrix conditional_variance;   ///< pooled variance about per-node conditional means
};

/// θ ~ grid prior (stream t, index 2^63), then data | θ as in empirical_mse.
PriorAveragedEstimate prior_averaged_mse(const FiniteModel& model, const Prior& prior,
                                         const EstimatorSpec& estimator, const McSettings& settings);

}  // namespace infobound
