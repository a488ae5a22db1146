#pragma once

#include "infobound/model.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace infobound::zoo {

/// p_θ = (1 - θ, θ) on the given interval (default (0, 1), 101 grid cells).
FiniteModel bernoulli(std::optional<ParameterSpace> space = std::nullopt);

/// Simplex chart: k = d - 1, p_θ = (θ_1, ..., θ_{d-1}, 1 - Σθ_i).
FiniteModel categorical(std::size_t d, int grid_points_per_dim = 0);

/// Number of successes in n Bernoulli(θ) trials. Atom values are x / n so the
/// atom value of one observation is the sample mean of the underlying trials.
FiniteModel binomial(unsigned n, std::optional<ParameterSpace> space = std::nullopt);

/// n-fold i.i.d. product of `base`. Bernoulli bases compress exactly to the
/// binomial sufficient statistic; other bases use the d^n product alphabet with
/// atom x = Σ x_j d^j and atom value equal to the mean of the component values.
FiniteModel iid(const FiniteModel& base, unsigned n);

/// Outlier weight for a pulse model at signal-to-noise ratio `snr`: 1 / (1 + snr).
double outlier_weight_from_snr(double snr);

/// Pulse-location model on d bins x = 0..d-1 with scalar location τ in (1, d-2):
/// p_τ(x) = (1 - ε) K_σ(x, τ) + ε / d, K_σ a bin-normalized Gaussian kernel.
FiniteModel pulse(std::size_t d, double eps_out, double sigma = 1.0, int grid_points_per_dim = 0);

/// Scalar-parameter model given only on grid nodes: row m of `table` is the pmf
/// at node m of `space`. Evaluating off the grid raises OutOfDomain.
FiniteModel table(ParameterSpace space, std::vector<std::vector<double>> table);

Prior uniform_prior(const ParameterSpace& space, Normalization mode);

/// λ ≡ c, improper.
Prior constant_prior(const ParameterSpace& space, double c);

/// Product of Beta(a, b) densities rescaled to each axis of the box. On (0, 1)
/// with a = b = 2 this is λ(θ) = 6θ(1 - θ).
Prior beta_prior(const ParameterSpace& space, double a, double b, Normalization mode);

/// Gaussian truncated to the box; mean and sd default to the box center and a
/// quarter of the box width on every axis.
Prior gaussian_prior(const ParameterSpace& space, Normalization mode,
                     std::optional<Vector> mean = std::nullopt,
                     std::optional<Vector> sd = std::nullopt);

}  // namespace infobound::zoo
