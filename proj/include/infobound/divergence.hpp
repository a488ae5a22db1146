#pragma once

#include "infobound/fisher.hpp"
#include "infobound/model.hpp"

#include <vector>

namespace infobound {

/// Positive measure on a finite alphabet (not necessarily of unit mass).
class UnnormalizedMeasure {
public:
    explicit UnnormalizedMeasure(Vector values);

    const Vector& values() const noexcept { return values_; }
    double total_mass() const noexcept { return total_mass_; }
    std::size_t size() const noexcept { return static_cast<std::size_t>(values_.size()); }

private:
    Vector values_;
    double total_mass_;
};

/// p̃_θ = p_θ · λ(θ).
UnnormalizedMeasure denormalized(const FiniteModel& model, const Prior& prior, const Vector& theta);

/// I(p‖q) = Σ p log(p/q) - Σ p + Σ q, accumulated term by term as
/// q·φ(p/q) with φ(t) = t log t - t + 1 so near-equal arguments keep full precision.
double kl_unnormalized(const UnnormalizedMeasure& p, const UnnormalizedMeasure& q);

/// Dense k×k×k array indexed (i, j, l).
class SymbolArray {
public:
    explicit SymbolArray(std::size_t k) : k_(k), data_(k * k * k, 0.0) {}

    std::size_t dim() const noexcept { return k_; }
    double& operator()(std::size_t i, std::size_t j, std::size_t l) { return data_[(i * k_ + j) * k_ + l]; }
    double operator()(std::size_t i, std::size_t j, std::size_t l) const {
        return data_[(i * k_ + j) * k_ + l];
    }

private:
    std::size_t k_;
    std::vector<double> data_;
};

/// Γ^(D)_{ij,l} = -∂_i ∂_j ∂'_l D and Γ^(D*)_{ij,l} = -∂_l ∂'_i ∂'_j D on the
/// diagonal θ' = θ.
struct ChristoffelTriple {
    SymbolArray gamma_primal;
    SymbolArray gamma_dual;
    Vector eval_point;
};

/// Eguchi metric of the unnormalized KL on the denormalized family:
/// g_ij = -∂_i ∂'_j I(p̃_θ‖p̃_θ') at θ' = θ, by the 4-point cross stencil with
/// step rel_step * (1 + |θ_i|). Symmetrized; NotPsd below -1e-6.
InfoMatrix metric_from_divergence(const FiniteModel& model, const Prior& prior, const Vector& theta,
                                  double rel_step = kFdRelStep);

/// Both connection symbols by 8-point mixed third differences.
ChristoffelTriple christoffel_from_divergence(const FiniteModel& model, const Prior& prior,
                                              const Vector& theta, double rel_step = kCurvatureRelStep);

/// max_{i,j,l} |∂_l g_ij - Γ^(D)_{li,j} - Γ^(D*)_{lj,i}|. The metric derivative
/// is a central difference of metric_from_divergence; every stencil uses the
/// same relative step so the residual is a pure O(h²) truncation error.
double check_dualistic_structure(const FiniteModel& model, const Prior& prior, const Vector& theta,
                                 double rel_step = kCurvatureRelStep);

}  // namespace infobound
