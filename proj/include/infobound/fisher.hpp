#pragma once

#include "infobound/model.hpp"

#include <string_view>

namespace infobound {

enum class InfoKind { ScoreFisher, PriorTerm, Bayesian, DivergenceBased };

std::string_view to_string(InfoKind kind);

/// Symmetric positive-semidefinite information matrix tagged with how it was
/// obtained. Construction rejects asymmetric input and eigenvalues below
/// -psd_tolerance * max(1, |largest eigenvalue|).
class InfoMatrix {
public:
    InfoMatrix(Matrix values, InfoKind kind, Vector eval_point, double psd_tolerance = 1e-8);

    const Matrix& values() const noexcept { return values_; }
    InfoKind kind() const noexcept { return kind_; }
    const Vector& eval_point() const noexcept { return eval_point_; }
    /// Ratio of extreme eigenvalues; +inf when the smallest is not positive.
    double cond_estimate() const noexcept { return cond_; }
    const Vector& eigenvalues() const noexcept { return eigenvalues_; }
    std::size_t dim() const noexcept { return static_cast<std::size_t>(values_.rows()); }

private:
    Matrix values_;
    InfoKind kind_;
    Vector eval_point_;
    Vector eigenvalues_;
    double cond_;
};

/// G^(e)(θ) = Σ_x p_θ(x) s(x) s(x)ᵀ with s the score.
InfoMatrix fisher_matrix(const FiniteModel& model, const Vector& theta);

/// J^λ(θ) = u uᵀ with u = ∂ log λ(θ).
InfoMatrix prior_term(const Prior& prior, const Vector& theta);

/// G^(I)(θ) = λ(θ) [G^(e)(θ) + J^λ(θ)].
InfoMatrix bayesian_metric(const FiniteModel& model, const Prior& prior, const Vector& theta);

/// Inverse through the symmetric eigendecomposition. Raises SingularInformation
/// when any eigenvalue is below 1e-10 times the largest; no pseudo-inverse.
Matrix psd_inverse(const Matrix& m);
Matrix psd_inverse(const InfoMatrix& m);

}  // namespace infobound
