#pragma once

#include "infobound/fisher.hpp"
#include "infobound/model.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace infobound {

enum class BoundKind { BayesianCrlb, CrlbUnbiased, CrlbBiased, Barankin };

std::string_view to_string(BoundKind kind);
std::optional<BoundKind> bound_kind_from_string(std::string_view name);

struct BoundReport {
    BoundKind kind;
    Matrix value;
    /// Empty for prior-averaged bounds.
    std::optional<Vector> eval_point;
    std::map<std::string, double> diagnostics;
    /// Achieving test points (Barankin only).
    std::vector<double> test_points;
};

/// Distinct scalar test points θ^(1..n) for the Barankin quadratic form.
class TestPointSet {
public:
    explicit TestPointSet(std::vector<double> points);

    const std::vector<double>& points() const noexcept { return points_; }
    std::size_t size() const noexcept { return points_.size(); }

private:
    std::vector<double> points_;
};

/// [G^(e)(θ)]^{-1}.
BoundReport crlb_unbiased(const FiniteModel& model, const Vector& theta);

enum class BiasJacobianMode { Diagonal, Full };

/// b(θ) = E_θ[θ̂] - θ.
using BiasFn = std::function<Vector(const Vector&)>;

/// (1 + B') [G^(e)]^{-1} (1 + B')ᵀ + b bᵀ. In Diagonal mode 1 + B' keeps
/// only the diagonal 1 + ∂_i b_i; Full uses I + ∂b/∂θ.
BoundReport crlb_biased(const FiniteModel& model, const Vector& theta, const BiasFn& bias,
                        BiasJacobianMode mode = BiasJacobianMode::Diagonal);

/// Prior-weighted averages over the quadrature grid of the prior. E_λ uses the
/// self-normalized midpoint weights λ(θ_m) / Σ λ(θ_n); nodes outside the
/// model's feasible set (beyond the box) are dropped.
struct PriorAverages {
    Matrix mean_metric;                  ///< E_λ[G^(I)]
    Matrix mean_inverse_metric;          ///< E_λ[(G^(I))^{-1}]
    Matrix mean_inverse_scaled_fisher;   ///< E_λ[(λ G^(e))^{-1}]
    Matrix classical_information;        ///< E_λ[G^(e)] + E_λ[J^λ]
    std::size_t nodes = 0;
};

PriorAverages prior_averages(const FiniteModel& model, const Prior& prior);

/// {E_λ[G^(I)(θ)]}^{-1}. The classical Van Trees variant {E_λ[G^(e) + J^λ]}^{-1}
/// is reported in diagnostics only.
BoundReport bayesian_crlb(const FiniteModel& model, const Prior& prior);

/// E_λ[(G^(I))^{-1}] - {E_λ[G^(I)]}^{-1}; PSD by the matrix Jensen inequality.
Matrix groves_rothenberg_gap(const FiniteModel& model, const Prior& prior);

/// Barankin quadratic form for a fixed scalar test set, maximized over the
/// coefficients in closed form: δᵀ C^{-1} δ with δ_l = θ^(l) - θ and
/// C_lm = Σ_x (p_l - p)(p_m - p) / p. Raises IllConditionedGram when cond(C) > 1e12.
BoundReport barankin_fixed(const FiniteModel& model, double theta, const TestPointSet& points);

struct BarankinSearch {
    int n_max = 3;
    int restarts = 4;
    int grid_points = 33;
    std::uint64_t seed = 0x5eed;
    int max_sweeps = 8;
};

/// Lower estimate of the Barankin supremum: coarse grid seeding, coordinate-wise
/// golden-section ascent and seeded random restarts for each n = 1..n_max. The
/// CRLB, the limit of collapsing test points, is admitted as a candidate
/// (diagnostic "crlb_limit" = 1 when it wins). Deterministic for a given seed.
BoundReport barankin_sup(const FiniteModel& model, double theta, const BarankinSearch& search = {});
BoundReport barankin_sup(const FiniteModel& model, double theta, int n_max, int restarts);

}  // namespace infobound
