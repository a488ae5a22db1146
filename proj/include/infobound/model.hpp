#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace infobound {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Relative step for first/second derivative central differences.
inline constexpr double kFdRelStep = 1e-4;
/// Relative step for third-order mixed differences.
inline constexpr double kCurvatureRelStep = 1e-3;
inline constexpr double kDefaultFloor = 1e-12;

/// Central-difference step for one coordinate: rel * (1 + |coordinate|).
inline double fd_step(double coordinate, double rel_step) {
    return rel_step * (1.0 + std::abs(coordinate));
}

class Alphabet {
public:
    /// `values` gives a numeric reading of each atom (sample-mean style estimators
    /// average these); atoms read as their index when it is empty.
    explicit Alphabet(std::size_t size, std::vector<std::string> labels = {},
                      std::vector<double> values = {});

    std::size_t size() const noexcept { return size_; }
    const std::vector<std::string>& labels() const noexcept { return labels_; }
    double value(std::size_t atom) const;

private:
    std::size_t size_;
    std::vector<std::string> labels_;
    std::vector<double> values_;
};

/// Axis-aligned box Θ with a uniform quadrature/search grid. Grid nodes are the
/// midpoints of `grid_points_per_dim` equal cells per axis, so no node touches a face.
class ParameterSpace {
public:
    ParameterSpace(Vector lower, Vector upper, int grid_points_per_dim);

    static ParameterSpace interval(double lower, double upper, int grid_points_per_dim);

    std::size_t dim() const noexcept { return static_cast<std::size_t>(lower_.size()); }
    const Vector& lower() const noexcept { return lower_; }
    const Vector& upper() const noexcept { return upper_; }
    int grid_points_per_dim() const noexcept { return grid_points_; }

    Vector cell_width() const;
    double cell_volume() const;
    std::size_t grid_size() const;
    /// Node by flat index; the flat order is lexicographic in θ (first coordinate slowest).
    Vector node(std::size_t flat_index) const;
    std::vector<Vector> grid_nodes() const;

    bool strictly_inside(const Vector& theta) const;

private:
    Vector lower_;
    Vector upper_;
    int grid_points_;
};

/// A parametric family {p_θ} over a finite alphabet. Immutable after construction.
class FiniteModel {
public:
    using PmfFn = std::function<Vector(const Vector&)>;
    using ScoreFn = std::function<Matrix(const Vector&)>;
    using SlackFn = std::function<double(const Vector&)>;

    /// `constraint_slack` expresses feasibility beyond the box (positive inside),
    /// e.g. 1 - Σθ for the simplex chart. Leave empty for box-only models.
    FiniteModel(std::string name, Alphabet alphabet, ParameterSpace params, PmfFn pmf,
                ScoreFn analytic_score = {}, SlackFn constraint_slack = {},
                double floor = kDefaultFloor);

    const std::string& name() const noexcept { return name_; }
    const Alphabet& alphabet() const noexcept { return alphabet_; }
    const ParameterSpace& params() const noexcept { return params_; }
    std::size_t dim() const noexcept { return params_.dim(); }
    std::size_t alphabet_size() const noexcept { return alphabet_.size(); }
    double floor() const noexcept { return floor_; }
    bool has_analytic_score() const noexcept { return static_cast<bool>(score_); }
    bool has_constraint() const noexcept { return static_cast<bool>(slack_); }

    Vector raw_pmf(const Vector& theta) const { return pmf_(theta); }
    Matrix raw_score(const Vector& theta) const { return score_(theta); }
    double constraint_slack(const Vector& theta) const;

private:
    std::string name_;
    Alphabet alphabet_;
    ParameterSpace params_;
    PmfFn pmf_;
    ScoreFn score_;
    SlackFn slack_;
    double floor_;
};

/// Throws OutOfDomain unless every coordinate is farther than
/// margin_rel * (1 + |θ_i|) from both faces and the model constraint holds
/// with the same margin. margin_rel = 0 means strictly inside.
void require_interior(const FiniteModel& model, const Vector& theta, double margin_rel = 0.0);

/// p_θ clamped below at the model floor and renormalized.
Vector eval_pmf(const FiniteModel& model, const Vector& theta);

/// k×d matrix of ∂_i log p_θ(x); analytic when available, else central differences.
Matrix score(const FiniteModel& model, const Vector& theta, double rel_step = kFdRelStep);

enum class Normalization { OnGrid, AsGiven };

/// Smooth positive density λ on a box parameter space. Stored in log form so
/// sharply peaked priors stay representable far from their mode.
class Prior {
public:
    using LogDensityFn = std::function<double(const Vector&)>;
    using LogGradFn = std::function<Vector(const Vector&)>;

    Prior(std::string name, ParameterSpace space, LogDensityFn log_density,
          LogGradFn analytic_log_grad, Normalization mode);

    const std::string& name() const noexcept { return name_; }
    const ParameterSpace& space() const noexcept { return space_; }
    Normalization normalization() const noexcept { return mode_; }
    bool has_analytic_log_grad() const noexcept { return static_cast<bool>(log_grad_); }

    /// log λ(θ) including the grid normalization constant.
    double log_density(const Vector& theta) const;
    double density(const Vector& theta) const { return std::exp(log_density(theta)); }
    Vector raw_log_grad(const Vector& theta) const { return log_grad_(theta); }
    /// Midpoint-rule integral of λ over the grid.
    double grid_mass() const;

private:
    std::string name_;
    ParameterSpace space_;
    LogDensityFn log_density_;
    LogGradFn log_grad_;
    Normalization mode_;
    double log_scale_ = 0.0;
};

/// ∂_i log λ(θ); analytic when available, else central differences of log λ.
Vector log_grad_prior(const Prior& prior, const Vector& theta, double rel_step = kFdRelStep);

}  // namespace infobound
