#include "infobound/model.hpp"

#include "infobound/errors.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <sstream>

namespace infobound {

namespace {

// Raw pmf mass may differ from 1 by accumulated rounding in user tables; beyond
// this the model itself is wrong.
constexpr double kPmfSumTolerance = 1e-6;
constexpr double kClampMassLimit = 1e-3;
constexpr double kScoreMeanTolerance = 5e-6;

std::string format_theta(const Vector& theta) {
    std::ostringstream os;
    os.precision(17);
    os << '(';
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
        if (i) os << ", ";
        os << theta[i];
    }
    os << ')';
    return os.str();
}

}  // namespace

Alphabet::Alphabet(std::size_t size, std::vector<std::string> labels, std::vector<double> values)
    : size_(size), labels_(std::move(labels)), values_(std::move(values)) {
    if (size_ < 2) throw Error(ErrorKind::InvalidArgument, "alphabet needs at least 2 atoms");
    if (!labels_.empty()) {
        if (labels_.size() != size_)
            throw Error(ErrorKind::InvalidArgument, "alphabet labels must match alphabet size");
        std::set<std::string> unique(labels_.begin(), labels_.end());
        if (unique.size() != labels_.size())
            throw Error(ErrorKind::InvalidArgument, "alphabet labels must be unique");
    }
    if (!values_.empty() && values_.size() != size_)
        throw Error(ErrorKind::InvalidArgument, "alphabet values must match alphabet size");
}

double Alphabet::value(std::size_t atom) const {
    if (atom >= size_) throw Error(ErrorKind::InvalidArgument, "atom index out of range");
    return values_.empty() ? static_cast<double>(atom) : values_[atom];
}

ParameterSpace::ParameterSpace(Vector lower, Vector upper, int grid_points_per_dim)
    : lower_(std::move(lower)), upper_(std::move(upper)), grid_points_(grid_points_per_dim) {
    if (lower_.size() == 0 || lower_.size() != upper_.size())
        throw Error(ErrorKind::InvalidArgument, "parameter bounds must be nonempty and of equal length");
    for (Eigen::Index i = 0; i < lower_.size(); ++i) {
        if (!(lower_[i] < upper_[i]))
            throw Error(ErrorKind::InvalidArgument, "parameter space needs lower < upper on every axis");
    }
    if (grid_points_ < 3) throw Error(ErrorKind::InvalidArgument, "grid_points_per_dim must be >= 3");
    double total = std::pow(static_cast<double>(grid_points_), static_cast<double>(lower_.size()));
    if (total > 5e6) throw Error(ErrorKind::InvalidArgument, "parameter grid too large");
}

ParameterSpace ParameterSpace::interval(double lower, double upper, int grid_points_per_dim) {
    return ParameterSpace(Vector::Constant(1, lower), Vector::Constant(1, upper), grid_points_per_dim);
}

Vector ParameterSpace::cell_width() const {
    return (upper_ - lower_) / static_cast<double>(grid_points_);
}

double ParameterSpace::cell_volume() const { return cell_width().prod(); }

std::size_t ParameterSpace::grid_size() const {
    std::size_t n = 1;
    for (std::size_t i = 0; i < dim(); ++i) n *= static_cast<std::size_t>(grid_points_);
    return n;
}

Vector ParameterSpace::node(std::size_t flat_index) const {
    const Vector width = cell_width();
    Vector theta(lower_.size());
    for (Eigen::Index i = lower_.size() - 1; i >= 0; --i) {
        const auto digit = flat_index % static_cast<std::size_t>(grid_points_);
        flat_index /= static_cast<std::size_t>(grid_points_);
        theta[i] = lower_[i] + (static_cast<double>(digit) + 0.5) * width[i];
    }
    return theta;
}

std::vector<Vector> ParameterSpace::grid_nodes() const {
    std::vector<Vector> nodes;
    const std::size_t n = grid_size();
    nodes.reserve(n);
    for (std::size_t m = 0; m < n; ++m) nodes.push_back(node(m));
    return nodes;
}

bool ParameterSpace::strictly_inside(const Vector& theta) const {
    if (theta.size() != lower_.size()) return false;
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
        if (!(theta[i] > lower_[i] && theta[i] < upper_[i])) return false;
    }
    return true;
}

FiniteModel::FiniteModel(std::string name, Alphabet alphabet, ParameterSpace params, PmfFn pmf,
                         ScoreFn analytic_score, SlackFn constraint_slack, double floor)
    : name_(std::move(name)),
      alphabet_(std::move(alphabet)),
      params_(std::move(params)),
      pmf_(std::move(pmf)),
      score_(std::move(analytic_score)),
      slack_(std::move(constraint_slack)),
      floor_(floor) {
    if (!pmf_) throw Error(ErrorKind::InvalidArgument, "model needs a pmf evaluator");
    if (!(floor_ > 0.0) || floor_ * static_cast<double>(alphabet_.size()) >= 1.0)
        throw Error(ErrorKind::InvalidArgument, "pmf floor must be small and positive");
}

double FiniteModel::constraint_slack(const Vector& theta) const {
    return slack_ ? slack_(theta) : std::numeric_limits<double>::infinity();
}

void require_interior(const FiniteModel& model, const Vector& theta, double margin_rel) {
    const auto& space = model.params();
    if (static_cast<std::size_t>(theta.size()) != space.dim()) {
        throw Error(ErrorKind::DimensionMismatch,
                    "theta has " + std::to_string(theta.size()) + " coordinates, model '" +
                        model.name() + "' has " + std::to_string(space.dim()));
    }
    double margin_sum = 0.0;
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
        const double margin = fd_step(theta[i], margin_rel);
        margin_sum += margin;
        if (!std::isfinite(theta[i]) || !(theta[i] - margin > space.lower()[i]) ||
            !(theta[i] + margin < space.upper()[i])) {
            throw Error(ErrorKind::OutOfDomain, "theta " + format_theta(theta) +
                                                    " is not inside the parameter box of '" +
                                                    model.name() + "' with the required margin");
        }
    }
    if (model.has_constraint() && !(model.constraint_slack(theta) > margin_sum)) {
        throw Error(ErrorKind::OutOfDomain, "theta " + format_theta(theta) +
                                                " violates the parameter constraint of '" +
                                                model.name() + "'");
    }
}

Vector eval_pmf(const FiniteModel& model, const Vector& theta) {
    require_interior(model, theta);
    Vector raw = model.raw_pmf(theta);
    if (static_cast<std::size_t>(raw.size()) != model.alphabet_size())
        throw Error(ErrorKind::DimensionMismatch, "pmf length differs from alphabet size");

    double total = 0.0;
    double deficit = 0.0;
    for (Eigen::Index x = 0; x < raw.size(); ++x) {
        if (!std::isfinite(raw[x]))
            throw Error(ErrorKind::DegeneratePmf, "non-finite pmf entry at " + format_theta(theta));
        total += raw[x];
        deficit += std::max(0.0, model.floor() - raw[x]);
    }
    if (std::abs(total - 1.0) > kPmfSumTolerance) {
        std::ostringstream os;
        os.precision(12);
        os << "pmf of '" << model.name() << "' sums to " << total << " at " << format_theta(theta);
        throw Error(ErrorKind::DegeneratePmf, os.str());
    }
    if (deficit > kClampMassLimit * total) {
        throw Error(ErrorKind::DegeneratePmf,
                    "pmf of '" + model.name() + "' puts too much mass below the floor at " +
                        format_theta(theta));
    }
    Vector p = raw.cwiseMax(model.floor());
    p /= p.sum();
    return p.cwiseMax(model.floor());
}

Matrix score(const FiniteModel& model, const Vector& theta, double rel_step) {
    require_interior(model, theta, rel_step);
    const auto k = static_cast<Eigen::Index>(model.dim());
    const auto d = static_cast<Eigen::Index>(model.alphabet_size());
    const Vector p = eval_pmf(model, theta);

    Matrix s;
    if (model.has_analytic_score()) {
        s = model.raw_score(theta);
        if (s.rows() != k || s.cols() != d)
            throw Error(ErrorKind::DimensionMismatch, "analytic score has the wrong shape");
    } else {
        s.resize(k, d);
        for (Eigen::Index i = 0; i < k; ++i) {
            const double h = fd_step(theta[i], rel_step);
            Vector plus = theta;
            Vector minus = theta;
            plus[i] += h;
            minus[i] -= h;
            s.row(i) = ((eval_pmf(model, plus).array().log() - eval_pmf(model, minus).array().log()) /
                        (2.0 * h))
                           .transpose();
        }
    }

    for (Eigen::Index i = 0; i < k; ++i) {
        const double mean = s.row(i).dot(p);
        if (!(std::abs(mean) < kScoreMeanTolerance)) {
            std::ostringstream os;
            os.precision(6);
            os << "score row " << i << " of '" << model.name() << "' has mean " << mean << " at "
               << format_theta(theta);
            throw Error(ErrorKind::ScoreInconsistent, os.str());
        }
    }
    return s;
}

Prior::Prior(std::string name, ParameterSpace space, LogDensityFn log_density,
             LogGradFn analytic_log_grad, Normalization mode)
    : name_(std::move(name)),
      space_(std::move(space)),
      log_density_(std::move(log_density)),
      log_grad_(std::move(analytic_log_grad)),
      mode_(mode) {
    if (!log_density_) throw Error(ErrorKind::InvalidArgument, "prior needs a density");
    if (mode_ == Normalization::OnGrid) {
        // log-sum-exp over the nodes keeps peaked priors finite
        const std::size_t n = space_.grid_size();
        std::vector<double> logs(n);
        double peak = -std::numeric_limits<double>::infinity();
        for (std::size_t m = 0; m < n; ++m) {
            logs[m] = log_density_(space_.node(m));
            if (std::isnan(logs[m]))
                throw Error(ErrorKind::InvalidArgument, "prior density is NaN on the grid");
            peak = std::max(peak, logs[m]);
        }
        if (!std::isfinite(peak))
            throw Error(ErrorKind::InvalidArgument, "prior density vanishes on the grid");
        double acc = 0.0;
        for (double v : logs) acc += std::exp(v - peak);
        log_scale_ = -(peak + std::log(acc * space_.cell_volume()));
    }
}

double Prior::log_density(const Vector& theta) const {
    if (!space_.strictly_inside(theta))
        throw Error(ErrorKind::OutOfDomain, "prior '" + name_ + "' evaluated outside its box at " +
                                                format_theta(theta));
    const double value = log_density_(theta) + log_scale_;
    if (!std::isfinite(value))
        throw Error(ErrorKind::InvalidArgument, "prior '" + name_ + "' density is not positive at " +
                                                    format_theta(theta));
    return value;
}

double Prior::grid_mass() const {
    double mass = 0.0;
    const std::size_t n = space_.grid_size();
    for (std::size_t m = 0; m < n; ++m) mass += std::exp(log_density_(space_.node(m)) + log_scale_);
    return mass * space_.cell_volume();
}

Vector log_grad_prior(const Prior& prior, const Vector& theta, double rel_step) {
    if (!prior.space().strictly_inside(theta))
        throw Error(ErrorKind::OutOfDomain,
                    "prior '" + prior.name() + "' evaluated outside its box at " + format_theta(theta));
    if (prior.has_analytic_log_grad()) return prior.raw_log_grad(theta);

    Vector grad(theta.size());
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
        const double h = fd_step(theta[i], rel_step);
        Vector plus = theta;
        Vector minus = theta;
        plus[i] += h;
        minus[i] -= h;
        grad[i] = (prior.log_density(plus) - prior.log_density(minus)) / (2.0 * h);
    }
    return grad;
}

}  // namespace infobound
