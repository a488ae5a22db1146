#include "infobound/divergence.hpp"

#include "infobound/errors.hpp"

#include <cmath>
#include <sstream>

namespace infobound {

namespace {

constexpr double kMetricNegativeEigenLimit = 1e-6;

Vector steps_at(const Vector& theta, double rel_step) {
    Vector h(theta.size());
    for (Eigen::Index i = 0; i < theta.size(); ++i) h[i] = fd_step(theta[i], rel_step);
    return h;
}

class DivergenceMap {
public:
    DivergenceMap(const FiniteModel& model, const Prior& prior) : model_(model), prior_(prior) {}

    double operator()(const Vector& a, const Vector& b) const {
        return kl_unnormalized(denormalized(model_, prior_, a), denormalized(model_, prior_, b));
    }

private:
    const FiniteModel& model_;
    const Prior& prior_;
};

Matrix raw_metric(const DivergenceMap& div, const Vector& theta, double rel_step) {
    const Eigen::Index k = theta.size();
    const Vector h = steps_at(theta, rel_step);
    Matrix g(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
        for (Eigen::Index j = 0; j < k; ++j) {
            double acc = 0.0;
            for (int si : {1, -1}) {
                for (int sj : {1, -1}) {
                    Vector a = theta;
                    Vector b = theta;
                    a[i] += si * h[i];
                    b[j] += sj * h[j];
                    acc += si * sj * div(a, b);
                }
            }
            g(i, j) = -acc / (4.0 * h[i] * h[j]);
        }
    }
    return 0.5 * (g + g.transpose());
}

// -∂_i ∂_j ∂'_l D when `dual` is false, -∂_l ∂'_i ∂'_j D when true.
double third_mixed(const DivergenceMap& div, const Vector& theta, const Vector& h, Eigen::Index i,
                   Eigen::Index j, Eigen::Index l, bool dual) {
    double acc = 0.0;
    for (int si : {1, -1}) {
        for (int sj : {1, -1}) {
            for (int sl : {1, -1}) {
                Vector a = theta;
                Vector b = theta;
                Vector& pair_side = dual ? b : a;
                Vector& single_side = dual ? a : b;
                pair_side[i] += si * h[i];
                pair_side[j] += sj * h[j];
                single_side[l] += sl * h[l];
                acc += si * sj * sl * div(a, b);
            }
        }
    }
    return -acc / (8.0 * h[i] * h[j] * h[l]);
}

}  // namespace

UnnormalizedMeasure::UnnormalizedMeasure(Vector values) : values_(std::move(values)) {
    if (values_.size() == 0) throw Error(ErrorKind::InvalidArgument, "measure must be nonempty");
    for (Eigen::Index x = 0; x < values_.size(); ++x) {
        if (!(values_[x] > 0.0) || !std::isfinite(values_[x]))
            throw Error(ErrorKind::InvalidArgument, "measure entries must be finite and positive");
    }
    total_mass_ = values_.sum();
}

UnnormalizedMeasure denormalized(const FiniteModel& model, const Prior& prior, const Vector& theta) {
    return UnnormalizedMeasure(eval_pmf(model, theta) * prior.density(theta));
}

double kl_unnormalized(const UnnormalizedMeasure& p, const UnnormalizedMeasure& q) {
    if (p.size() != q.size()) {
        throw Error(ErrorKind::DimensionMismatch, "measures of size " + std::to_string(p.size()) +
                                                      " and " + std::to_string(q.size()));
    }
    const Vector& pv = p.values();
    const Vector& qv = q.values();
    double total = 0.0;
    for (Eigen::Index x = 0; x < pv.size(); ++x) {
        const double u = (pv[x] - qv[x]) / qv[x];
        // q·φ(1+u), φ(1+u) = (1+u)log1p(u) - u >= 0
        total += qv[x] * std::max(0.0, (1.0 + u) * std::log1p(u) - u);
    }
    return total;
}

InfoMatrix metric_from_divergence(const FiniteModel& model, const Prior& prior, const Vector& theta,
                                  double rel_step) {
    require_interior(model, theta, 2.0 * rel_step);
    const DivergenceMap div(model, prior);
    Matrix g = raw_metric(div, theta, rel_step);

    Eigen::SelfAdjointEigenSolver<Matrix> solver(g, Eigen::EigenvaluesOnly);
    if (solver.eigenvalues().minCoeff() < -kMetricNegativeEigenLimit) {
        std::ostringstream os;
        os << "divergence metric has eigenvalue " << solver.eigenvalues().minCoeff()
           << "; reduce the step or check the model";
        throw Error(ErrorKind::NotPsd, os.str());
    }
    // already screened at the absolute limit above
    return InfoMatrix(std::move(g), InfoKind::DivergenceBased, theta, 1.0);
}

ChristoffelTriple christoffel_from_divergence(const FiniteModel& model, const Prior& prior,
                                              const Vector& theta, double rel_step) {
    require_interior(model, theta, 3.0 * rel_step);
    const DivergenceMap div(model, prior);
    const auto k = static_cast<std::size_t>(theta.size());
    const Vector h = steps_at(theta, rel_step);
    ChristoffelTriple out{SymbolArray(k), SymbolArray(k), theta};
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i; j < k; ++j) {
            for (std::size_t l = 0; l < k; ++l) {
                const auto ii = static_cast<Eigen::Index>(i);
                const auto jj = static_cast<Eigen::Index>(j);
                const auto ll = static_cast<Eigen::Index>(l);
                const double primal = third_mixed(div, theta, h, ii, jj, ll, false);
                const double dual = third_mixed(div, theta, h, ii, jj, ll, true);
                out.gamma_primal(i, j, l) = out.gamma_primal(j, i, l) = primal;
                out.gamma_dual(i, j, l) = out.gamma_dual(j, i, l) = dual;
            }
        }
    }
    return out;
}

double check_dualistic_structure(const FiniteModel& model, const Prior& prior, const Vector& theta,
                                 double rel_step) {
    const ChristoffelTriple symbols = christoffel_from_divergence(model, prior, theta, rel_step);
    const DivergenceMap div(model, prior);
    const auto k = static_cast<std::size_t>(theta.size());
    const Vector h = steps_at(theta, rel_step);
    double residual = 0.0;
    for (std::size_t l = 0; l < k; ++l) {
        const auto ll = static_cast<Eigen::Index>(l);
        Vector plus = theta;
        Vector minus = theta;
        plus[ll] += h[ll];
        minus[ll] -= h[ll];
        const Matrix dg = (raw_metric(div, plus, rel_step) - raw_metric(div, minus, rel_step)) / (2.0 * h[ll]);
        for (std::size_t i = 0; i < k; ++i) {
            for (std::size_t j = 0; j < k; ++j) {
                const double r = dg(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) -
                                 symbols.gamma_primal(l, i, j) - symbols.gamma_dual(l, j, i);
                residual = std::max(residual, std::abs(r));
            }
        }
    }
    return residual;
}

}  // namespace infobound
