#include "infobound/fisher.hpp"

#include "infobound/errors.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

namespace infobound {

namespace {

constexpr double kSymmetryTolerance = 1e-10;
constexpr double kSingularRatio = 1e-10;

}  // namespace

std::string_view to_string(InfoKind kind) {
    switch (kind) {
        case InfoKind::ScoreFisher: return "score_fisher";
        case InfoKind::PriorTerm: return "prior_term";
        case InfoKind::Bayesian: return "bayesian";
        case InfoKind::DivergenceBased: return "divergence_based";
    }
    return "unknown";
}

InfoMatrix::InfoMatrix(Matrix values, InfoKind kind, Vector eval_point, double psd_tolerance)
    : values_(std::move(values)), kind_(kind), eval_point_(std::move(eval_point)) {
    if (values_.rows() != values_.cols() || values_.rows() == 0)
        throw Error(ErrorKind::DimensionMismatch, "information matrix must be square and nonempty");
    const double scale = std::max(1.0, values_.cwiseAbs().maxCoeff());
    if ((values_ - values_.transpose()).cwiseAbs().maxCoeff() > kSymmetryTolerance * scale)
        throw Error(ErrorKind::NotPsd, "information matrix is not symmetric");
    if (!values_.allFinite()) throw Error(ErrorKind::NotPsd, "information matrix has non-finite entries");

    Eigen::SelfAdjointEigenSolver<Matrix> solver(values_, Eigen::EigenvaluesOnly);
    eigenvalues_ = solver.eigenvalues();
    const double lo = eigenvalues_.minCoeff();
    const double hi = eigenvalues_.maxCoeff();
    if (lo < -psd_tolerance * std::max(1.0, std::abs(hi))) {
        std::ostringstream os;
        os << std::string(to_string(kind_)) << " matrix has eigenvalue " << lo;
        throw Error(ErrorKind::NotPsd, os.str());
    }
    cond_ = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
}

InfoMatrix fisher_matrix(const FiniteModel& model, const Vector& theta) {
    const Matrix s = score(model, theta);
    const Vector p = eval_pmf(model, theta);
    Matrix g = s * p.asDiagonal() * s.transpose();
    g = 0.5 * (g + g.transpose());
    return InfoMatrix(std::move(g), InfoKind::ScoreFisher, theta);
}

InfoMatrix prior_term(const Prior& prior, const Vector& theta) {
    const Vector u = log_grad_prior(prior, theta);
    return InfoMatrix(u * u.transpose(), InfoKind::PriorTerm, theta);
}

InfoMatrix bayesian_metric(const FiniteModel& model, const Prior& prior, const Vector& theta) {
    const InfoMatrix g = fisher_matrix(model, theta);
    const InfoMatrix j = prior_term(prior, theta);
    return InfoMatrix(prior.density(theta) * (g.values() + j.values()), InfoKind::Bayesian, theta);
}

Matrix psd_inverse(const Matrix& m) {
    if (m.rows() != m.cols() || m.rows() == 0)
        throw Error(ErrorKind::DimensionMismatch, "psd_inverse needs a square matrix");
    const Matrix sym = 0.5 * (m + m.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
    const Vector& ev = solver.eigenvalues();
    const double hi = ev.maxCoeff();
    if (!(hi > 0.0) || ev.minCoeff() < kSingularRatio * hi) {
        std::ostringstream os;
        os << "information matrix eigenvalues span [" << ev.minCoeff() << ", " << hi
           << "]; parameter is not identifiable here";
        throw Error(ErrorKind::SingularInformation, os.str());
    }
    const Matrix& q = solver.eigenvectors();
    Matrix inv = q * ev.cwiseInverse().asDiagonal() * q.transpose();
    return 0.5 * (inv + inv.transpose());
}

Matrix psd_inverse(const InfoMatrix& m) { return psd_inverse(m.values()); }

}  // namespace infobound
