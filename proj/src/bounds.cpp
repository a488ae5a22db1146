#include "infobound/bounds.hpp"

#include "infobound/errors.hpp"
#include "infobound/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace infobound {

namespace {

constexpr double kMaxGramCondition = 1e12;
constexpr double kMinPointSeparation = 1e-9;
constexpr double kNearTestOffset = 5e-4;
constexpr int kGoldenIterations = 40;

std::string matrix_key(std::string_view prefix, Eigen::Index i, Eigen::Index j) {
    return std::string(prefix) + "_" + std::to_string(i + 1) + "_" + std::to_string(j + 1);
}

void require_scalar(const FiniteModel& model, std::string_view op) {
    if (model.dim() != 1)
        throw Error(ErrorKind::InvalidArgument, std::string(op) + " is defined for scalar parameters only");
}

}  // namespace

std::string_view to_string(BoundKind kind) {
    switch (kind) {
        case BoundKind::BayesianCrlb: return "bayesian_crlb";
        case BoundKind::CrlbUnbiased: return "crlb_unbiased";
        case BoundKind::CrlbBiased: return "crlb_biased";
        case BoundKind::Barankin: return "barankin";
    }
    return "unknown";
}

std::optional<BoundKind> bound_kind_from_string(std::string_view name) {
    for (auto kind : {BoundKind::BayesianCrlb, BoundKind::CrlbUnbiased, BoundKind::CrlbBiased,
                      BoundKind::Barankin}) {
        if (to_string(kind) == name) return kind;
    }
    return std::nullopt;
}

TestPointSet::TestPointSet(std::vector<double> points) : points_(std::move(points)) {
    if (points_.empty()) throw Error(ErrorKind::InvalidArgument, "test point set is empty");
    for (std::size_t a = 0; a < points_.size(); ++a) {
        if (!std::isfinite(points_[a])) throw Error(ErrorKind::InvalidArgument, "test point is not finite");
        for (std::size_t b = a + 1; b < points_.size(); ++b) {
            if (std::abs(points_[a] - points_[b]) <= kMinPointSeparation)
                throw Error(ErrorKind::InvalidArgument, "test points must be distinct");
        }
    }
}

BoundReport crlb_unbiased(const FiniteModel& model, const Vector& theta) {
    const InfoMatrix g = fisher_matrix(model, theta);
    BoundReport report{BoundKind::CrlbUnbiased, psd_inverse(g), theta, {}, {}};
    report.diagnostics["fisher_cond"] = g.cond_estimate();
    return report;
}

BoundReport crlb_biased(const FiniteModel& model, const Vector& theta, const BiasFn& bias,
                        BiasJacobianMode mode) {
    const auto k = static_cast<Eigen::Index>(model.dim());
    require_interior(model, theta, kFdRelStep);
    const Vector b = bias(theta);
    if (b.size() != k) throw Error(ErrorKind::DimensionMismatch, "bias function returns the wrong length");

    Matrix jac(k, k);
    for (Eigen::Index j = 0; j < k; ++j) {
        const double h = fd_step(theta[j], kFdRelStep);
        Vector plus = theta;
        Vector minus = theta;
        plus[j] += h;
        minus[j] -= h;
        jac.col(j) = (bias(plus) - bias(minus)) / (2.0 * h);
    }
    Matrix factor = Matrix::Identity(k, k);
    if (mode == BiasJacobianMode::Diagonal) {
        factor.diagonal() += jac.diagonal();
    } else {
        factor += jac;
    }

    const InfoMatrix g = fisher_matrix(model, theta);
    Matrix value = factor * psd_inverse(g) * factor.transpose() + b * b.transpose();
    value = 0.5 * (value + value.transpose());

    BoundReport report{BoundKind::CrlbBiased, std::move(value), theta, {}, {}};
    report.diagnostics["fisher_cond"] = g.cond_estimate();
    report.diagnostics["full_jacobian"] = mode == BiasJacobianMode::Full ? 1.0 : 0.0;
    for (Eigen::Index i = 0; i < k; ++i) report.diagnostics[matrix_key("bias", i, 0)] = b[i];
    return report;
}

PriorAverages prior_averages(const FiniteModel& model, const Prior& prior) {
    const auto& space = prior.space();
    if (space.dim() != model.dim())
        throw Error(ErrorKind::DimensionMismatch, "prior and model parameter dimensions differ");
    const auto k = static_cast<Eigen::Index>(model.dim());

    struct NodeTerms {
        double log_lambda;
        Matrix fisher;
        Matrix prior_term;
    };
    std::vector<NodeTerms> terms;
    const std::size_t n = space.grid_size();
    terms.reserve(n);
    for (std::size_t m = 0; m < n; ++m) {
        const Vector theta = space.node(m);
        if (model.has_constraint() && !(model.constraint_slack(theta) > 0.0)) continue;
        const double log_lambda = prior.log_density(theta);
        const Vector u = log_grad_prior(prior, theta);
        terms.push_back({log_lambda, fisher_matrix(model, theta).values(), u * u.transpose()});
    }
    if (terms.empty()) throw Error(ErrorKind::InvalidArgument, "no feasible quadrature nodes for the prior");

    double peak = -std::numeric_limits<double>::infinity();
    for (const auto& t : terms) peak = std::max(peak, t.log_lambda);
    double acc = 0.0;
    for (const auto& t : terms) acc += std::exp(t.log_lambda - peak);
    const double log_total = peak + std::log(acc);  // log Σ λ_m

    PriorAverages out;
    out.mean_metric = Matrix::Zero(k, k);
    out.mean_inverse_metric = Matrix::Zero(k, k);
    out.mean_inverse_scaled_fisher = Matrix::Zero(k, k);
    out.classical_information = Matrix::Zero(k, k);
    out.nodes = terms.size();
    const double inv_total = std::exp(-log_total);
    for (const auto& t : terms) {
        const double weight = std::exp(t.log_lambda - log_total);
        const Matrix info = t.fisher + t.prior_term;
        // w·λ and w/λ are formed in log space; λ itself may underflow for peaked priors
        out.mean_metric += std::exp(2.0 * t.log_lambda - log_total) * info;
        out.mean_inverse_metric += inv_total * psd_inverse(info);
        out.mean_inverse_scaled_fisher += inv_total * psd_inverse(t.fisher);
        out.classical_information += weight * info;
    }
    return out;
}

BoundReport bayesian_crlb(const FiniteModel& model, const Prior& prior) {
    const PriorAverages avg = prior_averages(model, prior);
    BoundReport report{BoundKind::BayesianCrlb, psd_inverse(avg.mean_metric), std::nullopt, {}, {}};
    report.diagnostics["quadrature_nodes"] = static_cast<double>(avg.nodes);
    report.diagnostics["mean_metric_cond"] =
        InfoMatrix(avg.mean_metric, InfoKind::Bayesian, Vector()).cond_estimate();
    const Matrix classical = psd_inverse(avg.classical_information);
    for (Eigen::Index i = 0; i < classical.rows(); ++i)
        for (Eigen::Index j = 0; j < classical.cols(); ++j)
            report.diagnostics[matrix_key("classical_van_trees", i, j)] = classical(i, j);
    return report;
}

Matrix groves_rothenberg_gap(const FiniteModel& model, const Prior& prior) {
    const PriorAverages avg = prior_averages(model, prior);
    Matrix gap = avg.mean_inverse_metric - psd_inverse(avg.mean_metric);
    return 0.5 * (gap + gap.transpose());
}

BoundReport barankin_fixed(const FiniteModel& model, double theta, const TestPointSet& points) {
    require_scalar(model, "barankin_fixed");
    const Vector at = Vector::Constant(1, theta);
    const Vector p = eval_pmf(model, at);
    const auto n = static_cast<Eigen::Index>(points.size());

    Matrix centered(p.size(), n);  // column l: (p_l - p) / sqrt(p)
    Vector delta(n);
    const Vector root = p.cwiseSqrt();
    for (Eigen::Index l = 0; l < n; ++l) {
        const double t = points.points()[static_cast<std::size_t>(l)];
        if (std::abs(t - theta) <= kMinPointSeparation)
            throw Error(ErrorKind::InvalidArgument, "test point coincides with the evaluation point");
        centered.col(l) = (eval_pmf(model, Vector::Constant(1, t)) - p).cwiseQuotient(root);
        delta[l] = t - theta;
    }
    Matrix gram = centered.transpose() * centered;
    gram = 0.5 * (gram + gram.transpose());

    Eigen::SelfAdjointEigenSolver<Matrix> solver(gram);
    const Vector& ev = solver.eigenvalues();
    const double cond = ev.minCoeff() > 0.0 ? ev.maxCoeff() / ev.minCoeff()
                                             : std::numeric_limits<double>::infinity();
    if (!(cond <= kMaxGramCondition)) {
        std::ostringstream os;
        os << "likelihood-ratio Gram has condition number " << cond << "; thin the test points";
        throw Error(ErrorKind::IllConditionedGram, os.str());
    }
    const Vector coeff = solver.eigenvectors().transpose() * delta;
    const double value = coeff.cwiseAbs2().cwiseQuotient(ev).sum();

    BoundReport report{BoundKind::Barankin, Matrix::Constant(1, 1, value), at, {}, points.points()};
    report.diagnostics["gram_cond"] = cond;
    report.diagnostics["test_points"] = static_cast<double>(n);
    return report;
}

namespace {

class BarankinSearcher {
public:
    BarankinSearcher(const FiniteModel& model, double theta, const BarankinSearch& opts)
        : model_(model), theta_(theta), opts_(opts) {
        const auto& space = model.params();
        const double lower = space.lower()[0];
        const double upper = space.upper()[0];
        lo_ = lower + fd_step(lower, kFdRelStep);
        hi_ = upper - fd_step(upper, kFdRelStep);
        const int g = std::max(opts.grid_points, 2);
        spacing_ = (hi_ - lo_) / g;
        for (int q = 0; q < g; ++q) add_candidate(lo_ + (q + 0.5) * spacing_);
        add_candidate(theta - kNearTestOffset);
        add_candidate(theta + kNearTestOffset);
        std::sort(candidates_.begin(), candidates_.end());
    }

    double value(const std::vector<double>& pts) {
        ++evaluations_;
        for (std::size_t a = 0; a < pts.size(); ++a) {
            if (!(pts[a] > lo_ && pts[a] < hi_) || std::abs(pts[a] - theta_) <= kMinPointSeparation)
                return -std::numeric_limits<double>::infinity();
            for (std::size_t b = a + 1; b < pts.size(); ++b)
                if (std::abs(pts[a] - pts[b]) <= kMinPointSeparation)
                    return -std::numeric_limits<double>::infinity();
        }
        try {
            return barankin_fixed(model_, theta_, TestPointSet(pts)).value(0, 0);
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::IllConditionedGram) return -std::numeric_limits<double>::infinity();
            throw;
        }
    }

    // Coordinate ascent from `pts`; returns the improved value and updates pts.
    double refine(std::vector<double>& pts) {
        double best = value(pts);
        for (int sweep = 0; sweep < opts_.max_sweeps; ++sweep) {
            const double start = best;
            for (std::size_t l = 0; l < pts.size(); ++l) best = refine_coordinate(pts, l, best);
            if (!(best > start + 1e-12 * std::abs(start))) break;
        }
        return best;
    }

    const std::vector<double>& candidates() const { return candidates_; }
    int evaluations() const { return evaluations_; }

private:
    void add_candidate(double t) {
        if (t > lo_ && t < hi_ && std::abs(t - theta_) > kMinPointSeparation) candidates_.push_back(t);
    }

    double refine_coordinate(std::vector<double>& pts, std::size_t l, double best) {
        std::vector<double> trial = pts;
        double center = pts[l];
        for (double c : candidates_) {
            trial[l] = c;
            const double v = value(trial);
            if (v > best) {
                best = v;
                center = c;
            }
        }
        pts[l] = center;

        // golden section on one grid cell either side, kept on the same side of θ
        double a = std::max(lo_, center - spacing_);
        double b = std::min(hi_, center + spacing_);
        if (a < theta_ && theta_ < b) {
            const double gap = 2.0 * kMinPointSeparation * (1.0 + std::abs(theta_));
            if (center < theta_) b = theta_ - gap; else a = theta_ + gap;
        }
        if (!(b > a)) return best;
        const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
        auto eval_at = [&](double t) {
            trial = pts;
            trial[l] = t;
            return value(trial);
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
            pts[l] = x;
        }
        return best;
    }

    const FiniteModel& model_;
    double theta_;
    BarankinSearch opts_;
    double lo_ = 0.0;
    double hi_ = 0.0;
    double spacing_ = 0.0;
    std::vector<double> candidates_;
    int evaluations_ = 0;
};

// Higher value wins; exact ties go to the lexicographically smaller sorted set.
bool better(double value, std::vector<double> pts, double best_value, std::vector<double> best_pts) {
    if (value != best_value) return value > best_value;
    std::sort(pts.begin(), pts.end());
    std::sort(best_pts.begin(), best_pts.end());
    return std::lexicographical_compare(pts.begin(), pts.end(), best_pts.begin(), best_pts.end());
}

}  // namespace

BoundReport barankin_sup(const FiniteModel& model, double theta, const BarankinSearch& search) {
    require_scalar(model, "barankin_sup");
    if (search.n_max < 1 || search.restarts < 1)
        throw Error(ErrorKind::InvalidArgument, "barankin_sup needs n_max >= 1 and restarts >= 1");
    require_interior(model, Vector::Constant(1, theta));

    BarankinSearcher searcher(model, theta, search);
    const auto& cands = searcher.candidates();
    if (cands.empty()) throw Error(ErrorKind::OutOfDomain, "no admissible test points");

    double overall = -std::numeric_limits<double>::infinity();
    std::vector<double> overall_pts;
    std::vector<double> previous;
    int best_n = 0;

    for (int n = 1; n <= search.n_max && static_cast<std::size_t>(n) <= cands.size(); ++n) {
        double level_best = -std::numeric_limits<double>::infinity();
        std::vector<double> level_pts;
        for (int r = 0; r < search.restarts; ++r) {
            std::vector<double> pts;
            if (r == 0) {
                // greedy: previous optimum plus the best admissible new point
                pts = previous;
                pts.push_back(0.0);
                double seed_best = -std::numeric_limits<double>::infinity();
                double seed_at = cands.front();
                for (double c : cands) {
                    pts.back() = c;
                    const double v = searcher.value(pts);
                    if (v > seed_best) {
                        seed_best = v;
                        seed_at = c;
                    }
                }
                pts.back() = seed_at;
            } else {
                std::vector<double> pool = cands;
                for (int l = 0; l < n; ++l) {
                    const double u = rng::counter_uniform(search.seed, static_cast<std::uint64_t>(r),
                                                          static_cast<std::uint64_t>(n * 64 + l));
                    const auto idx = std::min(pool.size() - 1, static_cast<std::size_t>(u * pool.size()));
                    pts.push_back(pool[idx]);
                    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(idx));
                }
            }
            const double v = searcher.refine(pts);
            if (better(v, pts, level_best, level_pts)) {
                level_best = v;
                level_pts = pts;
            }
        }
        if (!std::isfinite(level_best)) break;
        previous = level_pts;
        if (better(level_best, level_pts, overall, overall_pts)) {
            overall = level_best;
            overall_pts = level_pts;
            best_n = n;
        }
    }

    double crlb = -std::numeric_limits<double>::infinity();
    try {
        crlb = crlb_unbiased(model, Vector::Constant(1, theta)).value(0, 0);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::SingularInformation && e.kind() != ErrorKind::OutOfDomain) throw;
    }

    const bool limit_wins = crlb > overall;
    const double value = limit_wins ? crlb : overall;
    if (!std::isfinite(value)) throw Error(ErrorKind::IllConditionedGram, "no well-conditioned test set found");

    std::sort(overall_pts.begin(), overall_pts.end());
    BoundReport report{BoundKind::Barankin, Matrix::Constant(1, 1, value), Vector::Constant(1, theta), {},
                       overall_pts};
    report.diagnostics["best_test_set_value"] = overall;
    report.diagnostics["crlb_limit"] = limit_wins ? 1.0 : 0.0;
    report.diagnostics["test_points"] = static_cast<double>(best_n);
    report.diagnostics["evaluations"] = static_cast<double>(searcher.evaluations());
    return report;
}

BoundReport barankin_sup(const FiniteModel& model, double theta, int n_max, int restarts) {
    BarankinSearch search;
    search.n_max = n_max;
    search.restarts = restarts;
    return barankin_sup(model, theta, search);
}

}  // namespace infobound
