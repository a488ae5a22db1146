#include "infobound/zoo.hpp"

#include "infobound/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>

namespace infobound::zoo {

namespace {

ParameterSpace unit_interval() { return ParameterSpace::interval(0.0, 1.0, 101); }

double log_beta_fn(double a, double b) {
    return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

}  // namespace

FiniteModel bernoulli(std::optional<ParameterSpace> space) {
    ParameterSpace params = space ? *space : unit_interval();
    if (params.dim() != 1 || params.lower()[0] < 0.0 || params.upper()[0] > 1.0)
        throw Error(ErrorKind::InvalidArgument, "bernoulli needs a sub-interval of [0, 1]");
    auto pmf = [](const Vector& t) {
        Vector p(2);
        p << 1.0 - t[0], t[0];
        return p;
    };
    auto score = [](const Vector& t) {
        Matrix s(1, 2);
        s << -1.0 / (1.0 - t[0]), 1.0 / t[0];
        return s;
    };
    return FiniteModel("bernoulli", Alphabet(2, {"0", "1"}), std::move(params), pmf, score);
}

FiniteModel categorical(std::size_t d, int grid_points_per_dim) {
    if (d < 2) throw Error(ErrorKind::InvalidArgument, "categorical needs d >= 2");
    const auto k = static_cast<Eigen::Index>(d - 1);
    if (grid_points_per_dim == 0) grid_points_per_dim = k <= 2 ? 40 : 10;
    ParameterSpace params(Vector::Zero(k), Vector::Ones(k), grid_points_per_dim);
    auto pmf = [k](const Vector& t) {
        Vector p(k + 1);
        p.head(k) = t;
        p[k] = 1.0 - t.sum();
        return p;
    };
    auto score = [k](const Vector& t) {
        const double last = 1.0 - t.sum();
        Matrix s = Matrix::Zero(k, k + 1);
        for (Eigen::Index i = 0; i < k; ++i) {
            s(i, i) = 1.0 / t[i];
            s(i, k) = -1.0 / last;
        }
        return s;
    };
    auto slack = [](const Vector& t) { return 1.0 - t.sum(); };
    return FiniteModel("categorical", Alphabet(d), std::move(params), pmf, score, slack);
}

FiniteModel binomial(unsigned n, std::optional<ParameterSpace> space) {
    if (n == 0) throw Error(ErrorKind::InvalidArgument, "binomial needs n >= 1");
    ParameterSpace params = space ? *space : unit_interval();
    if (params.dim() != 1 || params.lower()[0] < 0.0 || params.upper()[0] > 1.0)
        throw Error(ErrorKind::InvalidArgument, "binomial needs a sub-interval of [0, 1]");
    const auto d = static_cast<Eigen::Index>(n) + 1;
    auto log_choose = std::make_shared<Vector>(d);
    std::vector<double> values(static_cast<std::size_t>(d));
    for (Eigen::Index x = 0; x < d; ++x) {
        (*log_choose)[x] = std::lgamma(n + 1.0) - std::lgamma(x + 1.0) - std::lgamma(n - x + 1.0);
        values[static_cast<std::size_t>(x)] = static_cast<double>(x) / n;
    }
    auto pmf = [n, d, log_choose](const Vector& t) {
        const double lt = std::log(t[0]);
        const double lu = std::log1p(-t[0]);
        Vector p(d);
        for (Eigen::Index x = 0; x < d; ++x)
            p[x] = std::exp((*log_choose)[x] + x * lt + (static_cast<double>(n) - x) * lu);
        return p;
    };
    auto score = [n, d](const Vector& t) {
        Matrix s(1, d);
        const double var = t[0] * (1.0 - t[0]);
        for (Eigen::Index x = 0; x < d; ++x) s(0, x) = (x - n * t[0]) / var;
        return s;
    };
    return FiniteModel("binomial", Alphabet(static_cast<std::size_t>(d), {}, std::move(values)),
                       std::move(params), pmf, score);
}

FiniteModel iid(const FiniteModel& base, unsigned n) {
    if (n == 0) throw Error(ErrorKind::InvalidArgument, "iid needs n >= 1");
    if (n == 1) return base;
    if (base.name() == "bernoulli") return binomial(n, base.params());

    const std::size_t d = base.alphabet_size();
    double total = std::pow(static_cast<double>(d), static_cast<double>(n));
    if (total > static_cast<double>(1u << 22))
        throw Error(ErrorKind::InvalidArgument, "iid product alphabet too large; use fewer copies");
    const auto size = static_cast<std::size_t>(total);

    // digits[x * n + j] = j-th component of product atom x
    auto digits = std::make_shared<std::vector<std::size_t>>(size * n);
    std::vector<double> values(size);
    for (std::size_t x = 0; x < size; ++x) {
        std::size_t rest = x;
        double sum = 0.0;
        for (unsigned j = 0; j < n; ++j) {
            (*digits)[x * n + j] = rest % d;
            sum += base.alphabet().value(rest % d);
            rest /= d;
        }
        values[x] = sum / n;
    }

    auto base_ptr = std::make_shared<FiniteModel>(base);
    auto pmf = [base_ptr, digits, n, size](const Vector& t) {
        const Vector b = base_ptr->raw_pmf(t);
        Vector p(static_cast<Eigen::Index>(size));
        for (std::size_t x = 0; x < size; ++x) {
            double v = 1.0;
            for (unsigned j = 0; j < n; ++j) v *= b[static_cast<Eigen::Index>((*digits)[x * n + j])];
            p[static_cast<Eigen::Index>(x)] = v;
        }
        return p;
    };
    FiniteModel::ScoreFn score_fn;
    if (base.has_analytic_score()) {
        score_fn = [base_ptr, digits, n, size](const Vector& t) {
            const Matrix b = base_ptr->raw_score(t);
            Matrix s = Matrix::Zero(b.rows(), static_cast<Eigen::Index>(size));
            for (std::size_t x = 0; x < size; ++x) {
                for (unsigned j = 0; j < n; ++j)
                    s.col(static_cast<Eigen::Index>(x)) +=
                        b.col(static_cast<Eigen::Index>((*digits)[x * n + j]));
            }
            return s;
        };
    }
    FiniteModel::SlackFn slack;
    if (base.has_constraint()) slack = [base_ptr](const Vector& t) { return base_ptr->constraint_slack(t); };

    return FiniteModel("iid(" + base.name() + "," + std::to_string(n) + ")",
                       Alphabet(size, {}, std::move(values)), base.params(), pmf, score_fn, slack,
                       base.floor());
}

double outlier_weight_from_snr(double snr) {
    if (!(snr >= 0.0)) throw Error(ErrorKind::InvalidArgument, "snr must be nonnegative");
    return 1.0 / (1.0 + snr);
}

namespace {

// Bin-normalized Gaussian kernel and its first moment.
struct Kernel {
    Vector weights;
    double mean = 0.0;
};

Kernel pulse_kernel(Eigen::Index d, double tau, double sigma) {
    Kernel k;
    k.weights.resize(d);
    // exponent relative to the closest bin keeps the peak at O(1)
    double min_sq = std::numeric_limits<double>::infinity();
    for (Eigen::Index x = 0; x < d; ++x) min_sq = std::min(min_sq, (x - tau) * (x - tau));
    for (Eigen::Index x = 0; x < d; ++x)
        k.weights[x] = std::exp(-((x - tau) * (x - tau) - min_sq) / (2.0 * sigma * sigma));
    k.weights /= k.weights.sum();
    for (Eigen::Index x = 0; x < d; ++x) k.mean += k.weights[x] * static_cast<double>(x);
    return k;
}

}  // namespace

FiniteModel pulse(std::size_t d, double eps_out, double sigma, int grid_points_per_dim) {
    if (d < 5) throw Error(ErrorKind::InvalidArgument, "pulse model needs d >= 5");
    if (!(eps_out > 0.0 && eps_out < 1.0))
        throw Error(ErrorKind::InvalidArgument, "pulse outlier weight must lie in (0, 1)");
    if (!(sigma > 0.0)) throw Error(ErrorKind::InvalidArgument, "pulse sigma must be positive");
    const auto bins = static_cast<Eigen::Index>(d);
    const double upper = static_cast<double>(d) - 2.0;
    if (grid_points_per_dim == 0) grid_points_per_dim = 4 * static_cast<int>(d - 3);
    ParameterSpace params = ParameterSpace::interval(1.0, upper, grid_points_per_dim);

    auto pmf = [bins, eps_out, sigma](const Vector& t) {
        const Kernel k = pulse_kernel(bins, t[0], sigma);
        return Vector((1.0 - eps_out) * k.weights.array() + eps_out / static_cast<double>(bins));
    };
    auto score = [bins, eps_out, sigma](const Vector& t) {
        const Kernel k = pulse_kernel(bins, t[0], sigma);
        Matrix s(1, bins);
        for (Eigen::Index x = 0; x < bins; ++x) {
            const double p = (1.0 - eps_out) * k.weights[x] + eps_out / static_cast<double>(bins);
            const double dk = k.weights[x] * (static_cast<double>(x) - k.mean) / (sigma * sigma);
            s(0, x) = (1.0 - eps_out) * dk / p;
        }
        return s;
    };
    return FiniteModel("pulse", Alphabet(d), std::move(params), pmf, score);
}

FiniteModel table(ParameterSpace space, std::vector<std::vector<double>> rows) {
    if (space.dim() != 1) throw Error(ErrorKind::InvalidArgument, "table models are scalar-parameter");
    if (rows.size() != space.grid_size())
        throw Error(ErrorKind::InvalidArgument, "table needs one pmf row per grid node");
    const std::size_t d = rows.front().size();
    for (const auto& row : rows) {
        if (row.size() != d) throw Error(ErrorKind::InvalidArgument, "table rows differ in length");
    }
    auto data = std::make_shared<std::vector<std::vector<double>>>(std::move(rows));
    const double lo = space.lower()[0];
    const double width = space.cell_width()[0];
    auto pmf = [data, lo, width](const Vector& t) {
        const double pos = (t[0] - lo) / width - 0.5;
        const double idx = std::round(pos);
        if (std::abs(pos - idx) > 1e-9 || idx < 0 || idx >= static_cast<double>(data->size()))
            throw Error(ErrorKind::OutOfDomain, "table model evaluated off its grid");
        const auto& row = (*data)[static_cast<std::size_t>(idx)];
        return Vector(Eigen::Map<const Vector>(row.data(), static_cast<Eigen::Index>(row.size())));
    };
    return FiniteModel("table", Alphabet(d), std::move(space), pmf);
}

Prior uniform_prior(const ParameterSpace& space, Normalization mode) {
    const auto k = static_cast<Eigen::Index>(space.dim());
    return Prior(
        "uniform", space, [](const Vector&) { return 0.0; },
        [k](const Vector&) { return Vector(Vector::Zero(k)); }, mode);
}

Prior constant_prior(const ParameterSpace& space, double c) {
    if (!(c > 0.0)) throw Error(ErrorKind::InvalidArgument, "constant prior must be positive");
    const auto k = static_cast<Eigen::Index>(space.dim());
    const double log_c = std::log(c);
    return Prior(
        "constant", space, [log_c](const Vector&) { return log_c; },
        [k](const Vector&) { return Vector(Vector::Zero(k)); }, Normalization::AsGiven);
}

Prior beta_prior(const ParameterSpace& space, double a, double b, Normalization mode) {
    if (!(a >= 1.0 && b >= 1.0))
        throw Error(ErrorKind::InvalidArgument, "beta prior shapes must be >= 1 (bounded density)");
    const Vector lo = space.lower();
    const Vector width = space.upper() - space.lower();
    const double log_norm = log_beta_fn(a, b);
    auto log_density = [lo, width, a, b, log_norm](const Vector& t) {
        double acc = 0.0;
        for (Eigen::Index i = 0; i < t.size(); ++i) {
            const double u = (t[i] - lo[i]) / width[i];
            acc += (a - 1.0) * std::log(u) + (b - 1.0) * std::log1p(-u) - log_norm - std::log(width[i]);
        }
        return acc;
    };
    auto log_grad = [lo, width, a, b](const Vector& t) {
        Vector g(t.size());
        for (Eigen::Index i = 0; i < t.size(); ++i) {
            const double u = (t[i] - lo[i]) / width[i];
            g[i] = ((a - 1.0) / u - (b - 1.0) / (1.0 - u)) / width[i];
        }
        return g;
    };
    return Prior("beta", space, log_density, log_grad, mode);
}

Prior gaussian_prior(const ParameterSpace& space, Normalization mode, std::optional<Vector> mean,
                     std::optional<Vector> sd) {
    const Vector mu = mean ? *mean : Vector(0.5 * (space.lower() + space.upper()));
    const Vector s = sd ? *sd : Vector(0.25 * (space.upper() - space.lower()));
    if (static_cast<std::size_t>(mu.size()) != space.dim() ||
        static_cast<std::size_t>(s.size()) != space.dim())
        throw Error(ErrorKind::DimensionMismatch, "gaussian prior mean/sd must match the parameter dim");
    if ((s.array() <= 0.0).any()) throw Error(ErrorKind::InvalidArgument, "gaussian prior sd must be positive");
    auto log_density = [mu, s](const Vector& t) {
        double acc = 0.0;
        for (Eigen::Index i = 0; i < t.size(); ++i) {
            const double z = (t[i] - mu[i]) / s[i];
            acc += -0.5 * z * z - std::log(s[i] * std::sqrt(2.0 * std::numbers::pi));
        }
        return acc;
    };
    auto log_grad = [mu, s](const Vector& t) {
        return Vector(-((t - mu).array() / (s.array() * s.array())));
    };
    return Prior("gaussian", space, log_density, log_grad, mode);
}

}  // namespace infobound::zoo
