#include "infobound/divergence.hpp"
#include "infobound/errors.hpp"
#include "infobound/fisher.hpp"
#include "infobound/zoo.hpp"

#include "oracles.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace infobound;
using testutil::kind_of;
using testutil::v1;
using testutil::v2;

namespace {

UnnormalizedMeasure measure(std::initializer_list<double> xs) {
    Vector v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v[i++] = x;
    return UnnormalizedMeasure(v);
}

double rel_frobenius(const Matrix& a, const Matrix& b) { return (a - b).norm() / b.norm(); }

const ParameterSpace kUnit = ParameterSpace::interval(0.0, 1.0, 101);

}  // namespace

TEST(KlUnnormalized, Examples) {
    EXPECT_EQ(kl_unnormalized(measure({0.2, 0.8}), measure({0.2, 0.8})), 0.0);
    EXPECT_NEAR(kl_unnormalized(measure({0.5, 0.5}), measure({0.25, 0.75})),
                0.5 * std::log(2.0) + 0.5 * std::log(2.0 / 3.0), 1e-15);
    EXPECT_NEAR(kl_unnormalized(measure({0.6, 1.4}), measure({0.3, 0.7})), 2.0 * std::log(2.0) - 1.0, 1e-15);
    EXPECT_NEAR(2.0 * std::log(2.0) - 1.0, 0.38629, 1e-5);
    EXPECT_NEAR(0.5 * std::log(2.0) + 0.5 * std::log(2.0 / 3.0), 0.14384, 1e-5);
}

TEST(KlUnnormalized, ScalingClosedForm) {
    const Vector q = (Vector(2) << 0.3, 0.7).finished();
    for (double c : {0.5, 1.0, 2.0, 10.0}) {
        const double got = kl_unnormalized(UnnormalizedMeasure(c * q), UnnormalizedMeasure(q));
        EXPECT_NEAR(got, c * std::log(c) - c + 1.0, 1e-12) << c;
    }
}

TEST(KlUnnormalized, Errors) {
    EXPECT_EQ(kind_of([] { kl_unnormalized(measure({0.5, 0.5}), measure({0.2, 0.3, 0.5})); }),
              ErrorKind::DimensionMismatch);
    EXPECT_EQ(kind_of([] { measure({0.5, 0.0}); }), ErrorKind::InvalidArgument);
    EXPECT_EQ(kind_of([] { measure({0.5, -1.0}); }), ErrorKind::InvalidArgument);
    EXPECT_NEAR(measure({0.25, 2.0, 0.5}).total_mass(), 2.75, 1e-15);
}

TEST(KlUnnormalized, NonnegativeAndZeroOnlyOnEqualPairs) {
    std::mt19937_64 gen(31);
    std::uniform_real_distribution<double> u(0.001, 3.0);
    for (int r = 0; r < 1000; ++r) {
        Vector p(5), q(5);
        for (int i = 0; i < 5; ++i) {
            p[i] = u(gen);
            q[i] = u(gen);
        }
        ASSERT_GT(kl_unnormalized(UnnormalizedMeasure(p), UnnormalizedMeasure(q)), 0.0);
        ASSERT_EQ(kl_unnormalized(UnnormalizedMeasure(p), UnnormalizedMeasure(p)), 0.0);
    }
}

TEST(KlUnnormalized, ZeroOnDiagonalOfDenormalizedFamily) {
    for (const auto& c : testutil::identity_cases())
        for (const auto& prior : c.priors) {
            const auto& space = c.model.params();
            for (std::size_t m = 0; m < space.grid_size(); m += 7) {
                const Vector t = space.node(m);
                if (c.model.has_constraint() && !(c.model.constraint_slack(t) > 0.0)) continue;
                const auto p = denormalized(c.model, prior, t);
                ASSERT_EQ(kl_unnormalized(p, p), 0.0);
            }
        }
}

TEST(MetricFromDivergence, Examples) {
    const auto m = zoo::bernoulli();
    const auto one = zoo::constant_prior(kUnit, 1.0);
    const auto g = metric_from_divergence(m, one, v1(0.5));
    EXPECT_EQ(g.kind(), InfoKind::DivergenceBased);
    EXPECT_NEAR(g.values()(0, 0), 4.0, 1e-3);
    const auto six = zoo::beta_prior(kUnit, 2.0, 2.0, Normalization::AsGiven);
    EXPECT_NEAR(metric_from_divergence(m, six, v1(0.5)).values()(0, 0), 6.0, 2e-3);
}

TEST(MetricFromDivergence, ConstantPriorScalesFisher) {
    std::mt19937_64 gen(32);
    for (auto m : {zoo::bernoulli(), zoo::categorical(3), zoo::categorical(4), zoo::pulse(16, 0.1),
                   zoo::binomial(8)}) {
        const auto c = zoo::constant_prior(m.params(), 2.5);
        for (int r = 0; r < 5; ++r) {
            const Vector t = oracle::random_interior(m, gen, 0.1);
            const Matrix want = 2.5 * fisher_matrix(m, t).values();
            ASSERT_LT(rel_frobenius(metric_from_divergence(m, c, t).values(), want), 1e-3) << m.name();
        }
    }
}

TEST(MetricFromDivergence, AgreesWithBayesianMetric) {
    std::mt19937_64 gen(33);
    for (const auto& c : testutil::identity_cases())
        for (const auto& prior : c.priors)
            for (int r = 0; r < 20; ++r) {
                const Vector t = oracle::random_interior(c.model, gen, 0.02);
                const double err = rel_frobenius(metric_from_divergence(c.model, prior, t).values(),
                                                 bayesian_metric(c.model, prior, t).values());
                ASSERT_LT(err, 1e-3) << c.model.name() << "/" << prior.name() << " at " << t.transpose();
            }
}

TEST(MetricFromDivergence, LargeStepBreaksAgreement) {
    const auto m = zoo::bernoulli();
    const auto six = zoo::beta_prior(kUnit, 2.0, 2.0, Normalization::AsGiven);
    const double err = rel_frobenius(metric_from_divergence(m, six, v1(0.5), 0.1).values(),
                                     bayesian_metric(m, six, v1(0.5)).values());
    EXPECT_GT(err, 1e-3);
}

TEST(Christoffel, BernoulliSymmetricPointSumsToZero) {
    const auto m = zoo::bernoulli();
    const auto one = zoo::constant_prior(kUnit, 1.0);
    const auto c = christoffel_from_divergence(m, one, v1(0.5));
    EXPECT_NEAR(c.gamma_primal(0, 0, 0) + c.gamma_dual(0, 0, 0), 0.0, 1e-2);
    EXPECT_LT(check_dualistic_structure(m, one, v1(0.5)), 1e-2);
}

TEST(Christoffel, BernoulliMatchesHandDerivative) {
    // λ ≡ 1: Γ + Γ* = dg/dθ with g = 1/(θ(1-θ))
    const auto m = zoo::bernoulli();
    const auto one = zoo::constant_prior(kUnit, 1.0);
    const double t = 0.3;
    const auto c = christoffel_from_divergence(m, one, v1(t));
    const double dg = -(1.0 - 2.0 * t) / std::pow(t * (1.0 - t), 2);
    EXPECT_NEAR(c.gamma_primal(0, 0, 0) + c.gamma_dual(0, 0, 0), dg, 1e-2 * std::abs(dg));
}

TEST(Christoffel, ConstantDirectionHasZeroSymbols) {
    ParameterSpace space(Vector::Zero(2), Vector::Ones(2), 5);
    FiniteModel m("first-only", Alphabet(2), space, [](const Vector& t) {
        Vector p(2);
        p << 1.0 - t[0], t[0];
        return p;
    });
    const auto one = zoo::constant_prior(space, 1.0);
    const auto c = christoffel_from_divergence(m, one, v2(0.3, 0.6));
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j)
            for (std::size_t l = 0; l < 2; ++l) {
                if (i != 1 && j != 1 && l != 1) continue;
                EXPECT_EQ(c.gamma_primal(i, j, l), 0.0);
                EXPECT_EQ(c.gamma_dual(i, j, l), 0.0);
            }
    EXPECT_NE(c.gamma_primal(0, 0, 0), 0.0);
}

TEST(Christoffel, SymmetricInFirstTwoIndices) {
    std::mt19937_64 gen(34);
    for (const auto& c : testutil::identity_cases())
        for (const auto& prior : c.priors) {
            const Vector t = oracle::random_interior(c.model, gen, 0.1);
            const auto s = christoffel_from_divergence(c.model, prior, t);
            const std::size_t k = s.gamma_primal.dim();
            for (std::size_t i = 0; i < k; ++i)
                for (std::size_t j = 0; j < k; ++j)
                    for (std::size_t l = 0; l < k; ++l) {
                        ASSERT_NEAR(s.gamma_primal(i, j, l), s.gamma_primal(j, i, l), 1e-6);
                        ASSERT_NEAR(s.gamma_dual(i, j, l), s.gamma_dual(j, i, l), 1e-6);
                    }
        }
}

TEST(DualisticStructure, ResidualExamples) {
    const auto one = zoo::constant_prior(kUnit, 1.0);
    EXPECT_LT(check_dualistic_structure(zoo::bernoulli(), one, v1(0.5)), 1e-2);
    const auto cat = zoo::categorical(3);
    const auto flat = zoo::constant_prior(cat.params(), 1.0);
    EXPECT_LT(check_dualistic_structure(cat, flat, v2(1.0 / 3.0, 1.0 / 3.0)), 1e-2);
    const auto six = zoo::beta_prior(kUnit, 2.0, 2.0, Normalization::AsGiven);
    EXPECT_LT(check_dualistic_structure(zoo::bernoulli(), six, v1(0.4)), 1e-2);
}

TEST(DualisticStructure, ResidualDecaysQuadratically) {
    std::mt19937_64 gen(35);
    for (const auto& c : testutil::identity_cases())
        for (const auto& prior : c.priors)
            for (int r = 0; r < 3; ++r) {
                const Vector t = oracle::random_interior(c.model, gen, 0.2);
                const double r1 = check_dualistic_structure(c.model, prior, t, kCurvatureRelStep);
                const double r2 = check_dualistic_structure(c.model, prior, t, kCurvatureRelStep / 2.0);
                ASSERT_LT(r1, 1e-2) << c.model.name() << "/" << prior.name();
                ASSERT_GE(r1 / r2, 3.0) << c.model.name() << "/" << prior.name() << " at " << t.transpose();
                ASSERT_LE(r1 / r2, 5.0) << c.model.name() << "/" << prior.name() << " at " << t.transpose();
            }
}
