#include "infobound/bounds.hpp"
#include "infobound/montecarlo.hpp"
#include "infobound/rng.hpp"
#include "infobound/zoo.hpp"

#include "oracles.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

using namespace infobound;
using testutil::kind_of;
using testutil::v1;

namespace {

// textbook SplitMix64 step, written out independently of the library
std::uint64_t splitmix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t reference_hash(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
    const std::uint64_t g = 0x9E3779B97F4A7C15ULL;
    std::uint64_t h = splitmix(seed + g);
    h = splitmix(h + (stream + 1) * g);
    return splitmix(h ^ ((index + 1) * 0xC2B2AE3D27D4EB4FULL));
}

std::string hex(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::vector<std::size_t> ones_zeros(std::size_t ones, std::size_t zeros) {
    std::vector<std::size_t> d(ones, 1);
    d.insert(d.end(), zeros, 0);
    return d;
}

void expect_decomposition(const McEstimate& e) {
    const Matrix rebuilt = e.cov + e.mean_error * e.mean_error.transpose();
    EXPECT_LT((e.mse - rebuilt).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT((e.mse - e.mse.transpose()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_GE(Eigen::SelfAdjointEigenSolver<Matrix>(e.cov).eigenvalues().minCoeff(), -1e-10);
}

}  // namespace

TEST(CounterRng, MatchesReferenceMixer) {
    for (std::uint64_t s : {0ULL, 1ULL, 42ULL, 0xFFFFFFFFFFFFFFFFULL})
        for (std::uint64_t st : {0ULL, 7ULL, 1ULL << 63})
            for (std::uint64_t i : {0ULL, 1ULL, 999ULL}) EXPECT_EQ(rng::counter_hash(s, st, i), reference_hash(s, st, i));
    const double u = rng::counter_uniform(3, 4, 5);
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
}

TEST(Sample, GoldenSeed42) {
    const auto golden = nlohmann::json::parse(oracle::read_file(std::string(INFOBOUND_GOLDEN_DIR) + "/sample_seed42.json"));
    const auto draws = sample(zoo::bernoulli(), v1(0.5), 10, 42);
    EXPECT_EQ(draws, golden.at("draws").get<std::vector<std::size_t>>());
    const auto hashes = golden.at("hashes").get<std::vector<std::string>>();
    ASSERT_EQ(hashes.size(), 10u);
    for (std::size_t i = 0; i < hashes.size(); ++i) EXPECT_EQ(hex(reference_hash(42, 0, i)), hashes[i]);
}

TEST(Sample, ReproducibleAndStreamDependent) {
    const auto m = zoo::categorical(4);
    const Vector t = Vector::Constant(3, 0.2);
    EXPECT_EQ(sample(m, t, 500, 9), sample(m, t, 500, 9));
    EXPECT_NE(sample(m, t, 500, 9), sample(m, t, 500, 9, 1));
    EXPECT_NE(sample(m, t, 500, 9), sample(m, t, 500, 10));
}

TEST(Sample, NearDeterministicPmf) {
    const auto m = zoo::bernoulli();
    const double top = m.params().upper()[0];
    const auto d = sample(m, v1(top - 1e-6), 100, 5);
    std::size_t zeros = 0;
    for (auto x : d) zeros += x == 0;
    EXPECT_LE(zeros, 3u);
}

TEST(Sample, FrequenciesMatchPmf) {
    const auto m = zoo::pulse(8, 0.3);
    const Vector t = v1(3.4);
    const Vector p = eval_pmf(m, t);
    const std::size_t n = 1000000;
    const auto d = sample(m, t, n, 123);
    std::vector<double> freq(static_cast<std::size_t>(p.size()), 0.0);
    for (auto x : d) freq[x] += 1.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        const double f = freq[static_cast<std::size_t>(i)] / static_cast<double>(n);
        EXPECT_LE(std::abs(f - p[i]), 4.0 * std::sqrt(p[i] * (1.0 - p[i]) / static_cast<double>(n))) << "symbol " << i;
    }
}

TEST(Sample, RejectsBoundaryTheta) {
    EXPECT_EQ(kind_of([] { sample(zoo::bernoulli(), v1(1.0), 3, 1); }), ErrorKind::OutOfDomain);
}

TEST(MleGrid, BernoulliSampleMean) {
    const auto m = zoo::bernoulli();
    const double cell = (m.params().upper()[0] - m.params().lower()[0]) / m.params().grid_points_per_dim();
    EXPECT_NEAR(mle_grid(m, ones_zeros(60, 40))[0], 0.6, cell);
    EXPECT_NEAR(mle_grid(m, ones_zeros(60, 40))[0], 0.6, 1e-6);
}

TEST(MleGrid, PulseAtItsBin) {
    const auto m = zoo::pulse(32, 0.05);
    const std::vector<std::size_t> d(20, 12);
    const double cell = (m.params().upper()[0] - m.params().lower()[0]) / m.params().grid_points_per_dim();
    EXPECT_NEAR(mle_grid(m, d)[0], 12.0, cell);
}

TEST(MleGrid, DegenerateCategoricalDataStaysInside) {
    const auto m = zoo::categorical(3);
    const std::vector<std::size_t> d(30, 0);
    const Vector t = mle_grid(m, d);
    EXPECT_NO_THROW(require_interior(m, t));
    // no feasible grid node sits closer to the vertex e_0
    for (const auto& node : m.params().grid_nodes())
        if (m.constraint_slack(node) > 0.0) EXPECT_LE(node[0], t[0] + 1e-12);
    EXPECT_GT(t[0], 0.9);
}

TEST(MleGrid, EmptyDataRejected) {
    EXPECT_EQ(kind_of([] { mle_grid(zoo::bernoulli(), {}); }), ErrorKind::InvalidArgument);
}

TEST(PosteriorMean, BetaBernoulliConjugate) {
    const auto m = zoo::bernoulli();
    const auto prior = zoo::beta_prior(m.params(), 2.0, 2.0, Normalization::OnGrid);
    const std::vector<std::size_t> one{1};
    EXPECT_NEAR(posterior_mean(m, prior, one)[0], 3.0 / 5.0, 1e-2);
}

TEST(PosteriorMean, SymmetricDataGivesHalf) {
    const auto m = zoo::bernoulli();
    for (const auto& prior : {zoo::uniform_prior(m.params(), Normalization::OnGrid),
                              zoo::beta_prior(m.params(), 2.0, 2.0, Normalization::OnGrid)})
        EXPECT_NEAR(posterior_mean(m, prior, ones_zeros(7, 7))[0], 0.5, 1e-10);
}

TEST(PosteriorMean, NearDeltaPriorDominates) {
    const auto space = ParameterSpace::interval(0.0, 1.0, 200);
    const auto m = zoo::bernoulli(space);
    const auto prior = zoo::gaussian_prior(space, Normalization::OnGrid, v1(0.3025), v1(1e-4));
    EXPECT_NEAR(posterior_mean(m, prior, ones_zeros(12, 3))[0], 0.3025, 1.0 / 200.0);
}

TEST(PosteriorMean, UnderflowSignalled) {
    const auto m = zoo::bernoulli(ParameterSpace::interval(0.0, 1.0, 50));
    const auto prior = zoo::uniform_prior(m.params(), Normalization::OnGrid);
    // neighbouring nodes differ by ~0.02 per observation in log-likelihood
    EXPECT_NO_THROW(posterior_mean(m, prior, ones_zeros(1000, 0)));
    EXPECT_EQ(kind_of([&] { posterior_mean(m, prior, ones_zeros(100000, 0)); }), ErrorKind::PosteriorUnderflow);
}

TEST(Estimators, Registry) {
    EXPECT_EQ(EstimatorSpec::parse("shrink:0.5").kind, EstimatorSpec::Kind::Shrink);
    EXPECT_DOUBLE_EQ(EstimatorSpec::parse("shrink:0.5").parameter, 0.5);
    EXPECT_EQ(EstimatorSpec::parse("const:0").kind, EstimatorSpec::Kind::Constant);
    EXPECT_EQ(EstimatorSpec::parse("posterior_mean").kind, EstimatorSpec::Kind::PosteriorMean);
    for (const char* s : {"mle", "mean", "identity", "shrink:0.9", "const:0.25"})
        EXPECT_EQ(EstimatorSpec::parse(EstimatorSpec::parse(s).name()).name(), EstimatorSpec::parse(s).name());
    EXPECT_EQ(kind_of([] { EstimatorSpec::parse("median"); }), ErrorKind::InvalidArgument);
    EXPECT_EQ(kind_of([] { EstimatorSpec::parse("shrink:x"); }), ErrorKind::InvalidArgument);
    const auto m = zoo::bernoulli();
    EXPECT_EQ(kind_of([&] { make_estimator(EstimatorSpec::parse("posterior_mean"), m); }),
              ErrorKind::InvalidArgument);
}

TEST(EmpiricalMse, IdentityEstimatorHitsCrlb) {
    const auto m = zoo::bernoulli();
    const auto e = empirical_mse(m, v1(0.5), EstimatorSpec::parse("identity"), {20000, 1, 11, 1});
    EXPECT_LE(std::abs(e.mse(0, 0) - 0.25), e.ci_halfwidth(0, 0));
    EXPECT_EQ(e.trials, 20000u);
    EXPECT_EQ(e.seed, 11u);
    expect_decomposition(e);
}

TEST(EmpiricalMse, ConstantEstimatorIsExact) {
    const auto e = empirical_mse(zoo::bernoulli(), v1(0.5), EstimatorSpec::parse("const:0"), {1000, 1, 3, 1});
    EXPECT_EQ(e.mse(0, 0), 0.25);
    EXPECT_EQ(e.cov(0, 0), 0.0);
    EXPECT_EQ(e.ci_halfwidth(0, 0), 0.0);
    expect_decomposition(e);
}

TEST(EmpiricalMse, ShrinkageMatchesBiasedBound) {
    const auto m = zoo::bernoulli();
    const auto e = empirical_mse(m, v1(0.5), EstimatorSpec::parse("shrink:0.5"), {20000, 1, 12, 1});
    const double bound =
        crlb_biased(m, v1(0.5), [](const Vector& t) { return Vector(-0.5 * t); }).value(0, 0);
    EXPECT_NEAR(bound, 0.125, 1e-9);
    EXPECT_LE(std::abs(e.mse(0, 0) - 0.125), e.ci_halfwidth(0, 0));
    expect_decomposition(e);
}

TEST(EmpiricalMse, DecompositionOnVectorParameter) {
    const auto m = zoo::categorical(3);
    const Vector t = testutil::v2(0.25, 0.45);
    const auto prior = zoo::uniform_prior(m.params(), Normalization::OnGrid);
    for (const char* est : {"mle", "posterior_mean"}) {
        const auto e = empirical_mse(m, t, EstimatorSpec::parse(est), {2000, 5, 21, 1}, &prior);
        expect_decomposition(e);
        EXPECT_EQ(e.mse.rows(), 2);
    }
}

TEST(EmpiricalMse, BitIdenticalAcrossThreadCounts) {
    const auto m = zoo::pulse(16, 0.2);
    const auto prior = zoo::uniform_prior(m.params(), Normalization::OnGrid);
    for (const char* est : {"mle", "posterior_mean"}) {
        const auto a = empirical_mse(m, v1(7.3), EstimatorSpec::parse(est), {3000, 2, 77, 1}, &prior);
        const auto b = empirical_mse(m, v1(7.3), EstimatorSpec::parse(est), {3000, 2, 77, 4}, &prior);
        EXPECT_EQ(a.mse, b.mse) << est;
        EXPECT_EQ(a.mean, b.mean);
        EXPECT_EQ(a.ci_halfwidth, b.ci_halfwidth);
    }
}

TEST(PriorAveragedMse, PosteriorMeanAboveBoundAtTwenty) {
    const auto bern = zoo::bernoulli();
    const auto prior = zoo::beta_prior(bern.params(), 2.0, 2.0, Normalization::OnGrid);
    const double bound = bayesian_crlb(zoo::binomial(20), prior).value(0, 0);
    const auto r = prior_averaged_mse(bern, prior, EstimatorSpec::parse("posterior_mean"), {20000, 20, 5, 1});
    EXPECT_GE(r.about_truth.mse(0, 0), bound - r.about_truth.ci_halfwidth(0, 0));
    expect_decomposition(r.about_truth);
    EXPECT_GE(r.conditional_variance(0, 0), 0.0);
}

TEST(PriorAveragedMse, BayesRiskBelowBoundForOneObservation) {
    // the exact Bayes risk of the posterior mean under Beta(2,2) is 1/(5(n+4)),
    // while the bound evaluates to 1/(6(n+2)); they cross at n = 8
    const auto prior_space = zoo::bernoulli().params();
    const auto prior = zoo::beta_prior(prior_space, 2.0, 2.0, Normalization::OnGrid);
    for (unsigned n : {1u, 8u, 20u}) {
        const auto m = zoo::binomial(n);
        const GridPosterior post(m, prior);
        double risk = 0.0;
        double mass = 0.0;
        for (const auto& t : prior_space.grid_nodes()) {
            const double w = prior.density(t);
            const Vector p = eval_pmf(m, t);
            for (Eigen::Index k = 0; k < p.size(); ++k) {
                const std::size_t x = static_cast<std::size_t>(k);
                const double e = post.estimate({&x, 1})[0] - t[0];
                risk += w * p[k] * e * e;
            }
            mass += w;
        }
        risk /= mass;
        const double bound = bayesian_crlb(m, prior).value(0, 0);
        EXPECT_NEAR(risk, 1.0 / (5.0 * (n + 4)), 1e-5) << n;
        EXPECT_NEAR(bound, 1.0 / (6.0 * (n + 2)), 1e-5) << n;
        if (n == 1) EXPECT_LT(risk, bound);
        if (n == 20) EXPECT_GT(risk, bound);
    }
}
