#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "confbound/dataset.hpp"
#include "confbound/logdensity.hpp"
#include "confbound/models.hpp"
#include "confbound/stats.hpp"
#include "test_util.hpp"

using namespace confbound;

namespace {

// Reference weighted-least-squares optimum of the toy dataset (closed form
// from the normal equations of a*x + b under weights 1/sigma^2).
constexpr double kToyA = 1.2306338028169024;
constexpr double kToyB = 2.6813380281690167;

TEST(GaussianLoglik, StandardNormalAtZero) {
    const double y[1] = {0.0}, p[1] = {0.0}, s[1] = {1.0};
    EXPECT_NEAR(gaussian_loglik(y, p, s), -0.9189385332046727, 1e-12);
}

TEST(GaussianLoglik, ToyDatasetMatchesDirectSummation) {
    auto data = toy_dataset();
    ToyLineModel model{ToyKind::Linear};
    const double theta[2] = {kToyA, kToyB};
    auto pred = embed(model, data, theta);
    const double got = gaussian_loglik<double>(data.ys, pred, data.cov);
    // independent direct-formula oracle
    double expect = -0.5 * 3 * std::log(2 * std::numbers::pi);
    const double sig[3] = {0.5, 0.45, 0.6};
    for (int i = 0; i < 3; ++i) {
        const double r = data.ys[i] - pred[i];
        expect += -std::log(sig[i]) - 0.5 * r * r / (sig[i] * sig[i]);
    }
    EXPECT_NEAR(got, expect, 1e-12);
}

TEST(GaussianLoglik, SigmaDoublingIdentity) {
    auto data = toy_dataset();
    ToyLineModel model{ToyKind::Linear};
    const double theta[2] = {1.0, 2.0};
    auto pred = embed(model, data, theta);
    const double base = gaussian_loglik<double>(data.ys, pred, data.cov);
    auto doubled = Covariance::diagonal({1.0, 0.9, 1.2});
    const double wide = gaussian_loglik<double>(data.ys, pred, doubled);
    // quadratic part shrinks by 4, constant shifts by -N ln 2
    double quad = 0.0;
    const double sig[3] = {0.5, 0.45, 0.6};
    for (int i = 0; i < 3; ++i) {
        const double r = data.ys[i] - pred[i];
        quad += r * r / (sig[i] * sig[i]);
    }
    EXPECT_NEAR(wide - base, 0.5 * quad * (1.0 - 0.25) - 3.0 * std::log(2.0), 1e-12);
}

TEST(GaussianLoglik, DiagonalEqualsSumOfScalarDensities) {
    auto data = toy_dataset();
    const double pred[3] = {3.9, 5.2, 6.1};
    const double got = gaussian_loglik<double>(data.ys, pred, data.cov);
    double expect = 0.0;
    const double sig[3] = {0.5, 0.45, 0.6};
    for (int i = 0; i < 3; ++i) {
        const double y1[1] = {data.ys[i]}, p1[1] = {pred[i]}, s1[1] = {sig[i]};
        expect += gaussian_loglik(y1, p1, s1);
    }
    EXPECT_NEAR(got, expect, 1e-12);
}

TEST(GaussianLoglik, DenseCovarianceMatchesDiagonalSpecialCase) {
    const double y[2] = {1.0, -0.5}, p[2] = {0.2, 0.2};
    auto diag = Covariance::diagonal({0.7, 1.3});
    auto dense = Covariance::dense(2, {0.49, 0.0, 0.0, 1.69});
    EXPECT_NEAR(gaussian_loglik<double>(y, p, diag), gaussian_loglik<double>(y, p, dense), 1e-12);
}

TEST(GaussianLoglik, RejectsNonPositiveDefiniteCovariance) {
    EXPECT_THROW(Covariance::dense(2, {1.0, 2.0, 2.0, 1.0}), CovarianceError);
    EXPECT_THROW(Covariance::diagonal({1.0, 0.0}), CovarianceError);
}

TEST(GaussianLoglik, RejectsShapeMismatch) {
    const double y[2] = {0.0, 1.0}, p[2] = {0.0, 1.0};
    auto cov = Covariance::diagonal({1.0, 1.0, 1.0});
    EXPECT_THROW((gaussian_loglik<double>(y, p, cov)), InputError);
}

TEST(ChisqQuantile, OneDofOneSigma) {
    EXPECT_NEAR(chisq_quantile(1, sigma_to_level(1.0)), 1.0, 1e-9);
}

TEST(ChisqQuantile, ThreeDofOneSigma) {
    EXPECT_NEAR(chisq_quantile(3, sigma_to_level(1.0)), 3.53, 0.005);
}

TEST(ChisqQuantile, TwoDofClosedForm) {
    EXPECT_NEAR(chisq_quantile(2, 0.95), -2.0 * std::log(0.05), 1e-10);
    EXPECT_NEAR(chisq_quantile(2, 0.95), 5.9915, 5e-5);
}

TEST(ChisqQuantile, RoundTripAgainstCdf) {
    for (int k = 1; k <= 6; ++k)
        for (double q = 0.01; q < 0.995; q += 0.07) {
            const double x = chisq_quantile(k, q);
            EXPECT_LT(std::abs(chisq_cdf(k, x) - q), 1e-12) << "k=" << k << " q=" << q;
        }
}

TEST(ChisqQuantile, DomainErrors) {
    EXPECT_THROW(chisq_quantile(2, 0.0), InputError);
    EXPECT_THROW(chisq_quantile(2, 1.0), InputError);
    EXPECT_THROW(chisq_quantile(0, 0.5), InputError);
}

TEST(SigmaToLevel, ErfIdentities) {
    EXPECT_NEAR(sigma_to_level(1.0), 0.682689, 1e-6);
    EXPECT_NEAR(sigma_to_level(2.0), 0.954500, 1e-6);
    EXPECT_NEAR(sigma_to_level(2.73), 0.9937, 1e-4);
    EXPECT_DOUBLE_EQ(sigma_to_level(0.0), 0.0 * 1.0);
}

TEST(ConfidenceLevel, SigmaTagRoundTrip) {
    auto lvl = ConfidenceLevel::from_sigma(2.0);
    EXPECT_NEAR(lvl.q, 0.9544997361036416, 1e-12);
    EXPECT_EQ(lvl.label(), "2sigma");
    EXPECT_EQ(ConfidenceLevel::from_q(0.95).label(), "q0.95");
    EXPECT_THROW(ConfidenceLevel::from_q(1.5), InputError);
}

TEST(KlGaussian, ZeroAtIdenticalParameters) {
    auto data = toy_dataset();
    ToyLineModel model{ToyKind::SumDiff};
    const double theta[2] = {1.1, 0.1};
    EXPECT_NEAR((kl_gaussian<ToyLineModel, double>(model, data, theta, theta)), 0.0, 1e-15);
}

TEST(KlGaussian, ScalarCaseHalfSquaredDistance) {
    DataSet d;
    d.xs = {{1.0}};
    d.ys = {0.0};
    d.cov = Covariance::diagonal({1.0});
    ToyLineModel model{ToyKind::Linear};
    const double theta[2] = {1.0, 0.0};  // prediction 1.0
    const double psi[2] = {3.0, 0.0};    // prediction 3.0
    EXPECT_NEAR((kl_gaussian<ToyLineModel, double>(model, d, theta, psi)), 0.5 * 4.0, 1e-13);
}

TEST(KlGaussian, NonNegativeAndZeroOnlyAtEqualEmbeddings) {
    auto data = toy_dataset();
    ToyLineModel model{ToyKind::SumDiff};
    testutil::Rng rng(5);
    const double theta[2] = {1.1084748684954568, 0.12215893432144548};
    for (int rep = 0; rep < 100; ++rep) {
        const double psi[2] = {rng.uniform(0.6, 1.6), rng.uniform(-0.4, 0.6)};
        const double kl = kl_gaussian<ToyLineModel, double>(model, data, theta, psi);
        EXPECT_GE(kl, 0.0);
        if (kl < 1e-14) {
            auto h1 = embed(model, data, theta);
            auto h2 = embed(model, data, psi);
            EXPECT_LT(testutil::max_abs_diff(h1, h2), 1e-6);
        }
    }
}

}  // namespace
