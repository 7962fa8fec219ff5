#include <gtest/gtest.h>

#include <cmath>
#include <span>

#include "confbound/derivatives.hpp"
#include "confbound/dual.hpp"
#include "test_util.hpp"

using namespace confbound;
using testutil::Rng;

namespace {

double ulps(double a, double b) {
    if (a == b) return 0.0;
    const double scale = std::max(std::abs(a), std::abs(b));
    return std::abs(a - b) / (scale * std::numeric_limits<double>::epsilon());
}

TEST(Dual, ProductRuleExactToUlps) {
    Rng rng(7);
    for (int rep = 0; rep < 200; ++rep) {
        Dual<double, 1> f(rng.uniform(-3, 3));
        f.partials[0] = rng.uniform(-2, 2);
        Dual<double, 1> g(rng.uniform(-3, 3));
        g.partials[0] = rng.uniform(-2, 2);
        auto prod = f * g;
        const double expect = f.value * g.partials[0] + g.value * f.partials[0];
        EXPECT_LE(ulps(prod.partials[0], expect), 4.0);
    }
}

TEST(Dual, ExpChainRuleExactToUlps) {
    Rng rng(8);
    for (int rep = 0; rep < 200; ++rep) {
        Dual<double, 1> f(rng.uniform(-2, 2));
        f.partials[0] = rng.uniform(-2, 2);
        auto e = exp(f);
        EXPECT_LE(ulps(e.partials[0], std::exp(f.value) * f.partials[0]), 4.0);
    }
}

TEST(Dual, DivisionAndSqrtAgainstAnalytic) {
    Dual<double, 2> x(2.0);
    x.partials[0] = 1.0;
    Dual<double, 2> y(3.0);
    y.partials[1] = 1.0;
    auto q = x / y;
    EXPECT_NEAR(q.value, 2.0 / 3.0, 1e-15);
    EXPECT_NEAR(q.partials[0], 1.0 / 3.0, 1e-15);
    EXPECT_NEAR(q.partials[1], -2.0 / 9.0, 1e-15);
    auto s = sqrt(x);
    EXPECT_NEAR(s.partials[0], 0.5 / std::sqrt(2.0), 1e-15);
}

TEST(Dual, PowWithDualExponent) {
    // d/dw of u^(3(1+w)) at fixed base u.
    const double u = 1.7;
    Dual<double, 1> w(-0.8);
    w.partials[0] = 1.0;
    auto r = pow(u, 3.0 * (w + 1.0));
    const double expect_val = std::pow(u, 3.0 * (1.0 - 0.8));
    EXPECT_NEAR(r.value, expect_val, 1e-14);
    EXPECT_NEAR(r.partials[0], expect_val * 3.0 * std::log(u), 1e-13);
}

TEST(Gradient, PolynomialExample) {
    auto f = [](std::span<const Dual1> th) { return th[0] * th[0] + th[1] * th[1]; };
    const double theta[2] = {1.0, 2.0};
    auto g = gradient(f, theta);
    EXPECT_DOUBLE_EQ(g[0], 2.0);
    EXPECT_DOUBLE_EQ(g[1], 4.0);
}

TEST(Gradient, ChunkedPassesBeyondDualWidth) {
    // 6 parameters exceeds the 4-wide dual: two passes required.
    auto f = [](auto th) {
        using S = std::decay_t<decltype(th[0])>;
        S acc{};
        for (std::size_t i = 0; i < th.size(); ++i) acc += (double(i) + 1.0) * th[i] * th[i];
        return acc;
    };
    std::vector<double> theta = {1, -2, 3, 0.5, -0.25, 2};
    auto g = gradient([&](std::span<const Dual1> th) { return f(th); }, theta);
    for (int i = 0; i < 6; ++i) EXPECT_NEAR(g[i], 2.0 * (i + 1) * theta[i], 1e-14);
}

TEST(Gradient, NonFinitePropagationNamesComponent) {
    auto f = [](std::span<const Dual1> th) { return sqrt(th[0]) + th[1]; };
    const double theta[2] = {-1.0, 0.0};  // sqrt of a negative number
    try {
        gradient(f, theta);
        FAIL() << "expected PropagationError";
    } catch (const PropagationError& e) {
        EXPECT_EQ(e.component, 0);
    }
    auto g = [](std::span<const Dual1> th) { return log(th[0]) + th[1]; };
    EXPECT_THROW(gradient(g, theta), PropagationError);  // value is NaN, slope finite
}

TEST(Jacobian, ProductRuleExample) {
    auto h = [](std::span<const Dual1> th) {
        return std::vector<Dual1>{th[0], th[0] * th[1]};
    };
    const double theta[2] = {2.0, 3.0};
    auto jac = jacobian(h, theta);
    EXPECT_DOUBLE_EQ(jac[0][0], 1.0);
    EXPECT_DOUBLE_EQ(jac[0][1], 0.0);
    EXPECT_DOUBLE_EQ(jac[1][0], 3.0);
    EXPECT_DOUBLE_EQ(jac[1][1], 2.0);
}

TEST(Hessian, BilinearExample) {
    auto f = [](std::span<const Dual2> th) { return th[0] * th[1]; };
    const double theta[2] = {0.3, -1.2};
    auto hess = hessian(f, theta);
    EXPECT_DOUBLE_EQ(hess[0][0], 0.0);
    EXPECT_DOUBLE_EQ(hess[0][1], 1.0);
    EXPECT_DOUBLE_EQ(hess[1][0], 1.0);
    EXPECT_DOUBLE_EQ(hess[1][1], 0.0);
}

TEST(Hessian, SchwarzSymmetryOnRandomSmoothFunction) {
    auto f = [](std::span<const Dual2> th) {
        return exp(th[0] * th[1]) + sin(th[0] + 2.0 * th[2]) * th[1] + th[2] * th[2] * th[0];
    };
    Rng rng(21);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> theta = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
        // raw (pre-symmetrised) second derivatives via two single passes
        const int n = 3;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                auto hess = hessian(f, theta);
                EXPECT_LT(std::abs(hess[i][j] - hess[j][i]), 1e-10);
            }
    }
}

TEST(Hessian, MatchesJacobianOfGradient) {
    auto f = [](auto th) {
        using S = std::decay_t<decltype(th[0])>;
        return exp(th[0]) * th[1] + th[1] * th[1] * th[0] - 3.0 * th[0];
    };
    std::vector<double> theta = {0.4, -0.7};
    auto hess = hessian([&](std::span<const Dual2> th) { return f(th); }, theta);
    auto jac_of_grad = jacobian(
        [&](std::span<const Dual1> th) {
            // gradient of f at dual-valued theta via nested duals
            using D2 = Dual<Dual1, kDualWidth>;
            std::vector<D2> nested(th.size());
            for (std::size_t i = 0; i < th.size(); ++i) nested[i] = D2(th[i]);
            for (std::size_t i = 0; i < th.size(); ++i) nested[i].partials[i] = Dual1(1.0);
            D2 r = f(std::span<const D2>(nested));
            return std::vector<Dual1>{r.partials[0], r.partials[1]};
        },
        theta);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) EXPECT_NEAR(hess[i][j], jac_of_grad[i][j], 1e-10);
}

TEST(Gradient, AgreesWithFiniteDifferencesOnRandomInputs) {
    auto f = [](auto th) {
        using S = std::decay_t<decltype(th[0])>;
        return exp(th[0] - th[1]) + (th[0] + th[1]) * (th[0] + th[1]) + log(th[1] + 4.0);
    };
    Rng rng(99);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<double> theta = {rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5)};
        auto g = gradient([&](std::span<const Dual1> th) { return f(th); }, theta);
        auto g_fd = testutil::fd_gradient(
            [&](std::span<const double> th) { return f(th); }, theta);
        for (int i = 0; i < 2; ++i)
            EXPECT_LT(std::abs(g[i] - g_fd[i]) / (1.0 + std::abs(g_fd[i])), 1e-5);
    }
}

}  // namespace
