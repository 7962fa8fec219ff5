#pragma once

// Probability utilities: Gaussian log-likelihood, chi-square quantiles,
// sigma-level conversion and the Gaussian Kullback-Leibler divergence.

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "confbound/dual.hpp"
#include "confbound/errors.hpp"

namespace confbound {

// Confidence level q in (0,1), optionally tagged with the sigma it came from.
struct ConfidenceLevel {
    double q;
    std::optional<double> sigma;

    static ConfidenceLevel from_q(double q);
    static ConfidenceLevel from_sigma(double s);
    std::string label() const;
};

// q = erf(s / sqrt(2)), the two-sided normal coverage of +-s sigma.
inline double sigma_to_level(double s) { return std::erf(s / std::numbers::sqrt2); }

inline ConfidenceLevel ConfidenceLevel::from_q(double q) {
    if (!(q > 0.0 && q < 1.0)) throw InputError("confidence level q must lie in (0,1)");
    return {q, std::nullopt};
}

inline ConfidenceLevel ConfidenceLevel::from_sigma(double s) {
    if (!(s >= 0.0)) throw InputError("sigma level must be nonnegative");
    ConfidenceLevel lvl{sigma_to_level(s), s};
    if (!(lvl.q > 0.0 && lvl.q < 1.0)) throw InputError("sigma level out of usable range");
    return lvl;
}

inline std::string ConfidenceLevel::label() const {
    char buf[48];
    if (sigma) {
        std::snprintf(buf, sizeof buf, "%gsigma", *sigma);
    } else {
        std::snprintf(buf, sizeof buf, "q%g", q);
    }
    return buf;
}

// ---- regularized incomplete gamma (series + continued fraction) ----

namespace detail {

inline double gamma_p_series(double a, double x) {
    double sum = 1.0 / a, term = sum, ap = a;
    for (int i = 0; i < 500; ++i) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::abs(term) < std::abs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

inline double gamma_q_contfrac(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace detail

// P(a, x), the regularized lower incomplete gamma function.
inline double gamma_p(double a, double x) {
    if (x < 0.0 || a <= 0.0) throw InputError("gamma_p: domain error");
    if (x == 0.0) return 0.0;
    return (x < a + 1.0) ? detail::gamma_p_series(a, x) : 1.0 - detail::gamma_q_contfrac(a, x);
}

// CDF of the chi-square distribution with k degrees of freedom.
inline double chisq_cdf(int k, double x) { return gamma_p(0.5 * k, 0.5 * x); }

// Quantile of chi^2_k: the x with |P(k/2, x/2) - q| < 1e-12, by bracketing
// bisection polished with Newton steps.
inline double chisq_quantile(int k, double q) {
    if (k < 1) throw InputError("chisq_quantile: dof must be >= 1");
    if (!(q > 0.0 && q < 1.0)) throw InputError("chisq_quantile: q must lie in (0,1)");
    double lo = 0.0, hi = 2.0 * k + 10.0;
    while (chisq_cdf(k, hi) < q) hi *= 2.0;
    double x = 0.5 * (lo + hi);
    for (int i = 0; i < 200; ++i) {
        const double f = chisq_cdf(k, x) - q;
        if (f > 0.0) hi = x; else lo = x;
        // chi-square density at x
        const double a = 0.5 * k;
        const double pdf = std::exp((a - 1.0) * std::log(x) - 0.5 * x - a * std::numbers::ln2 -
                                    std::lgamma(a));
        double xn = (pdf > 0.0) ? x - f / pdf : 0.5 * (lo + hi);
        if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
        if (std::abs(f) < 1e-13 && std::abs(xn - x) < 1e-12 * (1.0 + x)) return xn;
        x = xn;
    }
    return x;
}

// ---- Gaussian log-likelihood ----

// Dense symmetric positive-definite covariance, pre-factorised once.
// solve_* are generic over the scalar of the right-hand side so that dual
// numbers can flow through the factorisation.
class Covariance {
  public:
    Covariance() = default;

    // Per-point standard deviations (diagonal covariance).
    static Covariance diagonal(std::vector<double> sigma) {
        for (std::size_t i = 0; i < sigma.size(); ++i)
            if (!(sigma[i] > 0.0))
                throw CovarianceError("sigma must be positive (entry " + std::to_string(i) + ")");
        Covariance c;
        c.sigma_ = std::move(sigma);
        return c;
    }

    // Full covariance given row-major entries; Cholesky-factorised.
    static Covariance dense(int n, std::vector<double> entries) {
        if (static_cast<int>(entries.size()) != n * n)
            throw InputError("covariance: entry count does not match dimension");
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < i; ++j)
                if (std::abs(entries[i * n + j] - entries[j * n + i]) >
                    1e-12 * (1.0 + std::abs(entries[i * n + j])))
                    throw CovarianceError("covariance matrix is not symmetric");
        Covariance c;
        c.n_ = n;
        c.chol_ = entries;  // factorised in place
        double logdet = 0.0;
        for (int j = 0; j < n; ++j) {
            double d = c.chol_[j * n + j];
            for (int k = 0; k < j; ++k) d -= c.chol_[j * n + k] * c.chol_[j * n + k];
            if (!(d > 0.0)) throw CovarianceError("covariance matrix is not positive-definite");
            const double l = std::sqrt(d);
            c.chol_[j * n + j] = l;
            logdet += 2.0 * std::log(l);
            for (int i = j + 1; i < n; ++i) {
                double s = c.chol_[i * n + j];
                for (int k = 0; k < j; ++k) s -= c.chol_[i * n + k] * c.chol_[j * n + k];
                c.chol_[i * n + j] = s / l;
            }
            for (int i = 0; i < j; ++i) c.chol_[i * n + j] = 0.0;
        }
        c.logdet_ = logdet;
        return c;
    }

    bool is_diagonal() const { return !sigma_.empty(); }
    int size() const { return is_diagonal() ? static_cast<int>(sigma_.size()) : n_; }
    const std::vector<double>& sigmas() const { return sigma_; }

    double log_det() const {
        if (is_diagonal()) {
            double s = 0.0;
            for (double sg : sigma_) s += 2.0 * std::log(sg);
            return s;
        }
        return logdet_;
    }

    // r^T Sigma^{-1} r for a residual vector of generic scalar type.
    template <class S>
    S quad_form(std::span<const S> r) const {
        if (static_cast<int>(r.size()) != size())
            throw InputError("covariance: residual length mismatch");
        if (is_diagonal()) {
            S acc{};
            for (std::size_t i = 0; i < r.size(); ++i) {
                S z = r[i] / sigma_[i];
                acc += z * z;
            }
            return acc;
        }
        // Solve L z = r, accumulate |z|^2.
        const int n = n_;
        std::vector<S> z(r.begin(), r.end());
        S acc{};
        for (int i = 0; i < n; ++i) {
            S s = z[i];
            for (int k = 0; k < i; ++k) s -= chol_[i * n + k] * z[k];
            z[i] = s / chol_[i * n + i];
            acc += z[i] * z[i];
        }
        return acc;
    }

    // Whitened residual W r with W = Sigma^{-1/2} (diag) or L^{-1} (dense).
    template <class S>
    std::vector<S> whiten(std::span<const S> r) const {
        if (static_cast<int>(r.size()) != size())
            throw InputError("covariance: residual length mismatch");
        std::vector<S> z(r.begin(), r.end());
        if (is_diagonal()) {
            for (std::size_t i = 0; i < z.size(); ++i) z[i] = z[i] / sigma_[i];
            return z;
        }
        const int n = n_;
        for (int i = 0; i < n; ++i) {
            S s = z[i];
            for (int k = 0; k < i; ++k) s -= chol_[i * n + k] * z[k];
            z[i] = s / chol_[i * n + i];
        }
        return z;
    }

  private:
    std::vector<double> sigma_;  // diagonal form
    int n_ = 0;                  // dense form
    std::vector<double> chol_;   // lower Cholesky factor, row-major
    double logdet_ = 0.0;
};

// log L = -(N/2) ln 2pi - (1/2) ln det Sigma - (1/2) r^T Sigma^{-1} r.
template <class S>
S gaussian_loglik(std::span<const double> y_data, std::span<const S> prediction,
                  const Covariance& cov) {
    const int n = static_cast<int>(y_data.size());
    if (static_cast<int>(prediction.size()) != n || cov.size() != n)
        throw InputError("gaussian_loglik: length mismatch between data, prediction and sigma");
    std::vector<S> r(n);
    for (int i = 0; i < n; ++i) r[i] = -(prediction[i] - y_data[i]);
    S quad = cov.quad_form(std::span<const S>(r));
    return S(-0.5 * n * std::log(2.0 * std::numbers::pi) - 0.5 * cov.log_det()) - 0.5 * quad;
}

inline double gaussian_loglik(std::span<const double> y_data, std::span<const double> prediction,
                              std::span<const double> sigma) {
    return gaussian_loglik<double>(y_data, prediction,
                                   Covariance::diagonal({sigma.begin(), sigma.end()}));
}

}  // namespace confbound
