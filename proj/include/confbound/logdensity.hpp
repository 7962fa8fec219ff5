#pragma once

// Log-density objects consumed by the boundary tracer. A log-density is any
// type with dim() and a call operator taking a span of a generic scalar.
// GaussianLogDensity is the built-in family; arbitrary custom densities can
// be supplied through the same duck-typed interface.

#include <atomic>
#include <span>
#include <utility>
#include <vector>

#include "confbound/dataset.hpp"
#include "confbound/derivatives.hpp"
#include "confbound/models.hpp"
#include "confbound/stats.hpp"

namespace confbound {

template <class D, class S>
concept LogDensityOver = requires(const D& d, std::span<const S> th) {
    { d.dim() } -> std::convertible_to<int>;
    { d(th) } -> std::convertible_to<S>;
};

template <class D>
concept LogDensity = LogDensityOver<D, double> && LogDensityOver<D, Dual1>;

// ell(theta | data) for a model with Gaussian observation noise.
template <class Model>
class GaussianLogDensity {
  public:
    GaussianLogDensity(Model model, DataSet data)
        : model_(std::move(model)), data_(std::move(data)) {
        data_.validate();
    }

    int dim() const { return model_.dim(); }
    const Model& model() const { return model_; }
    const DataSet& data() const { return data_; }
    const ParamDomain domain() const { return model_.domain(); }

    template <class S>
    S operator()(std::span<const S> theta) const {
        auto pred = embed<Model, S>(model_, data_, theta);
        return gaussian_loglik<S>(data_.ys, pred, data_.cov);
    }

  private:
    Model model_;
    DataSet data_;
};

// Restriction of a density to an axis-aligned slice: the listed coordinates
// are pinned, the remaining ones stay free.
template <class D>
class ConditionalLogDensity {
  public:
    ConditionalLogDensity(const D& base, std::vector<std::pair<int, double>> fixed)
        : base_(&base), fixed_(std::move(fixed)) {
        const int n = base.dim();
        std::vector<bool> is_fixed(n, false);
        for (auto& [idx, val] : fixed_) {
            if (idx < 0 || idx >= n) throw InputError("conditional density: index out of range");
            if (is_fixed[idx]) throw InputError("conditional density: duplicate fixed index");
            is_fixed[idx] = true;
        }
        for (int i = 0; i < n; ++i)
            if (!is_fixed[i]) free_.push_back(i);
        if (free_.empty()) throw InputError("conditional density: no free parameters left");
    }

    int dim() const { return static_cast<int>(free_.size()); }
    const std::vector<int>& free_indices() const { return free_; }

    template <class S>
    std::vector<S> scatter(std::span<const S> reduced) const {
        std::vector<S> full(base_->dim());
        for (auto& [idx, val] : fixed_) full[idx] = S(val);
        for (std::size_t i = 0; i < free_.size(); ++i) full[free_[i]] = reduced[i];
        return full;
    }

    template <class S>
    S operator()(std::span<const S> reduced) const {
        auto full = scatter<S>(reduced);
        return (*base_)(std::span<const S>(full));
    }

  private:
    const D* base_;
    std::vector<std::pair<int, double>> fixed_;
    std::vector<int> free_;
};

// Synthetic density ell = -(1/2) (theta-mu)^T A (theta-mu); exact ellipsoidal
// level sets, used for validation and the complexity benchmarks.
class QuadraticLogDensity {
  public:
    QuadraticLogDensity(std::vector<double> mu, std::vector<std::vector<double>> a)
        : mu_(std::move(mu)), a_(std::move(a)) {}

    int dim() const { return static_cast<int>(mu_.size()); }

    template <class S>
    S operator()(std::span<const S> theta) const {
        const int n = dim();
        S acc{};
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) acc += a_[i][j] * ((theta[i] - mu_[i]) * (theta[j] - mu_[j]));
        return -0.5 * acc;
    }

    const std::vector<double>& mu() const { return mu_; }

  private:
    std::vector<double> mu_;
    std::vector<std::vector<double>> a_;
};

// Wrapper counting plain log-likelihood evaluations (value calls only).
template <class D>
class CountingLogDensity {
  public:
    explicit CountingLogDensity(const D& base) : base_(&base) {}

    int dim() const { return base_->dim(); }
    long calls() const { return calls_.load(); }
    void reset() { calls_.store(0); }

    template <class S>
    S operator()(std::span<const S> theta) const {
        calls_.fetch_add(1, std::memory_order_relaxed);
        return (*base_)(theta);
    }

  private:
    const D* base_;
    mutable std::atomic<long> calls_{0};
};

// Kullback-Leibler divergence between the Gaussian predictive distributions
// at theta and psi (shared constant covariance):
//   D_KL = (1/2) (h(theta) - h(psi))^T Sigma^{-1} (h(theta) - h(psi)).
// Generic in psi so its Hessian can be taken; that Hessian at psi = theta is
// the Fisher metric.
template <class Model, class S>
S kl_gaussian(const Model& model, const DataSet& data, std::span<const double> theta,
              std::span<const S> psi) {
    auto h_theta = embed<Model, double>(model, data, theta);
    auto h_psi = embed<Model, S>(model, data, psi);
    std::vector<S> diff(h_psi.size());
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = h_psi[i] - h_theta[i];
    return 0.5 * data.cov.quad_form(std::span<const S>(diff));
}

// Gradient of a log-density via forward-mode duals.
template <class D>
std::vector<double> loglik_gradient(const D& density, std::span<const double> theta) {
    return gradient([&](std::span<const Dual1> th) { return density(th); }, theta);
}

template <class D>
std::vector<std::vector<double>> loglik_hessian(const D& density, std::span<const double> theta) {
    return hessian([&](std::span<const Dual2> th) { return density(th); }, theta);
}

}  // namespace confbound
