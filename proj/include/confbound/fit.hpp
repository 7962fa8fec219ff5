#pragma once

// Maximum-likelihood estimation for Gaussian-observation models via
// Levenberg-Marquardt on the whitened residuals Sigma^{-1/2}(y - h(theta)),
// with exact Jacobians from forward-mode duals. Parameter domain boxes are
// enforced by rejecting steps that leave the box.

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "confbound/derivatives.hpp"
#include "confbound/logdensity.hpp"
#include "confbound/models.hpp"

namespace confbound {

enum class FitStatus { Converged, MaxIterations, BoundaryConstrained };

struct FitResult {
    std::vector<double> theta_mle;
    double loglik_at_mle = 0.0;
    bool converged = false;
    FitStatus status = FitStatus::MaxIterations;
    int iterations = 0;
    double gradient_norm = 0.0;  // max-norm of d ell / d theta at the result
};

struct FitOptions {
    int max_iterations = 300;
    double gradient_tol = 1e-8;  // converged when ||grad||_inf < tol * (1 + |ell|)
    double step_tol = 1e-12;     // or the relative step falls below this
    double lambda0 = 1e-3;
    double lambda_max = 1e14;
};

// View of a model with some parameters pinned to fixed values.
template <class M>
class ConditionalModel {
  public:
    ConditionalModel(const M& base, std::vector<std::pair<int, double>> fixed)
        : base_(&base), fixed_(std::move(fixed)) {
        const int n = base.dim();
        std::vector<bool> pinned(n, false);
        for (auto& [idx, val] : fixed_) {
            if (idx < 0 || idx >= n) throw InputError("conditional model: index out of range");
            if (pinned[idx]) throw InputError("conditional model: duplicate fixed index");
            pinned[idx] = true;
        }
        for (int i = 0; i < n; ++i)
            if (!pinned[i]) free_.push_back(i);
        if (free_.empty()) throw InputError("conditional model: no free parameters left");
    }

    int dim() const { return static_cast<int>(free_.size()); }
    const std::vector<int>& free_indices() const { return free_; }
    bool injective() const { return base_->injective(); }

    std::vector<std::string> param_names() const {
        auto all = base_->param_names();
        std::vector<std::string> out;
        for (int i : free_) out.push_back(all[i]);
        return out;
    }

    ParamDomain domain() const {
        auto full = base_->domain();
        ParamDomain d;
        for (int i : free_) d.box.push_back(full.box[i]);
        return d;
    }

    template <class S>
    std::vector<S> scatter(std::span<const S> reduced) const {
        std::vector<S> full(base_->dim());
        for (auto& [idx, val] : fixed_) full[idx] = S(val);
        for (std::size_t i = 0; i < free_.size(); ++i) full[free_[i]] = reduced[i];
        return full;
    }

    std::vector<double> scatter(std::span<const double> reduced) const {
        return scatter<double>(reduced);
    }

    template <class S>
    S predict(std::span<const double> x, std::span<const S> th) const {
        auto full = scatter<S>(th);
        return base_->template predict<S>(x, std::span<const S>(full));
    }

    template <class S>
    std::vector<S> predict_batch(const std::vector<std::vector<double>>& xs,
                                 std::span<const S> th) const {
        auto full = scatter<S>(th);
        return base_->template predict_batch<S>(xs, std::span<const S>(full));
    }

  private:
    const M* base_;
    std::vector<std::pair<int, double>> fixed_;
    std::vector<int> free_;
};

template <class Model>
FitResult fit(const Model& model, const DataSet& data, std::span<const double> theta0,
              const FitOptions& opt = {}) {
    const int n = model.dim();
    if (static_cast<int>(theta0.size()) != n) throw InputError("fit: theta0 dimension mismatch");
    const auto box = model.domain();
    box.require(theta0);
    data.validate();
    const int N = data.size();

    // chi^2/2 cost; the log-likelihood differs by a theta-independent constant
    const double loglik_const =
        -0.5 * N * std::log(2.0 * std::numbers::pi) - 0.5 * data.cov.log_det();

    auto whitened_residual = [&](std::span<const double> th) {
        auto pred = model.template predict_batch<double>(data.xs, th);
        std::vector<double> r(N);
        for (int i = 0; i < N; ++i) r[i] = data.ys[i] - pred[i];
        return data.cov.whiten(std::span<const double>(r));
    };

    auto whitened_jacobian = [&](std::span<const double> th) {
        auto jh = jacobian(
            [&](std::span<const Dual1> t) {
                return model.template predict_batch<Dual1>(data.xs, t);
            },
            th);
        Eigen::MatrixXd J(N, n);
        std::vector<double> col(N);
        for (int j = 0; j < n; ++j) {
            for (int i = 0; i < N; ++i) col[i] = -jh[i][j];
            auto wc = data.cov.whiten(std::span<const double>(col));
            for (int i = 0; i < N; ++i) J(i, j) = wc[i];
        }
        return J;
    };

    std::vector<double> theta(theta0.begin(), theta0.end());
    auto u = whitened_residual(theta);
    double cost = 0.5 * Eigen::Map<const Eigen::VectorXd>(u.data(), N).squaredNorm();

    double lambda = opt.lambda0;
    FitResult res;
    res.theta_mle = theta;
    res.loglik_at_mle = loglik_const - cost;
    bool boundary_blocked = false;

    int it = 0;
    for (; it < opt.max_iterations; ++it) {
        // whitened Jacobian of the residual: J = -W dh/dtheta
        Eigen::MatrixXd J = whitened_jacobian(theta);
        Eigen::Map<const Eigen::VectorXd> uv(u.data(), N);
        Eigen::VectorXd grad_cost = J.transpose() * uv;  // = -grad ell
        res.gradient_norm = grad_cost.lpNorm<Eigen::Infinity>();
        if (res.gradient_norm < opt.gradient_tol * (1.0 + std::abs(loglik_const - cost))) {
            res.converged = true;
            res.status = FitStatus::Converged;
            break;
        }

        Eigen::MatrixXd A = J.transpose() * J;
        Eigen::VectorXd diag = A.diagonal();
        const double dmax = std::max(diag.maxCoeff(), 1e-300);
        for (int j = 0; j < n; ++j) diag[j] = std::max(diag[j], 1e-12 * dmax);

        bool stepped = false;
        while (lambda <= opt.lambda_max) {
            Eigen::MatrixXd M = A;
            M.diagonal() += lambda * diag;
            Eigen::VectorXd delta = M.ldlt().solve(-grad_cost);
            std::vector<double> cand(n);
            for (int j = 0; j < n; ++j) cand[j] = theta[j] + delta[j];
            if (!box.contains(cand)) {
                boundary_blocked = true;
                lambda *= 10.0;
                continue;
            }
            auto u_new = whitened_residual(cand);
            const double cost_new =
                0.5 * Eigen::Map<const Eigen::VectorXd>(u_new.data(), N).squaredNorm();
            if (cost_new < cost) {
                const double step_rel =
                    delta.norm() / (1.0 + Eigen::Map<const Eigen::VectorXd>(theta.data(), n).norm());
                theta = std::move(cand);
                u = std::move(u_new);
                cost = cost_new;
                lambda = std::max(lambda * 0.1, 1e-12);
                boundary_blocked = false;
                stepped = true;
                if (step_rel < opt.step_tol) {
                    res.converged = true;
                    res.status = FitStatus::Converged;
                }
                break;
            }
            lambda *= 10.0;
        }
        res.theta_mle = theta;
        res.loglik_at_mle = loglik_const - cost;
        if (res.converged) break;
        if (!stepped) {
            res.status = boundary_blocked ? FitStatus::BoundaryConstrained
                                          : FitStatus::MaxIterations;
            break;
        }
    }
    res.iterations = it;
    res.theta_mle = theta;
    res.loglik_at_mle = loglik_const - cost;
    if (res.converged) res.status = FitStatus::Converged;
    // report the gradient norm at the returned point
    Eigen::MatrixXd J = whitened_jacobian(theta);
    res.gradient_norm =
        (J.transpose() * Eigen::Map<const Eigen::VectorXd>(u.data(), N)).lpNorm<Eigen::Infinity>();
    return res;
}

// Maximises over the non-fixed coordinates with the listed coordinates
// pinned; returns the result in full-dimensional coordinates.
template <class Model>
FitResult conditional_fit(const Model& model, const DataSet& data,
                          std::span<const std::pair<int, double>> fixed,
                          std::span<const double> theta0) {
    ConditionalModel<Model> cm(model, {fixed.begin(), fixed.end()});
    std::vector<double> t0;
    for (int i : cm.free_indices()) t0.push_back(theta0[i]);
    FitResult r = fit(cm, data, t0, {});
    r.theta_mle = cm.scatter(std::span<const double>(r.theta_mle));
    return r;
}

}  // namespace confbound
