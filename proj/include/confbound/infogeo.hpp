#pragma once

// Information-geometric quantities of a Gaussian model: the Fisher metric as
// pull-back of the data-space inner product, the determinant criterion for
// local structural identifiability, the level-scaled inverse-Fisher
// covariance, Christoffel coefficients and geodesics.

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "confbound/derivatives.hpp"
#include "confbound/models.hpp"
#include "confbound/odeint.hpp"
#include "confbound/stats.hpp"

namespace confbound {

struct FisherGeometry {
    std::vector<double> theta;
    Eigen::MatrixXd g;
    double det_g = 0.0;
};

// g = (dh/dtheta)^T Sigma^{-1} (dh/dtheta), the Gram matrix of the whitened
// model Jacobian.
template <class Model>
FisherGeometry fisher_metric(const Model& model, const DataSet& data,
                             std::span<const double> theta) {
    const int n = model.dim();
    const int N = data.size();
    auto jh = jacobian(
        [&](std::span<const Dual1> th) { return embed<Model, Dual1>(model, data, th); }, theta);
    Eigen::MatrixXd J(N, n);
    std::vector<double> col(N);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < N; ++i) col[i] = jh[i][j];
        auto wc = data.cov.whiten(std::span<const double>(col));
        for (int i = 0; i < N; ++i) J(i, j) = wc[i];
    }
    FisherGeometry fg;
    fg.theta.assign(theta.begin(), theta.end());
    fg.g = J.transpose() * J;
    fg.g = 0.5 * (fg.g + fg.g.transpose()).eval();
    fg.det_g = fg.g.determinant();
    return fg;
}

struct IdentifiabilityResult {
    bool identifiable;
    double det_g;
};

// det g != 0 is the local structural identifiability criterion; the test is
// |det g| > tol * scale^n with scale the largest metric entry.
template <class Model>
IdentifiabilityResult is_identifiable(const Model& model, const DataSet& data,
                                      std::span<const double> theta, double tol = 1e-9) {
    auto fg = fisher_metric(model, data, theta);
    const double scale = fg.g.cwiseAbs().maxCoeff();
    const int n = model.dim();
    const bool ok = std::abs(fg.det_g) > tol * std::pow(std::max(scale, 1e-300), n);
    return {ok, fg.det_g};
}

// F_k^{-1}(q) * g^{-1}(theta_mle): the parameter covariance scaled to the
// requested confidence level.
template <class Model>
Eigen::MatrixXd scaled_covariance(const Model& model, const DataSet& data,
                                  std::span<const double> theta_mle, double q, int k) {
    auto fg = fisher_metric(model, data, theta_mle);
    const double scale = fg.g.cwiseAbs().maxCoeff();
    if (!(std::abs(fg.det_g) > 1e-12 * std::pow(std::max(scale, 1e-300), model.dim())))
        throw IdentifiabilityError("scaled_covariance: Fisher metric is singular");
    return chisq_quantile(k, q) * fg.g.inverse();
}

// Christoffel coefficients Gamma^a_{bc} of the Levi-Civita connection of the
// Fisher metric; metric derivatives by central differences (step scaled per
// coordinate). Returned as one matrix (b, c) per upper index a.
template <class Model>
std::vector<Eigen::MatrixXd> christoffel(const Model& model, const DataSet& data,
                                         std::span<const double> theta, double fd_step = 1e-5) {
    const int n = model.dim();
    auto fg = fisher_metric(model, data, theta);
    const double scale = fg.g.cwiseAbs().maxCoeff();
    if (!(std::abs(fg.det_g) > 1e-12 * std::pow(std::max(scale, 1e-300), n)))
        throw IdentifiabilityError("christoffel: Fisher metric is singular");
    Eigen::MatrixXd ginv = fg.g.inverse();

    std::vector<Eigen::MatrixXd> dg(n);  // dg[c](a,b) = d g_ab / d theta_c
    std::vector<double> th(theta.begin(), theta.end());
    for (int c = 0; c < n; ++c) {
        const double h = fd_step * (1.0 + std::abs(theta[c]));
        th[c] = theta[c] + h;
        auto gp = fisher_metric(model, data, th).g;
        th[c] = theta[c] - h;
        auto gm = fisher_metric(model, data, th).g;
        th[c] = theta[c];
        dg[c] = (gp - gm) / (2.0 * h);
    }

    std::vector<Eigen::MatrixXd> gamma(n, Eigen::MatrixXd::Zero(n, n));
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c) {
                double s = 0.0;
                for (int d = 0; d < n; ++d)
                    s += ginv(a, d) * (dg[b](d, c) + dg[c](d, b) - dg[d](b, c));
                gamma[a](b, c) = 0.5 * s;
            }
    return gamma;
}

struct GeodesicTrace {
    OdeSolution<double> path;       // state = (theta, velocity), length 2n
    std::vector<double> v0_unit;    // initial velocity at unit metric speed

    std::vector<double> point(double t) const {
        auto y = path.eval(t);
        return {y.begin(), y.begin() + static_cast<long>(y.size() / 2)};
    }
};

// Solves the geodesic equation dd theta^a + Gamma^a_{bc} dtheta^b dtheta^c = 0
// with the affine parameter normalised to unit initial metric speed.
template <class Model>
GeodesicTrace geodesic(const Model& model, const DataSet& data, std::span<const double> theta0,
                       std::span<const double> v0, double t_end, double rtol = 1e-9) {
    const int n = model.dim();
    if (static_cast<int>(v0.size()) != n) throw InputError("geodesic: velocity dimension");
    auto fg = fisher_metric(model, data, theta0);
    Eigen::Map<const Eigen::VectorXd> v0m(v0.data(), n);
    const double speed2 = v0m.dot(fg.g * v0m);
    if (!(speed2 > 0.0)) throw IdentifiabilityError("geodesic: metric speed not positive");
    Eigen::VectorXd vunit = v0m / std::sqrt(speed2);

    std::vector<double> y0(2 * n);
    for (int i = 0; i < n; ++i) {
        y0[i] = theta0[i];
        y0[n + i] = vunit[i];
    }
    auto rhs = [&, n](double, std::span<const double> y, std::span<double> dy) {
        std::vector<double> th(y.begin(), y.begin() + n);
        auto gamma = christoffel(model, data, th);
        for (int i = 0; i < n; ++i) dy[i] = y[n + i];
        for (int a = 0; a < n; ++a) {
            double acc = 0.0;
            for (int b = 0; b < n; ++b)
                for (int c = 0; c < n; ++c) acc += gamma[a](b, c) * y[n + b] * y[n + c];
            dy[n + a] = -acc;
        }
    };
    OdeOptions opt;
    opt.rtol = rtol;
    opt.atol = 1e-10;
    GeodesicTrace tr;
    tr.path = integrate<double>(rhs, y0, 0.0, t_end, opt);
    tr.v0_unit.assign(vunit.data(), vunit.data() + n);
    return tr;
}

}  // namespace confbound
