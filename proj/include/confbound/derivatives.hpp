#pragma once

// Gradients, Jacobians and Hessians of callables that accept spans of a
// generic scalar type. Differentiation runs in chunks of kDualWidth
// directions, so parameter counts beyond the dual width cost extra passes
// instead of extra memory.

#include <span>
#include <string>
#include <vector>

#include "confbound/dual.hpp"
#include "confbound/errors.hpp"

namespace confbound {

using Dual1 = Dual<double, kDualWidth>;
using Dual2 = Dual<Dual1, kDualWidth>;

// f: callable with (std::span<const S>) -> S for S in {double, Dual1}.
template <class F>
std::vector<double> gradient(F&& f, std::span<const double> theta) {
    const int n = static_cast<int>(theta.size());
    std::vector<double> grad(n);
    std::vector<Dual1> th(n);
    for (int c = 0; c < n; c += kDualWidth) {
        const int m = std::min(kDualWidth, n - c);
        for (int i = 0; i < n; ++i) th[i] = Dual1(theta[i]);
        for (int j = 0; j < m; ++j) th[c + j].partials[j] = 1.0;
        Dual1 r = f(std::span<const Dual1>(th));
        for (int j = 0; j < m; ++j) {
            if (!std::isfinite(r.partials[j]))
                throw PropagationError("gradient: non-finite derivative in component " +
                                           std::to_string(c + j),
                                       c + j);
            grad[c + j] = r.partials[j];
        }
        if (!std::isfinite(r.value))
            throw PropagationError("gradient: non-finite function value", -1);
    }
    return grad;
}

// h: callable with (std::span<const S>) -> std::vector<S>.
// Row i, column a of the result is dh_i/dtheta_a.
template <class H>
std::vector<std::vector<double>> jacobian(H&& h, std::span<const double> theta) {
    const int n = static_cast<int>(theta.size());
    std::vector<std::vector<double>> jac;
    std::vector<Dual1> th(n);
    for (int c = 0; c < n; c += kDualWidth) {
        const int m = std::min(kDualWidth, n - c);
        for (int i = 0; i < n; ++i) th[i] = Dual1(theta[i]);
        for (int j = 0; j < m; ++j) th[c + j].partials[j] = 1.0;
        std::vector<Dual1> r = h(std::span<const Dual1>(th));
        if (jac.empty()) jac.assign(r.size(), std::vector<double>(n));
        for (std::size_t i = 0; i < r.size(); ++i)
            for (int j = 0; j < m; ++j) {
                if (!std::isfinite(r[i].partials[j]))
                    throw PropagationError("jacobian: non-finite derivative in row " +
                                               std::to_string(i) + ", column " +
                                               std::to_string(c + j),
                                           c + j);
                jac[i][c + j] = r[i].partials[j];
            }
    }
    return jac;
}

// f must additionally be callable with spans of Dual2. The result is
// symmetrised; Schwarz symmetry holds to rounding for twice-differentiable f.
template <class F>
std::vector<std::vector<double>> hessian(F&& f, std::span<const double> theta) {
    const int n = static_cast<int>(theta.size());
    std::vector<std::vector<double>> hess(n, std::vector<double>(n));
    std::vector<Dual2> th(n);
    for (int ca = 0; ca < n; ca += kDualWidth) {
        const int ma = std::min(kDualWidth, n - ca);
        for (int cb = 0; cb < n; cb += kDualWidth) {
            const int mb = std::min(kDualWidth, n - cb);
            for (int i = 0; i < n; ++i) th[i] = Dual2(Dual1(theta[i]));
            for (int a = 0; a < ma; ++a) th[ca + a].partials[a] = Dual1(1.0);
            for (int b = 0; b < mb; ++b) th[cb + b].value.partials[b] = 1.0;
            Dual2 r = f(std::span<const Dual2>(th));
            for (int a = 0; a < ma; ++a)
                for (int b = 0; b < mb; ++b) {
                    const double v = r.partials[a].partials[b];
                    if (!std::isfinite(v))
                        throw PropagationError("hessian: non-finite second derivative at (" +
                                                   std::to_string(ca + a) + "," +
                                                   std::to_string(cb + b) + ")",
                                               ca + a);
                    hess[ca + a][cb + b] = v;
                }
        }
    }
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const double s = 0.5 * (hess[i][j] + hess[j][i]);
            hess[i][j] = hess[j][i] = s;
        }
    return hess;
}

}  // namespace confbound
