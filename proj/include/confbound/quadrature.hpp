#pragma once

// Adaptive Gauss-Kronrod (7-15) quadrature over a finite interval, generic
// over the integrand scalar so dual numbers pass through. Subdivision is
// driven by the value part of the error estimate; partials are integrated on
// the same panels.

#include <algorithm>
#include <cmath>
#include <queue>
#include <vector>

#include "confbound/dual.hpp"
#include "confbound/errors.hpp"

namespace confbound {

namespace detail {
// Kronrod abscissae (positive half) and weights; Gauss weights for the
// embedded 7-point rule.
inline constexpr double kGK15X[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.0};
inline constexpr double kGK15WK[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
inline constexpr double kGK15WG[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};
}  // namespace detail

template <class S, class F>
struct GkPanel {
    double a, b;
    S integral;
    double error;
};

// One 15-point panel over [a, b]; error is |K15 - G7| on values.
template <class S, class F>
GkPanel<S, F> gk15_panel(F&& f, double a, double b) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    S center = f(c);
    S kron = detail::kGK15WK[7] * center;
    double gauss_v = detail::kGK15WG[3] * value_of(center);
    for (int i = 0; i < 7; ++i) {
        const double dx = h * detail::kGK15X[i];
        S lo = f(c - dx), hi = f(c + dx);
        S sum = lo + hi;
        kron += detail::kGK15WK[i] * sum;
        if (i % 2 == 1) gauss_v += detail::kGK15WG[i / 2] * value_of(sum);
    }
    kron = kron * h;
    return {a, b, kron, std::abs(value_of(kron) - gauss_v * h)};
}

// Integrates f over [a, b] to |error| <= atol + rtol*|integral| by greedy
// bisection of the worst panel. Throws IntegrationError when the panel budget
// is exhausted without convergence.
template <class S, class F>
S integrate_adaptive(F&& f, double a, double b, double rtol = 1e-10, double atol = 0.0,
                     int max_panels = 4000) {
    if (a == b) return S{};
    auto cmp = [](const GkPanel<S, F>& x, const GkPanel<S, F>& y) { return x.error < y.error; };
    std::vector<GkPanel<S, F>> heap;
    heap.push_back(gk15_panel<S>(f, a, b));
    double total_err = heap[0].error;
    double total_val = value_of(heap[0].integral);
    while (static_cast<int>(heap.size()) < max_panels) {
        if (total_err <= atol + rtol * std::abs(total_val)) break;
        std::pop_heap(heap.begin(), heap.end(), cmp);
        GkPanel<S, F> worst = heap.back();
        heap.pop_back();
        const double mid = 0.5 * (worst.a + worst.b);
        if (mid <= worst.a || mid >= worst.b)
            throw IntegrationError("quadrature: interval collapsed before convergence");
        auto left = gk15_panel<S>(f, worst.a, mid);
        auto right = gk15_panel<S>(f, mid, worst.b);
        total_err += left.error + right.error - worst.error;
        total_val += value_of(left.integral) + value_of(right.integral) - value_of(worst.integral);
        heap.push_back(left);
        std::push_heap(heap.begin(), heap.end(), cmp);
        heap.push_back(right);
        std::push_heap(heap.begin(), heap.end(), cmp);
    }
    if (total_err > atol + rtol * std::abs(total_val) + 1e-300)
        throw IntegrationError("quadrature did not converge to requested tolerance");
    S acc{};
    for (const auto& p : heap) acc += p.integral;
    return acc;
}

}  // namespace confbound
