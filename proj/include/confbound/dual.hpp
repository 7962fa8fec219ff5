#pragma once

// Forward-mode automatic differentiation with fixed-width dual numbers.
//
// Dual<T, N> carries a value and N partial derivatives. Nesting
// Dual<Dual<double, N>, N> yields exact second derivatives. All elementary
// operations implement the chain rule, so derivatives are exact to rounding.
// Non-smooth operations (abs, min, max) are intentionally not provided.

#include <array>
#include <cmath>
#include <cstddef>
#include <type_traits>

namespace confbound {

// Number of simultaneous differentiation directions per pass. Parameter
// manifolds handled here are low-dimensional; larger parameter counts are
// processed in chunks of this width (see derivatives.hpp).
inline constexpr int kDualWidth = 4;

template <class T, int N>
struct Dual {
    using value_type = T;
    static constexpr int width = N;

    T value{};
    std::array<T, N> partials{};

    constexpr Dual() = default;
    constexpr Dual(T v) : value(std::move(v)) {}  // NOLINT: implicit by design
    constexpr Dual(double v) requires(!std::is_same_v<T, double>) : value(v) {}

    Dual& operator+=(const Dual& o) {
        value += o.value;
        for (int i = 0; i < N; ++i) partials[i] += o.partials[i];
        return *this;
    }
    Dual& operator-=(const Dual& o) {
        value -= o.value;
        for (int i = 0; i < N; ++i) partials[i] -= o.partials[i];
        return *this;
    }
    Dual& operator*=(const Dual& o) {
        for (int i = 0; i < N; ++i) partials[i] = partials[i] * o.value + value * o.partials[i];
        value *= o.value;
        return *this;
    }
    Dual& operator/=(const Dual& o) {
        const T inv = T(1) / o.value;
        value *= inv;
        for (int i = 0; i < N; ++i) partials[i] = (partials[i] - value * o.partials[i]) * inv;
        return *this;
    }
};

// value_of strips all derivative information (recursively for nested duals).
inline double value_of(double x) { return x; }
inline double value_of(float x) { return x; }
template <class T, int N>
double value_of(const Dual<T, N>& d) {
    return value_of(d.value);
}

template <class T>
bool all_finite(const T& x) {
    if constexpr (std::is_floating_point_v<T>) {
        return std::isfinite(x);
    } else {
        if (!all_finite(x.value)) return false;
        for (const auto& p : x.partials)
            if (!all_finite(p)) return false;
        return true;
    }
}

// ---- arithmetic ----

template <class T, int N>
Dual<T, N> operator-(const Dual<T, N>& a) {
    Dual<T, N> r;
    r.value = -a.value;
    for (int i = 0; i < N; ++i) r.partials[i] = -a.partials[i];
    return r;
}

template <class T, int N>
Dual<T, N> operator+(Dual<T, N> a, const Dual<T, N>& b) { return a += b; }
template <class T, int N>
Dual<T, N> operator-(Dual<T, N> a, const Dual<T, N>& b) { return a -= b; }
template <class T, int N>
Dual<T, N> operator*(Dual<T, N> a, const Dual<T, N>& b) { return a *= b; }
template <class T, int N>
Dual<T, N> operator/(Dual<T, N> a, const Dual<T, N>& b) { return a /= b; }

template <class T, int N>
Dual<T, N> operator+(Dual<T, N> a, double b) { a.value += T(b); return a; }
template <class T, int N>
Dual<T, N> operator+(double a, Dual<T, N> b) { b.value += T(a); return b; }
template <class T, int N>
Dual<T, N> operator-(Dual<T, N> a, double b) { a.value -= T(b); return a; }
template <class T, int N>
Dual<T, N> operator-(double a, const Dual<T, N>& b) { return (-b) + a; }
template <class T, int N>
Dual<T, N> operator*(Dual<T, N> a, double b) {
    a.value *= T(b);
    for (int i = 0; i < N; ++i) a.partials[i] *= T(b);
    return a;
}
template <class T, int N>
Dual<T, N> operator*(double a, Dual<T, N> b) { return b * a; }
template <class T, int N>
Dual<T, N> operator/(Dual<T, N> a, double b) { return a * (1.0 / b); }
template <class T, int N>
Dual<T, N> operator/(double a, const Dual<T, N>& b) { return Dual<T, N>(T(a)) / b; }

// Comparisons act on values; used for branching on magnitudes only.
template <class T, int N>
bool operator<(const Dual<T, N>& a, const Dual<T, N>& b) { return value_of(a) < value_of(b); }
template <class T, int N>
bool operator<(const Dual<T, N>& a, double b) { return value_of(a) < b; }
template <class T, int N>
bool operator<(double a, const Dual<T, N>& b) { return a < value_of(b); }
template <class T, int N>
bool operator>(const Dual<T, N>& a, const Dual<T, N>& b) { return value_of(a) > value_of(b); }
template <class T, int N>
bool operator>(const Dual<T, N>& a, double b) { return value_of(a) > b; }
template <class T, int N>
bool operator>(double a, const Dual<T, N>& b) { return a > value_of(b); }
template <class T, int N>
bool operator<=(const Dual<T, N>& a, double b) { return value_of(a) <= b; }
template <class T, int N>
bool operator>=(const Dual<T, N>& a, double b) { return value_of(a) >= b; }

// ---- elementary functions ----

namespace detail {
// Applies f(value) with derivative factor df and the chain rule.
template <class T, int N>
Dual<T, N> chain(const Dual<T, N>& a, T fv, T dfv) {
    Dual<T, N> r;
    r.value = std::move(fv);
    for (int i = 0; i < N; ++i) r.partials[i] = dfv * a.partials[i];
    return r;
}
}  // namespace detail

using std::cos;
using std::exp;
using std::log;
using std::log10;
using std::pow;
using std::sin;
using std::sqrt;

template <class T, int N>
Dual<T, N> exp(const Dual<T, N>& a) {
    T e = exp(a.value);
    return detail::chain(a, e, e);
}
template <class T, int N>
Dual<T, N> log(const Dual<T, N>& a) {
    return detail::chain(a, log(a.value), T(1) / a.value);
}
template <class T, int N>
Dual<T, N> log10(const Dual<T, N>& a) {
    return detail::chain(a, log10(a.value), T(1) / (a.value * 2.302585092994045684));
}
template <class T, int N>
Dual<T, N> sqrt(const Dual<T, N>& a) {
    T s = sqrt(a.value);
    return detail::chain(a, s, T(0.5) / s);
}
template <class T, int N>
Dual<T, N> sin(const Dual<T, N>& a) {
    return detail::chain(a, sin(a.value), cos(a.value));
}
template <class T, int N>
Dual<T, N> cos(const Dual<T, N>& a) {
    return detail::chain(a, cos(a.value), -sin(a.value));
}

template <class T, int N>
Dual<T, N> pow(const Dual<T, N>& a, double p) {
    T fp = pow(a.value, p - 1.0);
    return detail::chain(a, fp * a.value, p * fp);
}
template <class T, int N>
Dual<T, N> pow(const Dual<T, N>& a, int p) {
    return pow(a, static_cast<double>(p));
}
template <class T, int N>
Dual<T, N> pow(double base, const Dual<T, N>& e) {
    // base^e = exp(e ln base); requires base > 0.
    return exp(e * std::log(base));
}
template <class T, int N>
Dual<T, N> pow(const Dual<T, N>& a, const Dual<T, N>& e) {
    return exp(e * log(a));
}

}  // namespace confbound
