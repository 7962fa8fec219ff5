#pragma once

// Built-in parametric models: the toy linear family with its non-linear
// reparametrisations, the cosmological distance modulus, and the SIR
// epidemic model. Models evaluate on a generic scalar so that all
// derivatives come out of the same prediction code.

#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "confbound/dataset.hpp"
#include "confbound/dual.hpp"
#include "confbound/errors.hpp"
#include "confbound/odeint.hpp"
#include "confbound/quadrature.hpp"

namespace confbound {

struct ParamDomain {
    // Open interval per parameter.
    std::vector<std::pair<double, double>> box;

    static ParamDomain unbounded(int n) {
        const double inf = std::numeric_limits<double>::infinity();
        return {std::vector<std::pair<double, double>>(n, {-inf, inf})};
    }

    int dim() const { return static_cast<int>(box.size()); }

    bool contains(std::span<const double> theta) const {
        for (std::size_t i = 0; i < box.size(); ++i)
            if (!(theta[i] > box[i].first && theta[i] < box[i].second)) return false;
        return true;
    }

    void require(std::span<const double> theta) const {
        for (std::size_t i = 0; i < box.size(); ++i)
            if (!(theta[i] > box[i].first && theta[i] < box[i].second))
                throw DomainError("parameter " + std::to_string(i) + " = " +
                                      std::to_string(theta[i]) + " outside open interval (" +
                                      std::to_string(box[i].first) + ", " +
                                      std::to_string(box[i].second) + ")",
                                  static_cast<int>(i), theta[i], box[i].first, box[i].second);
    }

    // Largest r >= 0 with theta + r*dir still inside the closed box.
    double ray_exit(std::span<const double> theta, std::span<const double> dir) const {
        double r = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < box.size(); ++i) {
            if (dir[i] > 0.0 && std::isfinite(box[i].second))
                r = std::min(r, (box[i].second - theta[i]) / dir[i]);
            else if (dir[i] < 0.0 && std::isfinite(box[i].first))
                r = std::min(r, (box[i].first - theta[i]) / dir[i]);
        }
        return r;
    }
};

// ---- toy linear family ----

// The six charts of the same straight-line prediction surface. Parameter
// correspondences to the plain (a, b) chart:
//   Linear   y = a x + b
//   ExpExp   y = exp(a) x + exp(b)            a = ln a0,        b = ln b0
//   SqrtExp  y = sqrt(a) x + exp(b)           a = a0^2,         b = ln b0
//   LogAExp  y = ln(a) x + a exp(b)           a = e^{a0},       b = ln(b0) - a0
//   SumDiff  y = (a+b) x + exp(a-b)           a+b = a0,         a-b = ln b0
//   CubeSq   y = (a+b)^3 x + (a-b)^2          a+b = a0^{1/3},   a-b = -sqrt(b0)
// CubeSq is two-to-one under the a<->b swap; it is injective on the a < b
// half-plane, which contains the fitted region.
enum class ToyKind { Linear, ExpExp, SqrtExp, LogAExp, SumDiff, CubeSq };

struct ToyLineModel {
    ToyKind kind = ToyKind::Linear;

    int dim() const { return 2; }
    std::vector<std::string> param_names() const { return {"a", "b"}; }
    bool injective() const { return true; }

    ParamDomain domain() const {
        auto d = ParamDomain::unbounded(2);
        if (kind == ToyKind::SqrtExp || kind == ToyKind::LogAExp) d.box[0].first = 0.0;
        return d;
    }

    template <class S>
    S predict(std::span<const double> x, std::span<const S> th) const {
        const S& a = th[0];
        const S& b = th[1];
        const double xv = x[0];
        switch (kind) {
            case ToyKind::Linear:  return a * xv + b;
            case ToyKind::ExpExp:  return exp(a) * xv + exp(b);
            case ToyKind::SqrtExp: return sqrt(a) * xv + exp(b);
            case ToyKind::LogAExp: return log(a) * xv + a * exp(b);
            case ToyKind::SumDiff: return (a + b) * xv + exp(a - b);
            case ToyKind::CubeSq: {
                S s = a + b, d = a - b;
                return s * s * s * xv + d * d;
            }
        }
        throw InputError("unknown toy kind");
    }

    template <class S>
    std::vector<S> predict_batch(const std::vector<std::vector<double>>& xs,
                                 std::span<const S> th) const {
        std::vector<S> out;
        out.reserve(xs.size());
        for (const auto& x : xs) out.push_back(predict<S>(x, th));
        return out;
    }

    // Maps (a, b) of the plain linear chart into this chart.
    std::vector<double> from_linear(double a0, double b0) const {
        switch (kind) {
            case ToyKind::Linear:  return {a0, b0};
            case ToyKind::ExpExp:  return {std::log(a0), std::log(b0)};
            case ToyKind::SqrtExp: return {a0 * a0, std::log(b0)};
            case ToyKind::LogAExp: return {std::exp(a0), std::log(b0) - a0};
            case ToyKind::SumDiff: {
                const double d = std::log(b0);
                return {0.5 * (a0 + d), 0.5 * (a0 - d)};
            }
            case ToyKind::CubeSq: {
                const double s = std::cbrt(a0), d = -std::sqrt(b0);
                return {0.5 * (s + d), 0.5 * (s - d)};
            }
        }
        throw InputError("unknown toy kind");
    }
};

inline const char* toy_kind_name(ToyKind k) {
    switch (k) {
        case ToyKind::Linear:  return "a*x + b";
        case ToyKind::ExpExp:  return "exp(a)*x + exp(b)";
        case ToyKind::SqrtExp: return "sqrt(a)*x + exp(b)";
        case ToyKind::LogAExp: return "ln(a)*x + a*exp(b)";
        case ToyKind::SumDiff: return "(a+b)*x + exp(a-b)";
        case ToyKind::CubeSq:  return "(a+b)^3*x + (a-b)^2";
    }
    return "?";
}

// ---- cosmological distance modulus ----

inline constexpr double kSpeedOfLightKmS = 299792.458;

// mu(z; Omega_m, w) = 25 + 5 log10 d_L[Mpc] with
// d_L = (1+z) (c/H0) \int_0^z dx (Omega_m (1+x)^3 + (1-Omega_m)(1+x)^{3(1+w)})^{-1/2}.
// H0 is held fixed; the two free parameters are Omega_m in (0,1) and w < 0.
struct DistanceModulusModel {
    double hubble_h0 = 70.0;  // km/s/Mpc
    double quad_rtol = 1e-10;

    int dim() const { return 2; }
    std::vector<std::string> param_names() const { return {"Omega_m", "w"}; }
    bool injective() const { return true; }

    ParamDomain domain() const {
        ParamDomain d = ParamDomain::unbounded(2);
        d.box[0] = {0.0, 1.0};
        d.box[1].second = 0.0;
        return d;
    }

    template <class S>
    S comoving_integral(double z, std::span<const S> th) const {
        const S om = th[0];
        const S we = 3.0 * (th[1] + 1.0);
        auto integrand = [&](double x) -> S {
            const double u = 1.0 + x;
            return S(1.0) / sqrt(om * (u * u * u) + (1.0 - om) * pow(u, we));
        };
        return integrate_adaptive<S>(integrand, 0.0, z, quad_rtol);
    }

    template <class S>
    S predict(std::span<const double> x, std::span<const S> th) const {
        const double z = x[0];
        const double d_h = kSpeedOfLightKmS / hubble_h0;  // Mpc
        S d_l = (1.0 + z) * d_h * comoving_integral(z, th);
        return 25.0 + 5.0 * log10(d_l);
    }

    template <class S>
    std::vector<S> predict_batch(const std::vector<std::vector<double>>& xs,
                                 std::span<const S> th) const {
        std::vector<S> out;
        out.reserve(xs.size());
        for (const auto& x : xs) out.push_back(predict<S>(x, th));
        return out;
    }
};

// Convenience scalar entry point.
inline double distance_modulus(double z, double omega_m, double w, double h0 = 70.0) {
    if (!(z >= 0.0)) throw InputError("distance_modulus: z must be nonnegative");
    DistanceModulusModel m;
    m.hubble_h0 = h0;
    const double th[2] = {omega_m, w};
    const double x[1] = {z};
    return m.predict<double>(x, th);
}

// ---- SIR epidemic model ----

// d/dt (S, I, R) = (-beta S I, beta S I - gamma I, gamma I).
template <class S>
void sir_rhs(std::span<const S> state, const S& beta, const S& gamma, std::span<S> out) {
    const S infection = beta * state[0] * state[1];
    const S recovery = gamma * state[1];
    out[0] = -infection;
    out[1] = infection - recovery;
    out[2] = recovery;
}

inline std::vector<double> sir_rhs(std::span<const double> state, double beta, double gamma) {
    std::vector<double> out(3);
    sir_rhs<double>(state, beta, gamma, out);
    return out;
}

// Observable: infected count I(t). Parameters theta = (I0, beta, gamma) with
// initial state (population - I0, I0, 0) at t = 0.
struct SirModel {
    double population = kBoardingSchoolPopulation;
    double solve_rtol = 1e-8;
    double solve_atol = 1e-8;

    int dim() const { return 3; }
    std::vector<std::string> param_names() const { return {"I0", "beta", "gamma"}; }
    bool injective() const { return true; }

    ParamDomain domain() const {
        ParamDomain d = ParamDomain::unbounded(3);
        d.box[0] = {0.0, population};
        d.box[1].first = 0.0;
        d.box[2].first = 0.0;
        return d;
    }

    template <class S>
    std::vector<S> predict_at(std::span<const double> ts, std::span<const S> th) const {
        double t_max = 0.0;
        for (double t : ts) {
            if (t < 0.0) throw InputError("sir: negative time");
            t_max = std::max(t_max, t);
        }
        std::vector<S> y0 = {population - th[0], th[0], S{}};
        std::vector<S> out(ts.size());
        if (t_max == 0.0) {
            for (std::size_t i = 0; i < ts.size(); ++i) out[i] = y0[1];
            return out;
        }
        const S beta = th[1], gamma = th[2];
        auto rhs = [&](double, std::span<const S> y, std::span<S> dy) {
            sir_rhs<S>(y, beta, gamma, dy);
        };
        OdeOptions opt;
        opt.rtol = solve_rtol;
        opt.atol = solve_atol;
        auto sol = integrate<S>(rhs, y0, 0.0, t_max, opt);
        for (std::size_t i = 0; i < ts.size(); ++i)
            out[i] = (ts[i] == 0.0) ? y0[1] : sol.eval(ts[i])[1];
        return out;
    }

    template <class S>
    S predict(std::span<const double> x, std::span<const S> th) const {
        const double t[1] = {x[0]};
        return predict_at<S>(t, th)[0];
    }

    template <class S>
    std::vector<S> predict_batch(const std::vector<std::vector<double>>& xs,
                                 std::span<const S> th) const {
        std::vector<double> ts(xs.size());
        for (std::size_t i = 0; i < xs.size(); ++i) ts[i] = xs[i].at(0);
        return predict_at<S>(ts, th);
    }
};

// ---- embedding map ----

// h(theta) = (y_model(x_1; theta), ..., y_model(x_N; theta)).
template <class Model, class S>
std::vector<S> embed(const Model& model, const DataSet& data, std::span<const S> theta) {
    if (static_cast<int>(theta.size()) != model.dim())
        throw InputError("embed: parameter dimension mismatch");
    std::vector<double> th_values(theta.size());
    for (std::size_t i = 0; i < theta.size(); ++i) th_values[i] = value_of(theta[i]);
    model.domain().require(th_values);
    return model.template predict_batch<S>(data.xs, theta);
}

template <class Model>
std::vector<double> embed(const Model& model, const DataSet& data,
                          std::span<const double> theta) {
    return embed<Model, double>(model, data, theta);
}

}  // namespace confbound
