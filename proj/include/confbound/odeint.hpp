#pragma once

// Embedded explicit Runge-Kutta 5(4) (Dormand-Prince pair) with adaptive
// PI step control, free 4th-order dense output, event localisation and
// right-hand-side evaluation counters. The state scalar is generic so that
// dual numbers propagate through the integration (continuous forward
// sensitivities).

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "confbound/dual.hpp"
#include "confbound/errors.hpp"

namespace confbound {

struct OdeOptions {
    double rtol = 1e-8;
    double atol = 1e-10;
    std::vector<double> atol_vec;  // per-component override of atol
    double max_step = std::numeric_limits<double>::infinity();
    double initial_step = 0.0;  // 0 selects the automatic heuristic
    long max_steps = 10'000'000;
    double safety = 0.9;
    double min_factor = 0.2;
    double max_factor = 10.0;
    bool dense = true;
};

template <class S>
struct EventSpec {
    std::function<double(double, std::span<const S>)> value;
    int direction = 0;      // +1 up-crossing, -1 down-crossing, 0 any
    bool terminal = false;  // stop the integration at the located root
    // Optional veto: a located root only counts when accept(...) is true.
    std::function<bool(double, std::span<const S>)> accept;
};

template <class S>
class OdeSolution {
  public:
    struct Segment {
        double t0, h;
        std::vector<S> y0;
        std::array<std::vector<S>, 4> q;  // dense coefficients
    };
    struct EventHit {
        int index;
        double t;
        std::vector<S> y;
    };

    std::vector<double> ts;               // accepted step times
    std::vector<std::vector<S>> states;   // states at ts
    std::vector<Segment> segments;
    std::vector<EventHit> events;
    long rhs_evaluations = 0;
    long accepted_steps = 0;
    long rejected_steps = 0;
    bool event_terminated = false;

    double t_begin() const { return ts.front(); }
    double t_end() const { return ts.back(); }
    const std::vector<S>& final_state() const { return states.back(); }

    std::vector<S> eval_segment_unchecked(std::size_t idx, double t) const {
        const Segment& s = segments[idx];
        const double th = (t - s.t0) / s.h;
        const int n = static_cast<int>(s.y0.size());
        std::vector<S> y(s.y0);
        double thp = th;
        for (int j = 0; j < 4; ++j) {
            for (int i = 0; i < n; ++i) y[i] += (s.h * thp) * s.q[j][i];
            thp *= th;
        }
        return y;
    }

    std::vector<S> eval(double t) const {
        if (segments.empty()) {
            if (states.empty()) throw InputError("ode solution is empty");
            return states.front();
        }
        const double span_len = std::abs(t_end() - t_begin());
        if (t < t_begin() - 1e-9 * (1.0 + span_len) || t > t_end() + 1e-9 * (1.0 + span_len))
            throw InputError("dense output queried outside the integrated span");
        t = std::min(std::max(t, t_begin()), t_end());
        // find segment with t0 <= t
        std::size_t lo = 0, hi = segments.size() - 1;
        while (lo < hi) {
            const std::size_t mid = (lo + hi + 1) / 2;
            if (segments[mid].t0 <= t)
                lo = mid;
            else
                hi = mid - 1;
        }
        return eval_segment_unchecked(lo, t);
    }
};

namespace detail {

inline constexpr double kDpC[6] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0};
inline constexpr double kDpA[6][5] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656}};
inline constexpr double kDpB[6] = {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784,
                                   11.0 / 84};
inline constexpr double kDpE[7] = {71.0 / 57600,   0.0,        -71.0 / 16695, 71.0 / 1920,
                                   -17253.0 / 339200, 22.0 / 525, -1.0 / 40};
// Free 4th-order interpolant coefficients (rows follow the stages).
inline constexpr double kDpP[7][4] = {
    {1.0, -8048581381.0 / 2820520608.0, 8663915743.0 / 2820520608.0,
     -12715105075.0 / 11282082432.0},
    {0.0, 0.0, 0.0, 0.0},
    {0.0, 131558114200.0 / 32700410799.0, -68118460800.0 / 10900136933.0,
     87487479700.0 / 32700410799.0},
    {0.0, -1754552775.0 / 470086768.0, 14199869525.0 / 1410260304.0,
     -10690763975.0 / 1880347072.0},
    {0.0, 127303824393.0 / 49829197408.0, -318862633887.0 / 49829197408.0,
     701980252875.0 / 199316789632.0},
    {0.0, -282668133.0 / 205662961.0, 2019193451.0 / 616988883.0, -1453857185.0 / 822651844.0},
    {0.0, 40617522.0 / 29380423.0, -110615467.0 / 29380423.0, 69997945.0 / 29380423.0}};

template <class S, class F>
void foreach_scalar(const S& x, F&& f) {
    if constexpr (std::is_floating_point_v<S>) {
        f(x);
    } else {
        foreach_scalar(x.value, f);
        for (const auto& p : x.partials) foreach_scalar(p, f);
    }
}

// Scaled RMS norm of err over all scalar components.
template <class S>
double error_norm(const std::vector<S>& err, const std::vector<S>& y0, const std::vector<S>& y1,
                  double rtol, const std::vector<double>& atol) {
    double acc = 0.0;
    long m = 0;
    for (std::size_t i = 0; i < err.size(); ++i) {
        // walk the three duals in lock-step by flattening each to a buffer
        thread_local std::vector<double> fe, f0, f1;
        fe.clear(); f0.clear(); f1.clear();
        foreach_scalar(err[i], [&](double v) { fe.push_back(v); });
        foreach_scalar(y0[i], [&](double v) { f0.push_back(v); });
        foreach_scalar(y1[i], [&](double v) { f1.push_back(v); });
        for (std::size_t k = 0; k < fe.size(); ++k) {
            const double scale = atol[i] + rtol * std::max(std::abs(f0[k]), std::abs(f1[k]));
            const double q = fe[k] / scale;
            acc += q * q;
            ++m;
        }
    }
    return std::sqrt(acc / static_cast<double>(m));
}

template <class S>
std::vector<double> values_of(const std::vector<S>& y) {
    std::vector<double> v(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) v[i] = value_of(y[i]);
    return v;
}

}  // namespace detail

// Integrates dy/dt = rhs(t, y) from t0 to t1 (t1 > t0).
// rhs signature: void(double t, std::span<const S> y, std::span<S> dy).
template <class S, class RHS>
OdeSolution<S> integrate(RHS&& rhs, std::span<const S> y0, double t0, double t1,
                         const OdeOptions& opt = {},
                         std::span<const EventSpec<S>> events = {}) {
    if (!(t1 > t0)) throw InputError("integrate: need t1 > t0");
    if (!(opt.rtol >= 1e-14 && opt.rtol <= 1e-2))
        throw InputError("integrate: rtol must lie in [1e-14, 1e-2]");
    const int n = static_cast<int>(y0.size());
    std::vector<double> atol(n, opt.atol);
    if (!opt.atol_vec.empty()) {
        if (static_cast<int>(opt.atol_vec.size()) != n)
            throw InputError("integrate: atol_vec size mismatch");
        atol = opt.atol_vec;
    }

    OdeSolution<S> sol;
    std::vector<S> y(y0.begin(), y0.end());
    double t = t0;
    sol.ts.push_back(t);
    sol.states.push_back(y);

    std::array<std::vector<S>, 7> k;
    for (auto& ki : k) ki.assign(n, S{});
    std::vector<S> ytmp(n), ynew(n), yerr(n);

    auto call_rhs = [&](double tt, const std::vector<S>& yy, std::vector<S>& dy) {
        rhs(tt, std::span<const S>(yy), std::span<S>(dy));
        ++sol.rhs_evaluations;
    };

    call_rhs(t, y, k[0]);

    // event bookkeeping: value at the current accepted point
    std::vector<double> gprev(events.size());
    for (std::size_t e = 0; e < events.size(); ++e)
        gprev[e] = events[e].value(t, std::span<const S>(y));

    // automatic initial step (classic heuristic from rhs magnitude)
    double h = opt.initial_step;
    if (h <= 0.0) {
        auto rms = [&](const std::vector<S>& v, const std::vector<S>& ref) {
            double acc = 0.0;
            long m = 0;
            for (int i = 0; i < n; ++i) {
                const double scale = atol[i] + opt.rtol * std::abs(value_of(ref[i]));
                const double q = value_of(v[i]) / scale;
                acc += q * q;
                ++m;
            }
            return std::sqrt(acc / m);
        };
        const double d0 = rms(y, y), d1 = rms(k[0], y);
        double h0 = (d0 >= 1e-5 && d1 >= 1e-5) ? 0.01 * d0 / d1 : 1e-6;
        h0 = std::min(h0, (t1 - t0) * 0.5);
        for (int i = 0; i < n; ++i) ytmp[i] = y[i] + h0 * k[0][i];
        call_rhs(t + h0, ytmp, k[1]);
        for (int i = 0; i < n; ++i) yerr[i] = (k[1][i] - k[0][i]) / h0;
        const double d2 = rms(yerr, y);
        double h1;
        if (std::max(d1, d2) <= 1e-15)
            h1 = std::max(1e-6, h0 * 1e-3);
        else
            h1 = std::pow(0.01 / std::max(d1, d2), 0.2);
        h = std::min({100.0 * h0, h1, opt.max_step, t1 - t0});
    }
    h = std::min({h, opt.max_step, t1 - t0});

    double err_prev = 1e-4;
    bool just_rejected = false;
    long steps = 0;

    while (t < t1) {
        if (++steps > opt.max_steps)
            throw IntegrationError("integrate: step budget exhausted", t, detail::values_of(y));
        if (h < 1e-14 * std::max(1.0, std::abs(t)))
            throw IntegrationError(
                "integrate: step size underflow (problem too stiff for an explicit method)", t,
                detail::values_of(y));
        bool last = false;
        if (t + 1.01 * h >= t1) {  // stretch the final step to land on t1
            h = t1 - t;
            last = true;
        }

        // stages 2..6
        for (int s = 1; s < 6; ++s) {
            for (int i = 0; i < n; ++i) {
                S acc = y[i];
                for (int j = 0; j < s; ++j) acc += (h * detail::kDpA[s][j]) * k[j][i];
                ytmp[i] = acc;
            }
            call_rhs(t + detail::kDpC[s] * h, ytmp, k[s]);
        }
        // 5th-order solution and trailing stage (FSAL)
        for (int i = 0; i < n; ++i) {
            S acc = y[i];
            for (int j = 0; j < 6; ++j) acc += (h * detail::kDpB[j]) * k[j][i];
            ynew[i] = acc;
        }
        call_rhs(t + h, ynew, k[6]);
        for (int i = 0; i < n; ++i) {
            S acc{};
            for (int j = 0; j < 7; ++j) acc += (h * detail::kDpE[j]) * k[j][i];
            yerr[i] = acc;
        }
        const double err = detail::error_norm(yerr, y, ynew, opt.rtol, atol);

        if (err <= 1.0) {
            // accept
            typename OdeSolution<S>::Segment seg;
            if (opt.dense) {
                seg.t0 = t;
                seg.h = h;
                seg.y0 = y;
                for (int j = 0; j < 4; ++j) {
                    seg.q[j].assign(n, S{});
                    for (int s = 0; s < 7; ++s) {
                        const double p = detail::kDpP[s][j];
                        if (p == 0.0) continue;
                        for (int i = 0; i < n; ++i) seg.q[j][i] += p * k[s][i];
                    }
                }
                sol.segments.push_back(std::move(seg));
            }
            const double t_new = last ? t1 : t + h;

            // event detection over [t, t_new]
            bool terminated = false;
            double t_term = t_new;
            for (std::size_t e = 0; e < events.size() && !terminated; ++e) {
                const double g1 = events[e].value(t_new, std::span<const S>(ynew));
                const double g0 = gprev[e];
                gprev[e] = g1;
                const bool crossed = (g0 < 0.0 && g1 >= 0.0) || (g0 > 0.0 && g1 <= 0.0);
                if (!crossed || g0 == 0.0) continue;
                const int dir = (g1 > g0) ? +1 : -1;
                if (events[e].direction != 0 && dir != events[e].direction) continue;
                if (!opt.dense) throw InputError("integrate: events require dense output");
                // bisect on the interpolant
                double ta = t, tb = t_new, ga = g0;
                for (int it = 0; it < 90 && tb - ta > 0.0; ++it) {
                    const double tm = 0.5 * (ta + tb);
                    if (tm <= ta || tm >= tb) break;
                    const auto ym = sol.eval_segment_unchecked(sol.segments.size() - 1, tm);
                    const double gm = events[e].value(tm, std::span<const S>(ym));
                    if ((ga < 0.0) == (gm < 0.0)) {
                        ta = tm;
                        ga = gm;
                    } else {
                        tb = tm;
                    }
                }
                const double tr = 0.5 * (ta + tb);
                auto yr = sol.eval_segment_unchecked(sol.segments.size() - 1, tr);
                if (events[e].accept && !events[e].accept(tr, std::span<const S>(yr))) continue;
                sol.events.push_back({static_cast<int>(e), tr, yr});
                if (events[e].terminal) {
                    terminated = true;
                    t_term = tr;
                }
            }

            ++sol.accepted_steps;
            if (terminated) {
                sol.event_terminated = true;
                sol.ts.push_back(t_term);
                sol.states.push_back(sol.eval_segment_unchecked(sol.segments.size() - 1, t_term));
                return sol;
            }

            t = t_new;
            y = ynew;
            sol.ts.push_back(t);
            sol.states.push_back(y);
            std::swap(k[0], k[6]);  // FSAL

            double factor;
            if (err == 0.0)
                factor = opt.max_factor;
            else
                factor = opt.safety * std::pow(err, -0.14) * std::pow(err_prev, 0.08);
            factor = std::min(opt.max_factor, std::max(opt.min_factor, factor));
            if (just_rejected) factor = std::min(factor, 1.0);
            just_rejected = false;
            err_prev = std::max(err, 1e-10);
            h = std::min({h * factor, opt.max_step, std::max(t1 - t, 1e-300)});
        } else {
            ++sol.rejected_steps;
            just_rejected = true;
            const double factor =
                std::max(opt.min_factor, opt.safety * std::pow(err, -0.2));
            h *= factor;
        }
    }
    return sol;
}

}  // namespace confbound
