#pragma once

// Time-change machinery for nonnegative excursion functions: the clock
// iota(t) = int_0^t ds/f(s), the pair (h0, c0) solving D+c0 = h0 = f(c0),
// classification of solutions to the time-change equation, and the path
// functionals radius, width and depth quantiles.
//
// Two representations are supported. Piecewise-constant functions are exact:
// every quantity below is closed-form in the breakpoint arithmetic, so they
// can be instantiated on exact rationals as well as on doubles. Analytic
// inputs go through adaptive quadrature with divergence detection; for those
// the pair is exposed through pointwise evaluators (the closed forms live in
// the caller's head, not in a struct).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "errors.hpp"

namespace critsir {

template <class T>
struct StepFn {
    std::vector<T> breaks; // 0 = breaks[0] < ... < breaks.back() = zeta
    std::vector<T> values; // values[i] >= 0 on [breaks[i], breaks[i+1]); 0 beyond

    T zeta() const { return breaks.back(); }

    T value_at(T s) const {
        if (s < T(0)) throw DomainError("StepFn: negative time");
        for (std::size_t i = 0; i < values.size(); ++i)
            if (s < breaks[i + 1]) return values[i];
        return T(0);
    }
};

template <class T>
inline void validate(const StepFn<T>& f) {
    if (f.breaks.size() < 2 || f.values.size() + 1 != f.breaks.size())
        throw DomainError("StepFn: breakpoints and values do not line up");
    if (!(f.breaks.front() == T(0))) throw DomainError("StepFn: domain must start at 0");
    for (std::size_t i = 0; i + 1 < f.breaks.size(); ++i)
        if (!(f.breaks[i] < f.breaks[i + 1]))
            throw DomainError("StepFn: breakpoints must increase strictly");
    for (const T& v : f.values)
        if (v < T(0)) throw DomainError("StepFn: negative value");
}

// A real that may be +infinity, usable with value types that have no
// infinity of their own.
template <class T>
struct ExtReal {
    bool finite = true;
    T value{};
};

// Exact clock for step inputs: sum of width/height over [0, t); infinite as
// soon as a zero-height piece of positive width is crossed.
template <class T>
inline ExtReal<T> iota(const StepFn<T>& f, T t) {
    validate(f);
    if (t < T(0) || f.zeta() < t) throw DomainError("iota: time outside [0, zeta]");
    T total(0);
    for (std::size_t i = 0; i < f.values.size() && f.breaks[i] < t; ++i) {
        const T hi = f.breaks[i + 1] < t ? f.breaks[i + 1] : t;
        if (f.values[i] == T(0)) return {false, T(0)};
        total = total + (hi - f.breaks[i]) / f.values[i];
    }
    return {true, total};
}

// The transformed pair for a step input. h0 lives on the transformed time
// axis and equals 0 beyond its last breakpoint; c0 is its running integral,
// evaluated by c0_at. A zero-height piece freezes the clock: mass stops
// short of zeta and the pair is marked trapped (for an input whose first
// piece is zero this degenerates to the zero solution).
template <class T>
struct LampertiPair {
    StepFn<T> h0;
    T mass_reached{};  // lim_t c0(t)
    T iota_terminal{}; // transformed time at which the limit is attained
    bool trapped = false;
};

template <class T>
inline LampertiPair<T> lamperti_pair(const StepFn<T>& f) {
    validate(f);
    bool all_zero = true;
    for (const T& v : f.values) all_zero = all_zero && v == T(0);
    if (all_zero) throw ZeroFunction("lamperti_pair: function vanishes identically");

    LampertiPair<T> out;
    out.h0.breaks.push_back(T(0));
    T u(0), mass(0);
    for (std::size_t i = 0; i < f.values.size(); ++i) {
        if (f.values[i] == T(0)) {
            out.trapped = true;
            break;
        }
        u = u + (f.breaks[i + 1] - f.breaks[i]) / f.values[i];
        out.h0.breaks.push_back(u);
        out.h0.values.push_back(f.values[i]);
        mass = f.breaks[i + 1];
    }
    out.mass_reached = mass;
    out.iota_terminal = u;
    return out;
}

template <class T>
inline T c0_at(const LampertiPair<T>& p, T t) {
    if (t <= T(0)) return T(0);
    T mass(0);
    for (std::size_t i = 0; i < p.h0.values.size(); ++i) {
        if (t < p.h0.breaks[i + 1])
            return mass + (t - p.h0.breaks[i]) * p.h0.values[i];
        mass = mass + (p.h0.breaks[i + 1] - p.h0.breaks[i]) * p.h0.values[i];
    }
    return p.mass_reached;
}

template <class T>
inline T h0_at(const LampertiPair<T>& p, T t) {
    if (t < T(0)) throw DomainError("h0_at: negative time");
    for (std::size_t i = 0; i < p.h0.values.size(); ++i)
        if (t < p.h0.breaks[i + 1]) return p.h0.values[i];
    return T(0);
}

enum class SolutionCase { unique_zero, shifted_family };

template <class T>
struct ClassifyReport {
    SolutionCase kind = SolutionCase::shifted_family;
    bool terminal_finite = true; // whether the clock is finite at zeta-
    T iota_terminal{};           // meaningful only when terminal_finite
};

// A clock that diverges at 0+ leaves only the zero solution; a convergent
// one yields the one-parameter family of shifts of c0. The terminal flag
// separates a clock finite at zeta- (c0 attains zeta in finite time) from an
// infinite one (c0 increases to its limit without attaining it).
template <class T>
inline ClassifyReport<T> classify_solutions(const StepFn<T>& f) {
    validate(f);
    ClassifyReport<T> r;
    if (f.values.front() == T(0)) {
        r.kind = SolutionCase::unique_zero;
        r.terminal_finite = false;
        return r;
    }
    const ExtReal<T> total = iota(f, f.zeta());
    r.terminal_finite = total.finite;
    if (total.finite) r.iota_terminal = total.value;
    return r;
}

template <class T>
inline ExtReal<T> radius(const StepFn<T>& f) {
    return iota(f, f.zeta());
}

template <class T>
inline T width(const StepFn<T>& f) {
    validate(f);
    T best = f.values.front();
    for (const T& v : f.values)
        if (best < v) best = v;
    return best;
}

// u is a mass fraction: the integral runs to u * zeta.
template <class T>
inline ExtReal<T> depth_quantile(const StepFn<T>& f, T u) {
    if (!(T(0) < u && u < T(1))) throw DomainError("depth_quantile: u outside (0,1)");
    return iota(f, u * f.zeta());
}

template <class T>
inline std::vector<ExtReal<T>> order_statistics_depths(const StepFn<T>& f,
                                                       const std::vector<T>& u_sorted) {
    std::vector<ExtReal<T>> out;
    out.reserve(u_sorted.size());
    for (const T& u : u_sorted) out.push_back(depth_quantile(f, u));
    return out;
}

// ---------------------------------------------------------------------------
// Analytic inputs

struct AnalyticFn {
    std::function<double(double)> f; // >= 0, zero outside (0, zeta)
    double zeta = 1.0;
};

namespace detail {

inline double simpson_rec(const std::function<double(double)>& g, double a, double b, double fa,
                          double fm, double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double flm = g(0.5 * (a + m)), frm = g(0.5 * (m + b));
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double both = left + right;
    if (depth <= 0 || std::abs(both - whole) <= 15.0 * tol || !std::isfinite(both))
        return both + (both - whole) / 15.0;
    return simpson_rec(g, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_rec(g, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

inline double simpson(const std::function<double(double)>& g, double a, double b, double tol) {
    if (!(b > a)) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = g(a), fm = g(m), fb = g(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_rec(g, a, b, fa, fm, fb, whole, tol, 40);
}

// Integral of g over (a, b] with a possible blow-up at a: dyadic shells
// closing on a, summed until they stop mattering. Shells that refuse to
// decay signal a divergent integral.
inline double shell_sum_toward(const std::function<double(double)>& g, double sing, double far) {
    const double inf = std::numeric_limits<double>::infinity();
    double total = 0.0, prev = inf;
    int slow = 0;
    for (int k = 0; k < 4000; ++k) {
        const double hi = sing + (far - sing) * std::ldexp(1.0, -k);
        const double lo = sing + (far - sing) * std::ldexp(1.0, -k - 1);
        if (lo == sing || lo == hi) break; // resolution exhausted next to the endpoint
        const double shell =
            sing < far ? simpson(g, lo, hi, 1e-13) : simpson(g, hi, lo, 1e-13);
        if (!std::isfinite(shell)) return inf;
        total += shell;
        if (std::abs(shell) < 1e-13 * (1.0 + std::abs(total))) return total;
        slow = std::abs(shell) > 0.97 * std::abs(prev) ? slow + 1 : 0;
        if (slow >= 24) return inf;
        prev = shell;
    }
    return total;
}

} // namespace detail

// Quadrature clock: both halves of [0, t] are integrated by shells closing
// on their outer endpoints, so integrable endpoint singularities converge
// and non-integrable ones come back as +infinity.
inline double iota(const AnalyticFn& fn, double t) {
    if (t < 0.0 || t > fn.zeta * (1.0 + 1e-12)) throw DomainError("iota: time outside [0, zeta]");
    t = std::min(t, fn.zeta);
    if (t == 0.0) return 0.0;
    auto g = [&fn](double s) { return 1.0 / fn.f(s); };
    const double mid = 0.5 * t;
    return detail::shell_sum_toward(g, 0.0, mid) + detail::shell_sum_toward(g, t, mid);
}

// c0(t) = inf{s : iota(s) > t}, with inf over the empty set landing on the
// first zero of f, i.e. zeta. Monotone bisection on the clock.
inline double c0_at(const AnalyticFn& fn, double t) {
    if (t <= 0.0) return 0.0;
    if (iota(fn, fn.zeta) <= t) return fn.zeta;
    double lo = 0.0, hi = fn.zeta;
    while (hi - lo > 1e-13 * fn.zeta) {
        const double mid = 0.5 * (lo + hi);
        (iota(fn, mid) > t ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

inline double h0_at(const AnalyticFn& fn, double t) {
    const double c = c0_at(fn, t);
    return c >= fn.zeta ? 0.0 : fn.f(c);
}

inline ClassifyReport<double> classify_solutions(const AnalyticFn& fn) {
    auto g = [&fn](double s) { return 1.0 / fn.f(s); };
    const double mid = 0.5 * fn.zeta;
    const double lower = detail::shell_sum_toward(g, 0.0, mid);
    const double upper = detail::shell_sum_toward(g, fn.zeta, mid);
    ClassifyReport<double> r;
    r.kind = std::isfinite(lower) ? SolutionCase::shifted_family : SolutionCase::unique_zero;
    r.terminal_finite = std::isfinite(lower + upper);
    r.iota_terminal = lower + upper;
    return r;
}

inline double radius(const AnalyticFn& fn) { return iota(fn, fn.zeta); }

inline double width(const AnalyticFn& fn) {
    double best = 0.0;
    const int grid = 1 << 12;
    for (int k = 0; k <= grid; ++k)
        best = std::max(best, fn.f(fn.zeta * static_cast<double>(k) / grid));
    return best;
}

inline double depth_quantile(const AnalyticFn& fn, double u) {
    if (!(0.0 < u && u < 1.0)) throw DomainError("depth_quantile: u outside (0,1)");
    return iota(fn, u * fn.zeta);
}

inline std::vector<double> order_statistics_depths(const AnalyticFn& fn,
                                                   const std::vector<double>& u_sorted) {
    std::vector<double> out;
    out.reserve(u_sorted.size());
    for (double u : u_sorted) out.push_back(depth_quantile(fn, u));
    return out;
}

} // namespace critsir
