#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "degree_law.hpp"
#include "errors.hpp"
#include "lamperti.hpp"
#include "rng.hpp"
#include "step_path.hpp"

// Continuum side of the toolkit: spectrally positive alpha-stable paths with
// Laplace exponent A lambda^alpha, their normalized excursions, exponential
// and polynomial tiltings realized as importance weights, Poisson marks under
// an excursion, and the limit height profile obtained from the Lamperti pair.

namespace critsir {

struct StableConfig {
    double alpha = 1.5;
    // Laplace amplitude: E[exp(-lambda X(t))] = exp(t A lambda^alpha).
    double A = 1.0;
    // Mean degree of the matching critical law; marks fall with intensity
    // 1/delta and the exponential tilt divides by it as well.
    double delta = 1.0;
    double dt = 1e-3; // grid step for continuum-side paths
    // Present when the config was built from a degree law; the walk route of
    // the excursion sampler draws its increments from this law.
    std::optional<CriticalDegreeLaw> law;
};

inline void validate(const StableConfig& cfg) {
    if (!(cfg.alpha > 1.0 && cfg.alpha < 2.0))
        throw DomainError("stable config: alpha must lie in (1,2)");
    if (!(cfg.A > 0.0)) throw DomainError("stable config: amplitude must be positive");
    if (!(cfg.delta > 0.0)) throw DomainError("stable config: delta must be positive");
    if (!(cfg.dt > 0.0)) throw DomainError("stable config: dt must be positive");
}

inline StableConfig stable_config_from_law(const CriticalDegreeLaw& law, double dt) {
    StableConfig cfg;
    cfg.alpha = law.alpha;
    cfg.A = law.stable_scale;
    cfg.delta = law.delta;
    cfg.dt = dt;
    cfg.law = law;
    validate(cfg);
    return cfg;
}

// A path bundled with a positive importance weight; meta names the tilting
// that produced the weight.
struct WeightedPath {
    StepPath path;
    double weight = 1.0;
    std::string meta;
};

namespace detail {

constexpr double kPi = 3.14159265358979323846;

// Standard totally right-skewed stable variate, unit scale, zero shift. For
// alpha in (1,2) it has mean zero, only positive jumps in the limit process
// it drives, and E[exp(-lambda W)] = exp(lambda^alpha / |cos(pi alpha/2)|).
inline double standard_skewed_stable(double alpha, Rng& rng) {
    const double b = kPi / 2.0 - kPi / alpha; // arctan(tan(pi alpha/2)) / alpha
    const double s = std::pow(-std::cos(kPi * alpha / 2.0), -1.0 / alpha);
    for (int tries = 0; tries < 128; ++tries) {
        const double v = kPi * (rng.uniform01() - 0.5);
        const double e = rng.exponential();
        const double th = alpha * (v + b);
        const double w = s * std::sin(th) / std::pow(std::cos(v), 1.0 / alpha) *
                         std::pow(std::cos(v - th) / e, (1.0 - alpha) / alpha);
        if (std::isfinite(w)) return w;
    }
    throw StateError("standard_skewed_stable: no finite variate after 128 draws");
}

// Multiplier turning a standard skewed variate into an increment of X over
// the given duration.
inline double stable_increment_scale(double alpha, double A, double duration) {
    return std::pow(A * duration * -std::cos(kPi * alpha / 2.0), 1.0 / alpha);
}

} // namespace detail

// One increment of X over the given duration.
inline double sample_stable_increment(const StableConfig& cfg, double duration, Rng& rng) {
    validate(cfg);
    if (!(duration > 0.0))
        throw DomainError("sample_stable_increment: duration must be positive");
    return detail::stable_increment_scale(cfg.alpha, cfg.A, duration) *
           detail::standard_skewed_stable(cfg.alpha, rng);
}

// X sampled on the grid dt, 2dt, ..., round(T/dt) dt, as a walk path with
// the origin X(0) = 0 implicit.
inline StepPath sample_stable_path(const StableConfig& cfg, double T, Rng& rng) {
    validate(cfg);
    if (!(T > 0.0)) throw DomainError("sample_stable_path: horizon must be positive");
    const auto steps = static_cast<std::uint64_t>(std::llround(T / cfg.dt));
    if (steps < 1) throw DomainError("sample_stable_path: dt exceeds the horizon");
    const double scale = detail::stable_increment_scale(cfg.alpha, cfg.A, cfg.dt);
    StepPath out;
    out.kind = PathKind::walk;
    out.dt = cfg.dt;
    out.meta = "stable";
    out.values.reserve(steps);
    double x = 0.0;
    for (std::uint64_t k = 0; k < steps; ++k) {
        x += scale * detail::standard_skewed_stable(cfg.alpha, rng);
        out.values.push_back(x);
    }
    return out;
}

// Radon-Nikodym weight of the tilted path law against the stable law on
// [0, t]. The stochastic integral of s against dX is discretized with the
// integrand frozen at the left endpoint of every grid cell:
//   exp(-delta^{-1} sum_i s_{i-1} dX_i - A t^{alpha+1} / ((alpha+1) delta^alpha)).
// An empty path has weight exactly 1.
inline double tilted_path_weight(const StepPath& path, const StableConfig& cfg) {
    validate(cfg);
    double integral = 0.0, prev = 0.0;
    for (std::size_t i = 0; i < path.values.size(); ++i) {
        integral += static_cast<double>(i) * path.dt * (path.values[i] - prev);
        prev = path.values[i];
    }
    const double t = static_cast<double>(path.values.size()) * path.dt;
    const double compensator = cfg.A * std::pow(t, cfg.alpha + 1.0) /
                               ((cfg.alpha + 1.0) * std::pow(cfg.delta, cfg.alpha));
    return std::exp(-integral / cfg.delta - compensator);
}

// Normalized excursion by rejection on the critical discrete walk: run
// S(k) = sum_{j<=k} (d_j - 2) with d_j size-biased until it first hits -1,
// and accept when the hitting time L lies in [N, (1+eta)N]. Space is then
// rescaled by L^{-1/alpha} and time by L^{-1}. Interior values store
// S(k) + 1, so the path is strictly positive inside (0,1) and exactly 0 at
// both endpoints; the lattice structure of the walk survives the rescaling.
inline StepPath sample_excursion(const StableConfig& cfg, const SizeBiasedDegreeSampler& degree,
                                 std::uint64_t N, double eta, Rng& rng,
                                 std::uint64_t max_attempts = 500000) {
    validate(cfg);
    if (N < 1) throw DomainError("sample_excursion: target length must be at least 1");
    if (!(eta > 0.0 && eta < 1.0))
        throw DomainError("sample_excursion: window fraction must lie in (0,1)");
    const auto lmax =
        static_cast<std::uint64_t>(std::floor((1.0 + eta) * static_cast<double>(N)));
    std::vector<std::int64_t> s(lmax);
    std::uint64_t longest = 0;
    for (std::uint64_t attempt = 1; attempt <= max_attempts; ++attempt) {
        std::int64_t walk = 0;
        std::uint64_t len = 0;
        for (std::uint64_t k = 0; k < lmax; ++k) {
            walk += static_cast<std::int64_t>(degree(rng)) - 2;
            s[k] = walk;
            if (walk == -1) {
                len = k + 1;
                break;
            }
        }
        longest = std::max(longest, len == 0 ? lmax : len);
        if (len < N) continue; // hit too early, or never closed inside the window
        StepPath out;
        out.kind = PathKind::walk;
        out.dt = 1.0 / static_cast<double>(len);
        out.time_scale = out.dt;
        out.space_scale = std::pow(static_cast<double>(len), -1.0 / cfg.alpha);
        out.meta = "excursion:walk";
        out.values.resize(len);
        for (std::uint64_t k = 0; k < len; ++k)
            out.values[k] = static_cast<double>(s[k] + 1) * out.space_scale;
        return out;
    }
    throw RejectionBudgetExceeded("sample_excursion: no hitting time landed in the window",
                                  max_attempts, longest);
}

inline StepPath sample_excursion(const StableConfig& cfg, std::uint64_t N, double eta, Rng& rng,
                                 std::uint64_t max_attempts = 500000) {
    validate(cfg);
    if (!cfg.law) throw DomainError("sample_excursion: the walk route needs a degree law");
    const SizeBiasedDegreeSampler degree(*cfg.law);
    return sample_excursion(cfg, degree, N, eta, rng, max_attempts);
}

// Grid version of the straddling construction: g is the last grid time <= 1
// at which the path attains its running infimum, d the first new infimum
// after time 1; the normalized excursion is the path over (g, d], shifted by
// X(g) and rescaled to unit length. The straddle length d - g is heavy
// tailed with infinite mean, so a path whose straddle has not closed by the
// horizon cap is discarded and redrawn whole; by self-similarity the
// normalized shape is independent of the straddle length, so the redraw does
// not bias it. The grid passage below the old infimum overshoots by part of
// one cell, so the final value is clamped to 0; this is the route's
// advertised one-cell tolerance.
inline StepPath sample_excursion_chaumont(const StableConfig& cfg, Rng& rng,
                                          std::uint64_t max_attempts = 64) {
    validate(cfg);
    if (!(cfg.dt < 1.0))
        throw DomainError("sample_excursion_chaumont: grid must resolve time 1");
    const double scale = detail::stable_increment_scale(cfg.alpha, cfg.A, cfg.dt);
    const auto k1 = static_cast<std::size_t>(std::floor(1.0 / cfg.dt));
    const auto cap = k1 + static_cast<std::size_t>(std::ceil(64.0 / cfg.dt));
    std::vector<double> x;
    std::uint64_t longest = 0;
    for (std::uint64_t attempt = 1; attempt <= max_attempts; ++attempt) {
        x.assign(1, 0.0);
        double cur = 0.0, curmin = 0.0;
        std::size_t g = 0;
        for (std::size_t k = 1; k <= k1; ++k) {
            cur += scale * detail::standard_skewed_stable(cfg.alpha, rng);
            x.push_back(cur);
            if (cur <= curmin) {
                curmin = cur;
                g = k;
            }
        }
        std::size_t d = 0;
        for (std::size_t k = k1 + 1; k <= cap; ++k) {
            cur += scale * detail::standard_skewed_stable(cfg.alpha, rng);
            x.push_back(cur);
            if (cur < curmin) {
                d = k;
                break;
            }
        }
        longest = std::max<std::uint64_t>(longest, (d == 0 ? cap : d) - g);
        if (d == 0) continue;
        const std::size_t len = d - g;
        StepPath out;
        out.kind = PathKind::walk;
        out.dt = 1.0 / static_cast<double>(len);
        out.time_scale = 1.0 / (static_cast<double>(len) * cfg.dt);
        out.space_scale = std::pow(static_cast<double>(len) * cfg.dt, -1.0 / cfg.alpha);
        out.meta = "excursion:chaumont";
        out.values.resize(len);
        for (std::size_t i = 1; i < len; ++i)
            out.values[i - 1] = (x[g + i] - x[g]) * out.space_scale;
        out.values[len - 1] = 0.0;
        return out;
    }
    throw RejectionBudgetExceeded(
        "sample_excursion_chaumont: straddling excursion never closed by the horizon cap",
        max_attempts, longest);
}

// e_x(t) = x^{1/alpha} e(t/x): the grid is kept, cell width and values scale.
inline StepPath scale_excursion(const StepPath& e, double x, double alpha) {
    if (!(x > 0.0)) throw DomainError("scale_excursion: scale must be positive");
    if (!(alpha > 1.0 && alpha < 2.0))
        throw DomainError("scale_excursion: alpha must lie in (1,2)");
    const double sp = std::pow(x, 1.0 / alpha);
    StepPath out = e;
    out.dt = e.dt * x;
    out.time_scale = e.time_scale * x;
    out.space_scale = e.space_scale * sp;
    for (double& v : out.values) v *= sp;
    return out;
}

// Step integral of the excursion: cell value times cell width, summed. With
// zero endpoint values this coincides with the left-endpoint Riemann sum.
inline double excursion_area(const StepPath& e) {
    double s = 0.0;
    for (double v : e.values) s += v;
    return s * e.dt;
}

// Tilting mode: exponential exp(area/delta) or polynomial area^k. The tilted
// laws are realized through importance weights only; consumers estimate
// expectations self-normalized.
struct TiltMode {
    enum class Kind { exp_area, poly_area };
    Kind kind = Kind::exp_area;
    double delta = 1.0; // exp_area
    unsigned k = 1;     // poly_area

    static TiltMode exp_tilt(double delta) {
        TiltMode m;
        m.kind = Kind::exp_area;
        m.delta = delta;
        return m;
    }
    static TiltMode poly_tilt(unsigned k) {
        TiltMode m;
        m.kind = Kind::poly_area;
        m.k = k;
        return m;
    }
    std::string tag() const {
        if (kind == Kind::exp_area) return "tilt:exp(" + std::to_string(delta) + ")";
        return "tilt:poly(" + std::to_string(k) + ")";
    }
};

inline double tilt_weight(const StepPath& e, const TiltMode& mode) {
    const double area = excursion_area(e);
    if (mode.kind == TiltMode::Kind::exp_area) {
        if (!(mode.delta > 0.0)) throw DomainError("tilt_weight: delta must be positive");
        return std::exp(area / mode.delta);
    }
    double w = 1.0; // k = 0 leaves the law untilted
    for (unsigned i = 0; i < mode.k; ++i) w *= area;
    return w;
}

inline WeightedPath tilt_path(const StepPath& e, const TiltMode& mode) {
    WeightedPath out{e, tilt_weight(e, mode), mode.tag()};
    if (!(out.weight > 0.0) || !std::isfinite(out.weight))
        throw DomainError("tilt_path: weight must be positive and finite");
    return out;
}

// A point (s, y) strictly under the excursion together with its completion
// time t = inf{u >= s : e(u) <= y}.
struct PoissonMark {
    double s = 0.0;
    double y = 0.0;
    double t = 0.0;
};

struct PoissonMarks {
    std::vector<PoissonMark> marks; // sorted by abscissa
    double intensity = 0.0;         // 1/delta

    std::size_t size() const { return marks.size(); }
    bool empty() const { return marks.empty(); }
};

// Step reading of the excursion: values[k] rules the cell [k dt, (k+1) dt).
inline double excursion_cell_value(const StepPath& e, double s) {
    if (e.values.empty() || s < 0.0) return 0.0;
    const auto k = static_cast<std::size_t>(std::floor(s / e.dt));
    return k < e.values.size() ? e.values[k] : 0.0;
}

// inf{u >= s : e(u) <= y} on the cell grid; the end of the domain when the
// path never drops that low again. Nonincreasing in y: raising the bar can
// only enlarge the set swept by the infimum.
inline double mark_completion_time(const StepPath& e, double s, double y) {
    if (!(s >= 0.0)) throw DomainError("mark_completion_time: negative abscissa");
    if (e.values.empty()) return s;
    auto k = static_cast<std::size_t>(std::floor(s / e.dt));
    if (k >= e.values.size()) return s;
    if (e.values[k] <= y) return s;
    for (++k; k < e.values.size(); ++k)
        if (e.values[k] <= y) return static_cast<double>(k) * e.dt;
    return static_cast<double>(e.values.size()) * e.dt;
}

// Uniform Poisson rain on the bounding box of the excursion, thinned to the
// region under the curve; the accepted count is Poisson(area / delta).
inline PoissonMarks poisson_marks(const StepPath& e, double delta, Rng& rng) {
    if (!(delta > 0.0)) throw DomainError("poisson_marks: delta must be positive");
    PoissonMarks out;
    out.intensity = 1.0 / delta;
    if (e.values.empty()) return out;
    const double T = static_cast<double>(e.values.size()) * e.dt;
    double m = 0.0;
    for (double v : e.values) m = std::max(m, v);
    if (!(m > 0.0)) return out;
    const std::uint64_t n = rng.poisson(T * m / delta);
    for (std::uint64_t i = 0; i < n; ++i) {
        const double s = T * rng.uniform01();
        const double y = m * rng.uniform01();
        if (y <= excursion_cell_value(e, s))
            out.marks.push_back({s, y, mark_completion_time(e, s, y)});
    }
    std::sort(out.marks.begin(), out.marks.end(),
              [](const PoissonMark& a, const PoissonMark& b) { return a.s < b.s; });
    return out;
}

// Embed an excursion as a step function, reading values[k] as the height on
// the k-th cell. Trailing zeros are dropped so the final piece is positive,
// and runs of equal values merge into single pieces; merged pieces keep
// integer widths exact on unrescaled grids, which makes the Lamperti clock
// of a discrete level profile exact. Interior zeros are rejected because the
// clock would freeze there.
inline StepFn<double> excursion_to_step(const StepPath& e) {
    std::size_t m = e.values.size();
    while (m > 0 && e.values[m - 1] == 0.0) --m;
    if (m == 0) throw ZeroFunction("excursion_to_step: excursion vanishes identically");
    StepFn<double> f;
    f.breaks.push_back(0.0);
    for (std::size_t k = 0; k < m; ++k) {
        if (!(e.values[k] > 0.0))
            throw DomainError("excursion_to_step: interior value not positive");
        if (!f.values.empty() && e.values[k] == f.values.back()) {
            f.breaks.back() = static_cast<double>(k + 1) * e.dt;
        } else {
            f.breaks.push_back(static_cast<double>(k + 1) * e.dt);
            f.values.push_back(e.values[k]);
        }
    }
    return f;
}

// Limit height profile Z and ball-mass process C of an excursion: the
// Lamperti pair of the step embedding, sampled back onto a uniform grid of
// the requested size (input resolution by default). Z is read at cell
// midpoints, which sit safely inside the clock pieces; C is the running
// integral of the sampled Z and reproduces c0 exactly when the output grid
// aligns with the piece boundaries.
inline std::pair<StepPath, StepPath> limit_profile(const StepPath& e, std::size_t samples = 0) {
    const StepFn<double> f = excursion_to_step(e);
    const LampertiPair<double> pair = lamperti_pair(f);
    if (samples == 0) samples = e.values.size();
    StepPath Z, C;
    Z.kind = PathKind::profile;
    C.kind = PathKind::cumulative;
    const double dt = pair.iota_terminal / static_cast<double>(samples);
    Z.dt = dt;
    C.dt = dt;
    Z.meta = "limit profile";
    C.meta = "limit profile";
    double mass = 0.0;
    for (std::size_t j = 0; j < samples; ++j) {
        const double z = h0_at(pair, (static_cast<double>(j) + 0.5) * dt);
        Z.values.push_back(z);
        mass += z * dt;
        C.values.push_back(mass);
    }
    return {Z, C};
}

} // namespace critsir
