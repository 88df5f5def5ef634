#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "rng.hpp"
#include "series.hpp"

namespace critsir {

// Critical heavy-tailed degree family
//   nu(1) = p1, nu(2) = p2, nu(k) = c k^{-(alpha+2)} for k >= 3,
// with (p1, p2) pinned by normalization together with the criticality
// constraint sum_k k(k-2) nu(k) = 0, i.e. theta = E[D(D-1)]/E[D] = 1.
struct CriticalDegreeLaw {
    double alpha = 0.0;
    double c = 0.0;
    double p1 = 0.0;
    double p2 = 0.0;
    double delta = 0.0;         // mean degree
    double theta = 1.0;         // E[D(D-1)]/E[D], equals 1 by construction
    double stable_scale = 0.0;  // A = c Gamma(2-alpha) / (delta alpha (alpha-1))

    double pmf(std::uint64_t k) const {
        if (k == 1) return p1;
        if (k == 2) return p2;
        if (k >= 3) return c * std::pow(static_cast<double>(k), -(alpha + 2.0));
        return 0.0;
    }
};

inline CriticalDegreeLaw solve_critical_family(double alpha, double c) {
    if (!(alpha > 1.0 && alpha < 2.0))
        throw DomainError("solve_critical_family: alpha must lie in (1,2)");
    if (!(c > 0.0)) throw DomainError("solve_critical_family: c must be positive");
    const double sa = power_sum_from(alpha);        // sum_{k>=3} k^-alpha
    const double sb = power_sum_from(alpha + 1.0);  // sum_{k>=3} k^-(alpha+1)
    const double s0 = power_sum_from(alpha + 2.0);  // sum_{k>=3} k^-(alpha+2)
    CriticalDegreeLaw law;
    law.alpha = alpha;
    law.c = c;
    law.p1 = c * (sa - 2.0 * sb);    // solves sum_k k(k-2) nu(k) = 0
    law.p2 = 1.0 - law.p1 - c * s0;  // normalization
    if (law.p1 < 0.0 || law.p2 < 0.0)
        throw InfeasibleTail("solve_critical_family: c too large, point masses negative");
    law.delta = law.p1 + 2.0 * law.p2 + c * sb;
    law.theta = 1.0;
    law.stable_scale = c * std::tgamma(2.0 - alpha) / (law.delta * alpha * (alpha - 1.0));
    return law;
}

struct LawMoments {
    double delta = 0.0;          // mean degree
    double second_moment = 0.0;  // E[D^2]
    double theta = 0.0;          // E[D(D-1)] / E[D]
    bool critical = false;       // |theta - 1| <= 1e-9
};

inline LawMoments moments(const CriticalDegreeLaw& law) {
    const double sa = power_sum_from(law.alpha);
    const double sb = power_sum_from(law.alpha + 1.0);
    LawMoments m;
    m.delta = law.p1 + 2.0 * law.p2 + law.c * sb;
    m.second_moment = law.p1 + 4.0 * law.p2 + law.c * sa;
    m.theta = (m.second_moment - m.delta) / m.delta;
    m.critical = std::abs(m.theta - 1.0) <= 1e-9;
    return m;
}

// Finite-support law for hand-constructed checks.
struct FiniteLaw {
    std::vector<std::pair<std::uint64_t, double>> pmf;  // (degree, probability)
};

inline LawMoments moments(const FiniteLaw& law) {
    LawMoments m;
    for (const auto& [k, p] : law.pmf) {
        const double kd = static_cast<double>(k);
        m.delta += kd * p;
        m.second_moment += kd * kd * p;
    }
    m.theta = (m.second_moment - m.delta) / m.delta;
    m.critical = std::abs(m.theta - 1.0) <= 1e-9;
    return m;
}

// Asymptotic probability that the pairing multigraph is simple.
inline double simple_probability_limit(double theta) {
    if (theta < 0.0) throw DomainError("simple_probability_limit: theta must be >= 0");
    return std::exp(-theta / 2.0 - theta * theta / 4.0);
}

struct DegreeSequence {
    std::vector<std::uint64_t> degrees;
    bool parity_adjusted = false;
};

namespace detail {

// Exact sampling of a discrete power tail: pmf(k) proportional to k^{-s} on
// {m, m+1, ...}. Proposal is the continuous Pareto density on [m-1/2, inf)
// binned to the nearest integer; the midpoint rule underestimates the convex
// cell integral, so pmf(k)/cell(k) is a valid acceptance probability.
inline std::uint64_t sample_power_tail(Rng& rng, double s, std::uint64_t m) {
    const double a = static_cast<double>(m) - 0.5;
    for (;;) {
        const double x = a * std::pow(rng.uniform01(), -1.0 / (s - 1.0));
        const double kd = std::nearbyint(x);
        if (!(kd <= 9e15)) continue;  // beyond exact-integer doubles; mass ~1e-13
        const double cell =
            (std::pow(kd - 0.5, 1.0 - s) - std::pow(kd + 0.5, 1.0 - s)) / (s - 1.0);
        if (rng.uniform01() * cell <= std::pow(kd, -s))
            return static_cast<std::uint64_t>(kd);
    }
}

// Shared inverse-CDF table with an exact power tail beyond the table.
class TabledPowerSampler {
public:
    // pmf_head[k-1] is the probability of k for k = 1..table_max; beyond the
    // table the law is proportional to k^{-tail_s}.
    TabledPowerSampler(std::vector<double> pmf_head, double tail_s)
        : tail_s_(tail_s) {
        cdf_.resize(pmf_head.size());
        double acc = 0.0;
        for (std::size_t i = 0; i < pmf_head.size(); ++i) {
            acc += pmf_head[i];
            cdf_[i] = acc;
        }
    }

    std::uint64_t operator()(Rng& rng) const {
        const double u = rng.uniform01();
        // fast path: the first two degrees carry nearly all the mass
        if (u < cdf_[0]) return 1;
        if (cdf_.size() > 1 && u < cdf_[1]) return 2;
        if (u >= cdf_.back())
            return sample_power_tail(rng, tail_s_, cdf_.size() + 1);
        const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
        return static_cast<std::uint64_t>(it - cdf_.begin()) + 1;
    }

    double table_mass() const { return cdf_.back(); }
    std::size_t table_size() const { return cdf_.size(); }

private:
    std::vector<double> cdf_;
    double tail_s_ = 0.0;
};

} // namespace detail

// Draws from nu itself. Inverse CDF to table_max, exact tail beyond.
class DegreeSampler {
public:
    explicit DegreeSampler(const CriticalDegreeLaw& law, std::size_t table_max = 100000)
        : core_(build(law, table_max), law.alpha + 2.0) {}

    std::uint64_t operator()(Rng& rng) const { return core_(rng); }
    std::size_t table_size() const { return core_.table_size(); }

private:
    static std::vector<double> build(const CriticalDegreeLaw& law, std::size_t table_max) {
        std::vector<double> head(table_max);
        for (std::size_t k = 1; k <= table_max; ++k)
            head[k - 1] = law.pmf(k);
        return head;
    }
    detail::TabledPowerSampler core_;
};

// Draws from the size-biased law P(k) = k nu(k) / delta, whose tail exponent
// is alpha+1. This is the law of the degree of a vertex discovered through a
// uniformly chosen half-edge.
class SizeBiasedDegreeSampler {
public:
    explicit SizeBiasedDegreeSampler(const CriticalDegreeLaw& law,
                                     std::size_t table_max = 100000)
        : core_(build(law, table_max), law.alpha + 1.0) {}

    std::uint64_t operator()(Rng& rng) const { return core_(rng); }

private:
    static std::vector<double> build(const CriticalDegreeLaw& law, std::size_t table_max) {
        std::vector<double> head(table_max);
        for (std::size_t k = 1; k <= table_max; ++k)
            head[k - 1] = static_cast<double>(k) * law.pmf(k) / law.delta;
        return head;
    }
    detail::TabledPowerSampler core_;
};

inline DegreeSequence sample_degrees(const DegreeSampler& sampler, std::size_t n, Rng& rng) {
    DegreeSequence out;
    out.degrees.resize(n);
    std::uint64_t parity = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint64_t d = sampler(rng);
        out.degrees[i] = d;
        parity ^= d & 1u;
    }
    if (parity) {  // odd total: bump the last entry so a pairing exists
        out.degrees[n - 1] += 1;
        out.parity_adjusted = true;
    }
    return out;
}

inline DegreeSequence sample_degrees(const CriticalDegreeLaw& law, std::size_t n, Rng& rng) {
    const DegreeSampler sampler(law);
    return sample_degrees(sampler, n, rng);
}

} // namespace critsir
