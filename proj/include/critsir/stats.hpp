#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace critsir {

// Regularized lower incomplete gamma P(a, x): power series for x < a+1,
// Lentz continued fraction for the complement otherwise.
inline double reg_lower_gamma(double a, double x) {
    if (!(a > 0.0) || x < 0.0) throw DomainError("reg_lower_gamma: needs a > 0, x >= 0");
    if (x == 0.0) return 0.0;
    const double lg = std::lgamma(a);
    const double prefactor = std::exp(-x + a * std::log(x) - lg);
    if (x < a + 1.0) {
        double term = 1.0 / a;
        double sum = term;
        for (int n = 1; n < 1000; ++n) {
            term *= x / (a + n);
            sum += term;
            if (term < sum * 1e-17) break;
        }
        return sum * prefactor;
    }
    // modified Lentz for the continued fraction of Q(a, x)
    double b = x + 1.0 - a;
    double c = 1e300;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 1000; ++i) {
        const double an = -static_cast<double>(i) * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < 1e-300) d = 1e-300;
        c = b + an / c;
        if (std::abs(c) < 1e-300) c = 1e-300;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-17) break;
    }
    return 1.0 - prefactor * h;
}

inline double reg_upper_gamma(double a, double x) { return 1.0 - reg_lower_gamma(a, x); }

// Survival probability of a chi-square statistic with dof degrees of freedom.
inline double chi_square_pvalue(double stat, double dof) {
    if (!(dof > 0.0)) throw DomainError("chi_square_pvalue: dof must be positive");
    if (stat <= 0.0) return 1.0;
    return reg_upper_gamma(dof / 2.0, stat / 2.0);
}

// Two-sample chi-square on shared bins; expected counts from the pooled law.
// Bins whose pooled count is zero are dropped; dof = (#kept bins - 1).
inline double two_sample_chi_square_pvalue(const std::vector<std::uint64_t>& a,
                                           const std::vector<std::uint64_t>& b) {
    if (a.size() != b.size() || a.empty())
        throw DomainError("two_sample_chi_square_pvalue: bins must match and be nonempty");
    const double na = std::accumulate(a.begin(), a.end(), 0.0);
    const double nb = std::accumulate(b.begin(), b.end(), 0.0);
    if (na == 0.0 || nb == 0.0) throw EmptySample("two_sample_chi_square_pvalue: empty group");
    double stat = 0.0;
    std::size_t used = 0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double pooled = static_cast<double>(a[j]) + static_cast<double>(b[j]);
        if (pooled == 0.0) continue;
        ++used;
        const double ea = pooled * na / (na + nb);
        const double eb = pooled * nb / (na + nb);
        const double da = static_cast<double>(a[j]) - ea;
        const double db = static_cast<double>(b[j]) - eb;
        stat += da * da / ea + db * db / eb;
    }
    if (used < 2) return 1.0;
    return chi_square_pvalue(stat, static_cast<double>(used - 1));
}

// Asymptotic two-sample KS critical value at the given level:
// c(level) sqrt((na+nb)/(na nb)) with c = sqrt(-ln(level/2)/2).
inline double ks_critical_value(double level, double na, double nb) {
    if (!(level > 0.0 && level < 1.0)) throw DomainError("ks_critical_value: level in (0,1)");
    const double c = std::sqrt(-0.5 * std::log(level / 2.0));
    return c * std::sqrt((na + nb) / (na * nb));
}

// Two-sample KS statistic; sample b may carry nonnegative weights. Returns
// the sup distance between the empirical CDF of a and the (weighted) ECDF of
// b. If neff_b_out is given it receives (sum w)^2 / sum w^2, the effective
// sample size used for critical values.
inline double ks_statistic(std::vector<double> a, std::vector<double> b,
                           std::vector<double> wb = {}, double* neff_b_out = nullptr) {
    if (a.empty() || b.empty()) throw EmptySample("ks_statistic: empty sample");
    if (!wb.empty() && wb.size() != b.size())
        throw DomainError("ks_statistic: weight length mismatch");
    std::sort(a.begin(), a.end());
    std::vector<std::size_t> order(b.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return b[i] < b[j]; });
    double wtot = 0.0, w2 = 0.0;
    if (wb.empty()) {
        wtot = static_cast<double>(b.size());
        w2 = static_cast<double>(b.size());
    } else {
        for (double w : wb) {
            if (!(w >= 0.0) || !std::isfinite(w)) throw DomainError("ks_statistic: bad weight");
            wtot += w;
            w2 += w * w;
        }
        if (wtot <= 0.0) throw EmptySample("ks_statistic: all weights zero");
    }
    if (neff_b_out) *neff_b_out = wtot * wtot / w2;

    const double na = static_cast<double>(a.size());
    std::size_t i = 0, j = 0;
    double fa = 0.0, fb = 0.0, d = 0.0;
    while (i < a.size() || j < b.size()) {
        const double xa = i < a.size() ? a[i] : std::numeric_limits<double>::infinity();
        const double xb = j < b.size() ? b[order[j]] : std::numeric_limits<double>::infinity();
        const double x = std::min(xa, xb);
        while (i < a.size() && a[i] == x) {
            fa += 1.0 / na;
            ++i;
        }
        while (j < b.size() && b[order[j]] == x) {
            fb += (wb.empty() ? 1.0 : wb[order[j]]) / wtot;
            ++j;
        }
        d = std::max(d, std::abs(fa - fb));
    }
    return d;
}

// z-score of an observed count against Binomial(n, p).
inline double binomial_z(double observed, double n, double p) {
    const double var = n * p * (1.0 - p);
    if (var <= 0.0) return observed == n * p ? 0.0 : std::numeric_limits<double>::infinity();
    return (observed - n * p) / std::sqrt(var);
}

// Least-squares slope of y on x through the origin.
inline double slope_through_origin(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.empty())
        throw DomainError("slope_through_origin: length mismatch or empty");
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += x[i] * y[i];
        sxx += x[i] * x[i];
    }
    if (sxx == 0.0) throw DomainError("slope_through_origin: degenerate x");
    return sxy / sxx;
}

// Importance-sampling ratio estimator sum(w f) / sum(w) with its
// delta-method standard error sqrt(sum w^2 (f - est)^2) / sum(w).
struct SelfNormalized {
    double estimate = 0.0;
    double std_error = 0.0;
};

inline SelfNormalized self_normalized_mean(const std::vector<double>& f,
                                           const std::vector<double>& w) {
    if (f.size() != w.size()) throw DomainError("self_normalized_mean: length mismatch");
    if (f.empty()) throw EmptySample("self_normalized_mean: empty");
    double wsum = 0.0;
    for (double x : w) {
        if (!(x >= 0.0) || !std::isfinite(x)) throw DomainError("self_normalized_mean: bad weight");
        wsum += x;
    }
    if (wsum <= 0.0) throw EmptySample("self_normalized_mean: all weights zero");
    double num = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) num += w[i] * f[i];
    const double est = num / wsum;
    double v = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double d = f[i] - est;
        v += w[i] * w[i] * d * d;
    }
    return {est, std::sqrt(v) / wsum};
}

// Quantile of an unweighted sample by linear interpolation (q in [0,1]).
inline double sample_quantile(std::vector<double> v, double q) {
    if (v.empty()) throw EmptySample("sample_quantile: empty");
    if (!(q >= 0.0 && q <= 1.0)) throw DomainError("sample_quantile: q in [0,1]");
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= v.size()) return v.back();
    const double frac = pos - static_cast<double>(lo);
    return v[lo] * (1.0 - frac) + v[lo + 1] * frac;
}

} // namespace critsir
