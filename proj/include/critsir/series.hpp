#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "errors.hpp"

namespace critsir {

// sum_{k=from}^{infinity} k^{-s} for s > 1.
//
// Direct compensated summation up to a cutoff, then an Euler-Maclaurin tail
//   sum_{k>=a} k^{-s} = a^{1-s}/(s-1) + a^{-s}/2 + s a^{-s-1}/12
//                        - s(s+1)(s+2) a^{-s-3}/720 + O(a^{-s-5})
// whose first omitted term is far below double precision at this cutoff.
inline double power_sum_from(double s, std::uint64_t from = 3) {
    if (!(s > 1.0)) throw DomainError("power_sum_from: requires s > 1");
    if (from == 0) throw DomainError("power_sum_from: requires from >= 1");
    const std::uint64_t cutoff = std::max<std::uint64_t>(from, 200000);
    const double a = static_cast<double>(cutoff);
    const double tail = std::pow(a, 1.0 - s) / (s - 1.0)
                      + std::pow(a, -s) / 2.0
                      + s * std::pow(a, -s - 1.0) / 12.0
                      - s * (s + 1.0) * (s + 2.0) * std::pow(a, -s - 3.0) / 720.0;
    // descending k so terms ascend; Kahan compensation keeps the error ~1 ulp
    double sum = 0.0;
    double comp = 0.0;
    for (std::uint64_t k = cutoff - 1; cutoff > from && k >= from; --k) {
        const double term = std::pow(static_cast<double>(k), -s);
        const double y = term - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        if (k == from) break;  // avoid unsigned wrap when from == 0 is impossible anyway
    }
    return sum + tail;
}

} // namespace critsir
