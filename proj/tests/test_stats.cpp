#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "critsir/rng.hpp"
#include "critsir/stats.hpp"

using namespace critsir;

TEST_CASE("regularized incomplete gamma matches frozen references") {
    // mpmath: gammainc(a, 0, x, regularized=True), 50 digits, frozen here.
    struct Row {
        double a, x, p;
    };
    const Row rows[] = {
        {0.5, 1.0, 0.842700792949714869},
        {2.5, 3.0, 0.693781081586721599},
        {10.0, 12.0, 0.757607838329487651},
        {1.0, 1.0, 0.632120558828557678},
        {5.0, 2.5, 0.108821981085848758},
        {0.5, 0.001, 0.035670591729679885},
        {20.0, 30.0, 0.978126531558609147},
    };
    for (const auto& r : rows) {
        CHECK(reg_lower_gamma(r.a, r.x) == Catch::Approx(r.p).epsilon(1e-12));
        CHECK(reg_upper_gamma(r.a, r.x) == Catch::Approx(1.0 - r.p).epsilon(1e-10));
    }
    CHECK(reg_lower_gamma(3.0, 0.0) == 0.0);
    CHECK_THROWS_AS(reg_lower_gamma(0.0, 1.0), DomainError);
    CHECK_THROWS_AS(reg_lower_gamma(1.0, -1.0), DomainError);
}

TEST_CASE("chi-square survival probabilities at textbook quantiles") {
    // mpmath survival values at the classic critical points, frozen.
    CHECK(chi_square_pvalue(7.815, 3.0) == Catch::Approx(0.0499939).epsilon(1e-4));
    CHECK(chi_square_pvalue(11.07, 5.0) == Catch::Approx(0.0500096).epsilon(1e-4));
    CHECK(chi_square_pvalue(23.209, 10.0) == Catch::Approx(0.0100009).epsilon(1e-4));
    CHECK(chi_square_pvalue(0.0, 4.0) == 1.0);
    CHECK(chi_square_pvalue(1e4, 2.0) < 1e-300);
    CHECK_THROWS_AS(chi_square_pvalue(1.0, 0.0), DomainError);
}

TEST_CASE("two-sample chi-square separates equal from shifted laws") {
    // identical counts give statistic 0, p-value 1
    std::vector<std::uint64_t> a{100, 200, 300};
    CHECK(two_sample_chi_square_pvalue(a, a) == Catch::Approx(1.0));

    // grossly shifted laws are rejected
    std::vector<std::uint64_t> b{300, 200, 100};
    CHECK(two_sample_chi_square_pvalue(a, b) < 1e-10);

    // all-zero bins are dropped, not divided by
    std::vector<std::uint64_t> c{100, 0, 300};
    std::vector<std::uint64_t> d{120, 0, 280};
    CHECK_NOTHROW(two_sample_chi_square_pvalue(c, d));

    CHECK_THROWS_AS(two_sample_chi_square_pvalue({1, 2}, {1, 2, 3}), DomainError);
    CHECK_THROWS_AS(two_sample_chi_square_pvalue({0, 0}, {1, 2}), EmptySample);
}

TEST_CASE("two-sample chi-square null behaviour over multinomial draws") {
    Rng rng(derive_stream(0x5157a75u, 11));
    int rejections = 0;
    const int trials = 200;
    for (int t = 0; t < trials; ++t) {
        std::vector<std::uint64_t> a(8, 0), b(8, 0);
        for (int i = 0; i < 2000; ++i) a[rng.uniform_below(8)]++;
        for (int i = 0; i < 2000; ++i) b[rng.uniform_below(8)]++;
        if (two_sample_chi_square_pvalue(a, b) < 0.01) ++rejections;
    }
    // expect ~2 rejections at the 1% level; 10 is > 5 sigma out
    CHECK(rejections <= 10);
}

TEST_CASE("KS statistic on a hand-checked pair") {
    // F_a steps 1/3 at 1, 2, 3; F_b steps 1/2 at 1.5, 2.5.
    // sup distance is 1/3, attained at x = 1 and x = 2.5.
    const double d = ks_statistic({1.0, 2.0, 3.0}, {1.5, 2.5});
    CHECK(d == Catch::Approx(1.0 / 3.0).epsilon(1e-15));

    CHECK(ks_statistic({1, 2, 3}, {3, 1, 2}) == Catch::Approx(0.0).margin(1e-15));
    CHECK_THROWS_AS(ks_statistic({}, {1.0}), EmptySample);
    CHECK_THROWS_AS(ks_statistic({1.0}, {1.0}, {1.0, 2.0}), DomainError);
}

TEST_CASE("weighted KS reduces to unweighted for flat weights") {
    Rng rng(derive_stream(0x5157a75u, 22));
    std::vector<double> a(300), b(400), w(400, 2.5);
    for (auto& v : a) v = rng.uniform01();
    for (auto& v : b) v = rng.uniform01() * rng.uniform01();
    double neff = 0.0;
    const double dw = ks_statistic(a, b, w, &neff);
    const double du = ks_statistic(a, b);
    CHECK(dw == Catch::Approx(du).epsilon(1e-14));
    CHECK(neff == Catch::Approx(400.0).epsilon(1e-14));

    // duplicating a point with split weights changes nothing
    std::vector<double> b2 = b, w2 = w;
    b2.push_back(b[0]);
    w2[0] = 1.0;
    w2.push_back(1.5);
    CHECK(ks_statistic(a, b2, w2) == Catch::Approx(dw).epsilon(1e-12));
}

TEST_CASE("KS null calibration at the 1% level") {
    // two uniform samples of size 1e4: the statistic should sit below the
    // 1% critical value in at least 95 of 100 independent trials
    Rng rng(derive_stream(0x5157a75u, 33));
    const std::size_t n = 10000;
    const double crit = ks_critical_value(0.01, double(n), double(n));
    int below = 0;
    for (int t = 0; t < 100; ++t) {
        std::vector<double> a(n), b(n);
        for (auto& v : a) v = rng.uniform01();
        for (auto& v : b) v = rng.uniform01();
        if (ks_statistic(a, b) < crit) ++below;
    }
    CHECK(below >= 95);
}

TEST_CASE("KS critical value constant at the 1% level") {
    // c(0.01) = sqrt(-ln(0.005)/2) = 1.62762...
    const double c = ks_critical_value(0.01, 1.0, 1.0) / std::sqrt(2.0);
    CHECK(c == Catch::Approx(1.62762).epsilon(1e-5));
    CHECK_THROWS_AS(ks_critical_value(0.0, 10, 10), DomainError);
}

TEST_CASE("binomial z-score and through-origin slope") {
    CHECK(binomial_z(60, 100, 0.5) == Catch::Approx(2.0));
    CHECK(binomial_z(50, 100, 0.5) == Catch::Approx(0.0));

    // y = 3x exactly
    std::vector<double> x{1, 2, 3, 4}, y{3, 6, 9, 12};
    CHECK(slope_through_origin(x, y) == Catch::Approx(3.0).epsilon(1e-15));
    // least squares: slope = sum xy / sum x^2 = (1*2 + 2*3)/(1+4) = 8/5
    CHECK(slope_through_origin({1, 2}, {2, 3}) == Catch::Approx(1.6).epsilon(1e-15));
    CHECK_THROWS_AS(slope_through_origin({}, {}), DomainError);
    CHECK_THROWS_AS(slope_through_origin({0.0}, {1.0}), DomainError);
}

TEST_CASE("sample quantiles interpolate linearly") {
    std::vector<double> v{4.0, 1.0, 3.0, 2.0};
    CHECK(sample_quantile(v, 0.0) == 1.0);
    CHECK(sample_quantile(v, 1.0) == 4.0);
    CHECK(sample_quantile(v, 0.5) == Catch::Approx(2.5));
    CHECK(sample_quantile(v, 0.25) == Catch::Approx(1.75));
    CHECK_THROWS_AS(sample_quantile({}, 0.5), EmptySample);
    CHECK_THROWS_AS(sample_quantile(v, 1.5), DomainError);
}
