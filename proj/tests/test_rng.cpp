// SPDX-License-Identifier: MIT

#include <cmath>
#include <set>

#include "doctest.h"
#include "mwrelay/rng.hpp"

using namespace mwrelay;

TEST_CASE("trial_rng is a pure function of (seed, index)") {
    auto a = rng::trial_rng(42, 7);
    auto b = rng::trial_rng(42, 7);
    for (int i = 0; i < 64; ++i) CHECK(a() == b());

    auto c = rng::trial_rng(42, 8);
    auto d = rng::trial_rng(43, 7);
    int same_c = 0, same_d = 0;
    auto e = rng::trial_rng(42, 7);
    for (int i = 0; i < 64; ++i) {
        const auto v = e();
        same_c += (c() == v);
        same_d += (d() == v);
    }
    CHECK(same_c == 0);
    CHECK(same_d == 0);
}

TEST_CASE("adjacent trial streams look independent") {
    // Correlation of consecutive-stream outputs should be tiny.
    const int n = 20000;
    double sum_xy = 0, sum_x = 0, sum_y = 0, sum_x2 = 0, sum_y2 = 0;
    for (int i = 0; i < n; ++i) {
        auto a = rng::trial_rng(1, static_cast<std::uint64_t>(i));
        auto b = rng::trial_rng(1, static_cast<std::uint64_t>(i) + 1);
        const double x = static_cast<double>(a() >> 11) * 0x1.0p-53;
        const double y = static_cast<double>(b() >> 11) * 0x1.0p-53;
        sum_x += x;
        sum_y += y;
        sum_x2 += x * x;
        sum_y2 += y * y;
        sum_xy += x * y;
    }
    const double mx = sum_x / n, my = sum_y / n;
    const double corr = (sum_xy / n - mx * my) /
                        std::sqrt((sum_x2 / n - mx * mx) * (sum_y2 / n - my * my));
    CHECK(std::abs(corr) < 4.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("cnormal has CN(0,1) moments") {
    auto g = rng::trial_rng(3, 0);
    const int n = 200000;
    double sr = 0, si = 0, s2 = 0;
    for (int i = 0; i < n; ++i) {
        const auto z = rng::cnormal(g);
        sr += z.real();
        si += z.imag();
        s2 += std::norm(z);
    }
    const double tol = 4.0 / std::sqrt(static_cast<double>(n));
    CHECK(std::abs(sr / n) < tol);
    CHECK(std::abs(si / n) < tol);
    CHECK(s2 / n == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("qpsk symbols are unit power and cover the constellation") {
    auto g = rng::trial_rng(5, 0);
    std::set<std::pair<int, int>> seen;
    for (int i = 0; i < 1000; ++i) {
        const auto x = rng::qpsk(g);
        CHECK(std::abs(std::norm(x) - 1.0) < 1e-15);
        seen.insert({x.real() > 0 ? 1 : -1, x.imag() > 0 ? 1 : -1});
    }
    CHECK(seen.size() == 4);
}
