#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "sdemap/rng.hpp"

using namespace sdemap;

TEST_CASE("splitmix64 streams are deterministic and seed-sensitive") {
    SplitMix64 a(42), b(42), c(43);
    for (int i = 0; i < 64; ++i) {
        auto va = a.next_u64();
        REQUIRE(va == b.next_u64());
    }
    bool any_differ = false;
    SplitMix64 a2(42);
    for (int i = 0; i < 64; ++i) any_differ |= (a2.next_u64() != c.next_u64());
    REQUIRE(any_differ);
}

TEST_CASE("uniform draws stay inside the open unit interval") {
    SplitMix64 g(7);
    double lo = 1.0, hi = 0.0, sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        double u = g.uniform();
        REQUIRE(u > 0.0);
        REQUIRE(u < 1.0);
        lo = std::min(lo, u);
        hi = std::max(hi, u);
        sum += u;
    }
    REQUIRE(sum / n == Catch::Approx(0.5).margin(3.0 / std::sqrt(12.0 * n)));
    REQUIRE(lo < 1e-3);
    REQUIRE(hi > 1.0 - 1e-3);
}

TEST_CASE("gaussian stream has standard moments") {
    GaussianStream g(123);
    const int n = 200000;
    double s1 = 0.0, s2 = 0.0, s3 = 0.0, s4 = 0.0;
    for (int i = 0; i < n; ++i) {
        double x = g.next();
        s1 += x;
        s2 += x * x;
        s3 += x * x * x;
        s4 += x * x * x * x;
    }
    s1 /= n; s2 /= n; s3 /= n; s4 /= n;
    // three standard errors on each moment estimate
    REQUIRE(s1 == Catch::Approx(0.0).margin(3.0 / std::sqrt(double(n))));
    REQUIRE(s2 == Catch::Approx(1.0).margin(3.0 * std::sqrt(2.0 / n)));
    REQUIRE(s3 == Catch::Approx(0.0).margin(3.0 * std::sqrt(15.0 / n)));
    REQUIRE(s4 == Catch::Approx(3.0).margin(3.0 * std::sqrt(96.0 / n)));
}

TEST_CASE("order-1.5 increment pair has the correct covariance") {
    GaussianStream g(99);
    const double h = 0.01;
    const int n = 400000;
    double sww = 0.0, swz = 0.0, szz = 0.0;
    for (int i = 0; i < n; ++i) {
        auto [dW, dZ] = order15_increment(g, h);
        sww += dW * dW;
        swz += dW * dZ;
        szz += dZ * dZ;
    }
    sww /= n; swz /= n; szz /= n;
    REQUIRE(sww == Catch::Approx(h).epsilon(0.02));
    REQUIRE(swz == Catch::Approx(h * h / 2).epsilon(0.02));
    REQUIRE(szz == Catch::Approx(h * h * h / 3).epsilon(0.02));
}

TEST_CASE("replicate seeds are derived by offset") {
    REQUIRE(replicate_seed(1000, 0) == 1000);
    REQUIRE(replicate_seed(1000, 17) == 1017);
}
