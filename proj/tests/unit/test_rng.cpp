#include <doctest.h>

#include <cmath>

#include "frogsim/rng.hpp"

using namespace frogsim;

TEST_CASE("streams are addressable and reproducible") {
    Stream a(42, {1, 2, 3});
    Stream b(42, {1, 2, 3});
    for (int i = 0; i < 100; ++i) CHECK(a() == b());
    Stream c(42, {1, 2, 4});
    Stream d(42, {1, 2, 3});
    CHECK(c() != d());
    CHECK(derive_key(1, {2}) != derive_key(2, {1}));
}

TEST_CASE("uniform and exponential moments") {
    Stream s(7, {});
    double su = 0.0, se = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = s.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        su += u;
        se += s.exponential();
    }
    CHECK(su / n == doctest::Approx(0.5).epsilon(0.01));
    CHECK(se / n == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("poisson quantile is monotone in the mean") {
    Stream s(3, {});
    for (int i = 0; i < 2000; ++i) {
        const double u = s.uniform();
        int prev = 0;
        for (double m : {0.0, 0.1, 0.5, 1.0, 2.0, 4.0, 10.0, 40.0}) {
            const int k = poisson_quantile(m, u);
            CHECK(k >= prev);
            prev = k;
        }
    }
    CHECK(poisson_quantile(0.0, 0.999) == 0);
}

TEST_CASE("poisson sample mean and variance") {
    Stream s(11, {});
    const int n = 100000;
    double m1 = 0.0, m2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double k = sample_poisson(s, 3.0);
        m1 += k;
        m2 += k * k;
    }
    m1 /= n;
    CHECK(m1 == doctest::Approx(3.0).epsilon(0.02));
    CHECK(m2 / n - m1 * m1 == doctest::Approx(3.0).epsilon(0.05));
}

TEST_CASE("hash_name is FNV-1a") {
    CHECK(hash_name("") == 0xcbf29ce484222325ULL);
    CHECK(hash_name("a") == 0xaf63dc4c8601ec8cULL);
}
