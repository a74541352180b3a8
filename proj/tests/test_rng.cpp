#include <cmath>
#include <vector>

#include <doctest.h>

#include "mixl/rng.hpp"

using mixl::Rng;

TEST_CASE("same seed reproduces the same stream") {
    Rng a(123), b(123);
    for (int i = 0; i < 1000; ++i) CHECK(a() == b());
}

TEST_CASE("different seeds give different streams") {
    Rng a(123), b(124);
    int agree = 0;
    for (int i = 0; i < 64; ++i) agree += a() == b() ? 1 : 0;
    CHECK(agree == 0);
}

TEST_CASE("substreams depend on the root seed, not on consumption") {
    Rng fresh(99);
    Rng consumed(99);
    for (int i = 0; i < 137; ++i) consumed();
    consumed.normal();

    Rng sub_fresh = fresh.substream(4, 7, 2);
    Rng sub_consumed = consumed.substream(4, 7, 2);
    for (int i = 0; i < 100; ++i) CHECK(sub_fresh() == sub_consumed());
}

TEST_CASE("distinct tags give distinct substreams, and tag positions matter") {
    Rng root(5);
    Rng a = root.substream(1, 2, 3);
    Rng b = root.substream(1, 2, 4);
    Rng c = root.substream(2, 1, 3);
    CHECK(a() != b());
    Rng a2 = root.substream(1, 2, 3);
    a2();
    CHECK(a2() != c());
}

TEST_CASE("substreams of substreams are reproducible") {
    Rng root(7);
    Rng x = root.substream(3, 0).substream(2, 5, 1);
    Rng y = root.substream(3, 0).substream(2, 5, 1);
    for (int i = 0; i < 16; ++i) CHECK(x() == y());
}

TEST_CASE("uniform is in [0,1) and uniform_pos in (0,1)") {
    Rng rng(17);
    for (int i = 0; i < 100000; ++i) {
        const double u = rng.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
    for (int i = 0; i < 100000; ++i) {
        const double u = rng.uniform_pos();
        CHECK(u > 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("uniform moments") {
    Rng rng(29);
    const int n = 200000;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        sum += u;
        sumsq += u * u;
    }
    const double mean = sum / n;
    const double var = sumsq / n - mean * mean;
    CHECK(mean == doctest::Approx(0.5).epsilon(0.01));
    CHECK(var == doctest::Approx(1.0 / 12.0).epsilon(0.02));
}

TEST_CASE("normal moments") {
    Rng rng(31);
    const int n = 400000;
    double sum = 0.0, sumsq = 0.0, sumcube = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal();
        sum += z;
        sumsq += z * z;
        sumcube += z * z * z;
    }
    const double mean = sum / n;
    CHECK(std::abs(mean) < 4.0 / std::sqrt(static_cast<double>(n)));
    CHECK(sumsq / n == doctest::Approx(1.0).epsilon(0.02));
    CHECK(std::abs(sumcube / n) < 0.03);
}

TEST_CASE("gumbel moments match location 0 scale 1") {
    Rng rng(37);
    const int n = 400000;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double g = rng.gumbel();
        sum += g;
        sumsq += g * g;
    }
    const double mean = sum / n;
    const double var = sumsq / n - mean * mean;
    CHECK(mean == doctest::Approx(0.5772156649).epsilon(0.02));
    CHECK(var == doctest::Approx(1.6449340668).epsilon(0.02));
}

TEST_CASE("normal draws from a copied generator replay the cache") {
    Rng a(41);
    a.normal();
    Rng b = a;
    CHECK(a.normal() == b.normal());
    CHECK(a.normal() == b.normal());
}
