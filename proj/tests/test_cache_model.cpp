#include <cmath>

#include "doctest.h"
#include "tsmm/cache_model.hpp"

using namespace tsmm;

namespace {

CacheModelInput input(double n, double z, double l, double t) {
    CacheModelInput in;
    in.n = n;
    in.z = z;
    in.l = l;
    in.t = t;
    in.b = std::floor(std::sqrt(z / 3.0));
    return in;
}

}  // namespace

TEST_CASE("naive miss count") {
    CHECK(misses_naive(input(1024, 12288, 8, 1)) == 134217728.0);
    CHECK(misses_naive(input(1, 3, 1, 1)) == 1.0);
    // cubic scaling
    CHECK(misses_naive(input(2048, 12288, 8, 1)) ==
          8.0 * misses_naive(input(1024, 12288, 8, 1)));
}

TEST_CASE("blocked miss count") {
    // z = 3*64^2 makes sqrt(z) = 64*sqrt(3) and the 3*sqrt(3) cancels:
    // 3*n^3/(512) exactly.
    CHECK(misses_blocked(input(1024, 12288, 8, 1)) ==
          doctest::Approx(6291456.0).epsilon(1e-12));
    // quadrupling z halves the result
    auto a = misses_blocked(input(512, 12288, 8, 1));
    auto b = misses_blocked(input(512, 4 * 12288, 8, 1));
    CHECK(b == doctest::Approx(a / 2.0).epsilon(1e-12));
    // ratio to naive is 3*sqrt(3)/sqrt(z) at fixed n
    auto r = misses_blocked(input(256, 12288, 8, 1)) /
             misses_naive(input(256, 12288, 8, 1));
    CHECK(r == doctest::Approx(3.0 * std::sqrt(3.0) / std::sqrt(12288.0)));
}

TEST_CASE("prepack miss count") {
    // n = 0 leaves only the constant term z*t/(3l).
    CHECK(misses_prepack(input(0, 12288, 8, 1)) ==
          doctest::Approx(512.0).epsilon(1e-12));
    CHECK(misses_prepack(input(1024, 12288, 8, 8)) ==
          doctest::Approx(4096.0 + 4194304.0).epsilon(1e-12));
    // large-n ratio tends to 2/3 of the blocked count
    auto r = misses_prepack(input(1 << 20, 12288, 8, 8)) /
             misses_blocked(input(1 << 20, 12288, 8, 8));
    CHECK(r == doctest::Approx(2.0 / 3.0).epsilon(1e-6));
}

TEST_CASE("crossover follows the closed form") {
    // prepack < blocked iff n^3 > z^(3/2) * t / (3*sqrt(3)).
    for (double z : {3072.0, 12288.0, 49152.0}) {
        for (double t : {1.0, 4.0, 16.0}) {
            for (double n : {8.0, 64.0, 512.0, 4096.0}) {
                auto in = input(n, z, 8, t);
                const double rhs = std::pow(z, 1.5) * t / (3.0 * std::sqrt(3.0));
                const double lhs = n * n * n;
                // exact ties are rounding-order dependent; skip them
                if (std::abs(lhs - rhs) <= 1e-9 * rhs) continue;
                const bool prepack_wins =
                    misses_prepack(in) < misses_blocked(in);
                CHECK(prepack_wins == (lhs > rhs));
            }
        }
    }
}

TEST_CASE("monotonicity in n and l") {
    double prev_n[3] = {-1, -1, -1};
    for (double n : {1.0, 16.0, 256.0, 1024.0}) {
        auto in = input(n, 12288, 8, 2);
        double v[3] = {misses_naive(in), misses_blocked(in), misses_prepack(in)};
        for (int i = 0; i < 3; ++i) {
            CHECK(v[i] >= prev_n[i]);
            prev_n[i] = v[i];
        }
    }
    auto lo = input(512, 12288, 16, 2);
    auto hi = input(512, 12288, 8, 2);
    CHECK(misses_naive(lo) <= misses_naive(hi));
    CHECK(misses_blocked(lo) <= misses_blocked(hi));
    CHECK(misses_prepack(lo) <= misses_prepack(hi));
}

TEST_CASE("invalid inputs are rejected") {
    CacheModelInput in = input(100, 768, 4, 2);
    in.b = 100;  // 3b^2 > z
    CHECK_THROWS_AS(misses_naive(in), Error);
    in = input(100, 768, 4, 0);  // t < 1
    CHECK_THROWS_AS(misses_prepack(in), Error);
}
