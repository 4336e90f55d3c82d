#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "tsmm/compute.hpp"
#include "tsmm/pack.hpp"

using namespace tsmm;

namespace {

template <class T>
std::vector<T> random_vec(std::size_t n, std::uint32_t seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> dist(-1, 1);
    std::vector<T> v(n);
    for (auto& x : v) x = static_cast<T>(dist(rng));
    return v;
}

ExecutionPlan simple_plan(long m_c, long k_c, long n_c, long m_t, int m_r,
                          int n_r, int mp = 1, int np = 1) {
    ExecutionPlan plan;
    plan.blocking = {m_c, k_c, n_c, m_t, 0, SearchPattern::Neighborhood};
    plan.threads.total_threads = mp * np;
    plan.threads.m_partitions = mp;
    plan.threads.n_partitions = np;
    plan.kernel.shape = KernelShape{m_r, n_r, 1};
    plan.kernel_shape = plan.kernel.shape;
    plan.kernel.kernel_name = "ref";
    return plan;
}

// Runs the whole pack + compute pipeline on row-major inputs.
template <class T>
void run_pipeline(const Problem& p, const std::vector<T>& a,
                  const std::vector<T>& b, std::vector<T>& c,
                  const ExecutionPlan& plan, ComputeStats* stats = nullptr) {
    auto av = MatrixView<T>::row_major(const_cast<T*>(a.data()), p.m, p.k);
    auto bv = MatrixView<T>::row_major(const_cast<T*>(b.data()), p.k, p.n);
    auto cv = MatrixView<T>::row_major(c.data(), p.m, p.n);
    auto kernel = reference_kernel<T>(plan.kernel.shape);
    auto pa = pack_a(static_cast<T>(p.alpha), av, plan);
    auto pb = pack_b(static_cast<T>(1), bv, plan);
    compute(static_cast<T>(p.beta), cv, pa, pb, plan, kernel, stats);
}

}  // namespace

TEST_CASE("naive_gemm scalar fused multiply-add") {
    double a = 2, b = 3, c = 5;
    Problem p{1, 1, 1, 1.0, 1.0, Precision::Double};
    naive_gemm(p, MatrixView<double>::row_major(&a, 1, 1),
               MatrixView<double>::row_major(&b, 1, 1),
               MatrixView<double>::row_major(&c, 1, 1));
    CHECK(c == 11.0);
}

TEST_CASE("naive_gemm identity passthrough") {
    const long n = 5;
    std::vector<double> a(n * n, 0.0);
    for (long i = 0; i < n; ++i) a[i * n + i] = 1.0;
    auto b = random_vec<double>(n * 3, 1);
    std::vector<double> c(n * 3, 7.0);
    Problem p{n, 3, n, 1.0, 0.0, Precision::Double};
    naive_gemm(p, MatrixView<double>::row_major(a.data(), n, n),
               MatrixView<double>::row_major(b.data(), n, 3),
               MatrixView<double>::row_major(c.data(), n, 3));
    CHECK(c == b);
}

TEST_CASE("naive_gemm 3x3 integer cross-check") {
    // Hand arithmetic: A = [[1,2,3],[4,5,6],[7,8,10]], B = [[1,0,2],[0,1,0],[1,1,1]]
    std::vector<double> a = {1, 2, 3, 4, 5, 6, 7, 8, 10};
    std::vector<double> b = {1, 0, 2, 0, 1, 0, 1, 1, 1};
    std::vector<double> c(9, 0.0);
    Problem p{3, 3, 3, 1.0, 0.0, Precision::Double};
    naive_gemm(p, MatrixView<double>::row_major(a.data(), 3, 3),
               MatrixView<double>::row_major(b.data(), 3, 3),
               MatrixView<double>::row_major(c.data(), 3, 3));
    const std::vector<double> expect = {4, 5, 5, 10, 11, 14, 17, 18, 24};
    CHECK(c == expect);
}

TEST_CASE("compute identity gives B exactly") {
    const long m = 8, k = 8, n = 3;
    std::vector<double> a(m * k, 0.0);
    for (long i = 0; i < m; ++i) a[i * k + i] = 1.0;
    auto b = random_vec<double>(k * n, 2);
    std::vector<double> c(m * n, 99.0);
    Problem p{m, n, k, 1.0, 0.0, Precision::Double};
    run_pipeline(p, a, b, c, simple_plan(8, 8, 4, 8, 4, 4));
    for (long i = 0; i < m; ++i)
        for (long j = 0; j < n; ++j) CHECK(c[i * n + j] == b[i * n + j]);
}

TEST_CASE("compute alpha=0 beta=1 leaves C bitwise unchanged") {
    const long m = 9, k = 7, n = 5;
    auto a = random_vec<double>(m * k, 3);
    auto b = random_vec<double>(k * n, 4);
    auto c = random_vec<double>(m * n, 5);
    auto c0 = c;
    Problem p{m, n, k, 0.0, 1.0, Precision::Double};
    run_pipeline(p, a, b, c, simple_plan(8, 4, 8, 4, 4, 4));
    CHECK(c == c0);
}

TEST_CASE("compute matches the naive oracle with general scalars") {
    const long m = 96, k = 96, n = 8;
    auto a = random_vec<double>(m * k, 6);
    auto b = random_vec<double>(k * n, 7);
    auto c = random_vec<double>(m * n, 8);
    auto ref = c;
    Problem p{m, n, k, 1.5, -0.5, Precision::Double};
    run_pipeline(p, a, b, c, simple_plan(32, 32, 8, 16, 4, 4, 2));
    naive_gemm(p, MatrixView<double>::row_major(a.data(), m, k),
               MatrixView<double>::row_major(b.data(), k, n),
               MatrixView<double>::row_major(ref.data(), m, n));
    double amax = 0, bmax = 0, cmax = 0;
    for (auto v : a) amax = std::max(amax, std::abs(v));
    for (auto v : b) bmax = std::max(bmax, std::abs(v));
    for (auto v : ref) cmax = std::max(cmax, std::abs(v));
    const double tol = 8.0 * k * std::numeric_limits<double>::epsilon() *
                       (1.5 * amax * bmax + 0.5 * cmax);
    for (std::size_t i = 0; i < c.size(); ++i)
        REQUIRE(std::abs(c[i] - ref[i]) <= tol);
}

TEST_CASE("column-major views are packed and computed correctly") {
    const long m = 13, k = 9, n = 4;
    auto a = random_vec<double>(m * k, 9);
    auto b = random_vec<double>(k * n, 10);
    auto c = random_vec<double>(m * n, 11);
    auto cref = c;
    Problem p{m, n, k, 2.0, 1.0, Precision::Double};
    auto av = MatrixView<double>::col_major(a.data(), m, k);
    auto bv = MatrixView<double>::col_major(b.data(), k, n);
    auto cv = MatrixView<double>::col_major(c.data(), m, n);
    auto rv = MatrixView<double>::col_major(cref.data(), m, n);
    auto plan = simple_plan(8, 4, 4, 8, 4, 4);
    auto kernel = reference_kernel<double>(plan.kernel.shape);
    auto pa = pack_a(2.0, av, plan);
    auto pb = pack_b(1.0, bv, plan);
    compute(1.0, cv, pa, pb, plan, kernel);
    naive_gemm(p, av, bv, rv);
    const double tol = 8.0 * k * std::numeric_limits<double>::epsilon() * 32;
    for (long i = 0; i < m; ++i)
        for (long j = 0; j < n; ++j)
            REQUIRE(std::abs(cv.at(i, j) - rv.at(i, j)) <= tol);
}

TEST_CASE("thread count never changes the bits") {
    const long m = 64, k = 48, n = 16;
    auto a = random_vec<float>(m * k, 12);
    auto b = random_vec<float>(k * n, 13);
    auto base = random_vec<float>(m * n, 14);
    std::vector<float> first;
    for (int threads : {1, 2, 4, 8}) {
        auto c = base;
        Problem p{m, n, k, 1.0, 0.5, Precision::Single};
        run_pipeline(p, a, b, c, simple_plan(16, 16, 16, 8, 4, 4, threads));
        if (first.empty())
            first = c;
        else
            REQUIRE(c == first);
    }
}

TEST_CASE("beta=1 accumulates linearly") {
    const long m = 16, k = 16, n = 8;
    auto a = random_vec<double>(m * k, 15);
    auto b = random_vec<double>(k * n, 16);
    std::vector<double> c(m * n, 0.0);
    Problem p{m, n, k, 1.0, 1.0, Precision::Double};
    auto plan = simple_plan(16, 16, 8, 16, 4, 4);
    run_pipeline(p, a, b, c, plan);
    auto once = c;
    run_pipeline(p, a, b, c, plan);
    for (std::size_t i = 0; i < c.size(); ++i)
        CHECK(c[i] == doctest::Approx(2.0 * once[i]).epsilon(1e-12));
}

TEST_CASE("no synchronization inside the jc loop") {
    const long m = 32, k = 32, n = 8;
    auto a = random_vec<double>(m * k, 17);
    auto b = random_vec<double>(k * n, 18);
    std::vector<double> c(m * n, 0.0);
    Problem p{m, n, k, 1.0, 0.0, Precision::Double};
    ComputeStats stats;
    run_pipeline(p, a, b, c, simple_plan(16, 8, 8, 8, 4, 4, 4), &stats);
    CHECK(stats.barriers_inside_jc.load() == 0);
    CHECK(stats.tasks_run.load() == 4);
}

TEST_CASE("geometry mismatch is rejected") {
    const long m = 8, k = 8, n = 4;
    auto a = random_vec<double>(m * k, 19);
    auto b = random_vec<double>(k * n, 20);
    std::vector<double> c(m * n, 0.0);
    auto plan = simple_plan(8, 8, 4, 8, 4, 4);
    auto av = MatrixView<double>::row_major(a.data(), m, k);
    auto bv = MatrixView<double>::row_major(b.data(), k, n);
    auto cv = MatrixView<double>::row_major(c.data(), m, n);
    auto kernel = reference_kernel<double>(plan.kernel.shape);
    auto pa = pack_a(1.0, av, plan);
    auto pb = pack_b(1.0, bv, plan);
    SUBCASE("swapped operands") {
        CHECK_THROWS_AS(compute(0.0, cv, pb, pa, plan, kernel), PlanMismatch);
    }
    SUBCASE("plan blocking changed after packing") {
        auto other = simple_plan(4, 8, 4, 4, 4, 4);
        CHECK_THROWS_AS(compute(0.0, cv, pa, pb, other, kernel), PlanMismatch);
    }
    SUBCASE("wrong C shape") {
        auto bad = MatrixView<double>::row_major(c.data(), n, m);
        CHECK_THROWS_AS(compute(0.0, bad, pa, pb, plan, kernel), PlanMismatch);
    }
}

TEST_CASE("NaN in C propagates under IEEE semantics") {
    const long m = 4, k = 4, n = 4;
    auto a = random_vec<double>(m * k, 21);
    auto b = random_vec<double>(k * n, 22);
    std::vector<double> c(m * n, 0.0);
    c[5] = std::numeric_limits<double>::quiet_NaN();
    Problem p{m, n, k, 1.0, 0.0, Precision::Double};
    run_pipeline(p, a, b, c, simple_plan(4, 4, 4, 4, 4, 4));
    CHECK(std::isnan(c[5]));  // beta * NaN stays NaN even for beta = 0
    CHECK(!std::isnan(c[0]));
}
