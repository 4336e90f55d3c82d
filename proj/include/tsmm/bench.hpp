#pragma once

#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "tsmm/compute.hpp"
#include "tsmm/select.hpp"

namespace tsmm {

enum class BenchMode { Prepack, PackPerCall, Naive };

inline const char* bench_mode_name(BenchMode m) {
    switch (m) {
        case BenchMode::Prepack: return "prepack";
        case BenchMode::PackPerCall: return "pack-per-call";
        default: return "naive";
    }
}

struct BenchSpec {
    long m = 2048;
    long k = 2048;
    std::vector<long> n_list = {8};
    Precision precision = Precision::Single;
    int reps = 200;
    int threads = 0;  // 0: take the profile's max_threads
    BenchMode mode = BenchMode::Prepack;
    std::uint32_t seed = 42;

    bool valid() const { return m >= 1 && k >= 1 && reps >= 1 && !n_list.empty(); }
};

struct BenchRecord {
    BenchMode mode;
    long m, k, n;
    int reps;
    double pack_seconds = 0;
    double compute_seconds = 0;
    double gflops_value = 0;  // 2mnk/t, packing excluded, median rep
    double packing_fraction = 0;
    std::string plan_summary;
};

inline const char* bench_csv_header() {
    return "mode,m,k,n,reps,pack_s,compute_s,gflops,pack_fraction,plan";
}

inline std::string bench_csv_row(const BenchRecord& r) {
    std::ostringstream os;
    os << bench_mode_name(r.mode) << ',' << r.m << ',' << r.k << ',' << r.n
       << ',' << r.reps << ',' << r.pack_seconds << ',' << r.compute_seconds
       << ',' << r.gflops_value << ',' << r.packing_fraction << ','
       << r.plan_summary;
    return os.str();
}

inline std::string plan_summary(const ExecutionPlan& plan) {
    std::ostringstream os;
    os << "mc=" << plan.blocking.m_c << ";kc=" << plan.blocking.k_c
       << ";nc=" << plan.blocking.n_c << ";mt=" << plan.blocking.m_t
       << ";np=" << plan.threads.n_partitions
       << ";mp=" << plan.threads.m_partitions
       << ";kernel=" << plan.kernel.kernel_name;
    return os.str();
}

template <class T>
BenchRecord run_bench_one(const BenchSpec& spec, long n,
                          const HardwareProfile& hw_in,
                          const KernelSelection& kernel_sel,
                          const KernelCatalog<T>& catalog,
                          const TrialConfig& tune_trial,
                          RunTimer timer = monotonic_run_timer()) {
    HardwareProfile hw = hw_in;
    if (spec.threads > 0) hw.max_threads = spec.threads;

    Problem p;
    p.m = spec.m;
    p.k = spec.k;
    p.n = n;
    p.alpha = 1.0;
    p.beta = 0.0;
    p.precision = precision_of<T>();

    BenchRecord rec;
    rec.mode = spec.mode;
    rec.m = p.m;
    rec.k = p.k;
    rec.n = n;
    rec.reps = spec.reps;

    std::vector<T> a(p.m * p.k), b(p.k * p.n), c(p.m * p.n);
    {
        std::mt19937 rng(spec.seed);
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        for (auto& v : a) v = static_cast<T>(dist(rng));
        for (auto& v : b) v = static_cast<T>(dist(rng));
    }
    auto av = MatrixView<T>::row_major(a.data(), p.m, p.k);
    auto bv = MatrixView<T>::row_major(b.data(), p.k, p.n);
    auto cv = MatrixView<T>::row_major(c.data(), p.m, p.n);

    if (spec.mode == BenchMode::Naive) {
        const double flops =
            2.0 * static_cast<double>(p.m) * p.n * p.k * spec.reps;
        if (flops > 1e12)
            throw SpecError("naive mode refused: more than 1e12 flops");
        std::vector<double> times;
        for (int r = 0; r < spec.reps; ++r)
            times.push_back(std::max(timer([&] { naive_gemm(p, av, bv, cv); }),
                                     1e-12));
        rec.compute_seconds = 0;
        for (double t : times) rec.compute_seconds += t;
        rec.gflops_value = gflops(p, median_of(times));
        rec.packing_fraction = 0;
        rec.plan_summary = "naive";
        return rec;
    }

    ExecutionPlan plan = tune(p, hw, kernel_sel, catalog, tune_trial, timer);
    const Microkernel<T>* kernel = find_kernel(catalog, kernel_sel.kernel_name);
    rec.plan_summary = plan_summary(plan);

    // Correctness gate before any timing counts.
    if (!detail::spot_check(p, plan, *kernel))
        throw OracleMismatch("bench: compute disagrees with the naive oracle");

    std::vector<double> compute_times;
    compute_times.reserve(spec.reps);
    if (spec.mode == BenchMode::Prepack) {
        PackedBuffer<T> pa, pb;
        rec.pack_seconds = timer([&] {
            pa = pack_a(static_cast<T>(p.alpha), av, plan);
            pb = pack_b(static_cast<T>(1), bv, plan);
        });
        for (int r = 0; r < spec.reps; ++r)
            compute_times.push_back(std::max(
                timer([&] {
                    compute(static_cast<T>(p.beta), cv, pa, pb, plan, *kernel);
                }),
                1e-12));
    } else {  // PackPerCall: the conventional-GEMM stand-in
        for (int r = 0; r < spec.reps; ++r) {
            PackedBuffer<T> pa, pb;
            rec.pack_seconds += timer([&] {
                pa = pack_a(static_cast<T>(p.alpha), av, plan);
                pb = pack_b(static_cast<T>(1), bv, plan);
            });
            compute_times.push_back(std::max(
                timer([&] {
                    compute(static_cast<T>(p.beta), cv, pa, pb, plan, *kernel);
                }),
                1e-12));
        }
    }
    for (double t : compute_times) rec.compute_seconds += t;
    rec.gflops_value = gflops(p, median_of(compute_times));
    rec.packing_fraction =
        rec.pack_seconds / (rec.pack_seconds + rec.compute_seconds);
    return rec;
}

template <class T>
std::vector<BenchRecord> run_bench(const BenchSpec& spec,
                                   const HardwareProfile& hw,
                                   const KernelSelection& kernel_sel,
                                   const KernelCatalog<T>& catalog,
                                   const TrialConfig& tune_trial,
                                   RunTimer timer = monotonic_run_timer()) {
    if (!spec.valid()) throw SpecError("bench: invalid spec");
    std::vector<BenchRecord> out;
    for (long n : spec.n_list)
        out.push_back(run_bench_one<T>(spec, n, hw, kernel_sel, catalog,
                                       tune_trial, timer));
    return out;
}

}  // namespace tsmm
