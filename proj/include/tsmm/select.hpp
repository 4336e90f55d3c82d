#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "tsmm/compute.hpp"
#include "tsmm/kernel.hpp"
#include "tsmm/pack.hpp"
#include "tsmm/plan.hpp"
#include "tsmm/trial.hpp"
#include "tsmm/types.hpp"

namespace tsmm {

namespace detail {

// Ties go to the larger tile, then the taller tile.
inline bool selection_better(double gf_new, const KernelShape& s_new,
                             double gf_old, const KernelShape& s_old) {
    if (gf_new != gf_old) return gf_new > gf_old;
    const long area_new = static_cast<long>(s_new.m_r) * s_new.n_r;
    const long area_old = static_cast<long>(s_old.m_r) * s_old.n_r;
    if (area_new != area_old) return area_new > area_old;
    return s_new.m_r > s_old.m_r;
}

}  // namespace detail

// Install-time stage: time every cataloged kernel on a synthetic packed GEBB
// sized from the cache bounds and keep the fastest.
template <class T>
KernelSelection select_kernel(const KernelCatalog<T>& catalog,
                              const HardwareProfile& hw, const TrialConfig& trial,
                              RunTimer timer = monotonic_run_timer()) {
    constexpr Precision prec = precision_of<T>();
    const long fp = fp_size(prec);

    std::vector<const Microkernel<T>*> valid;
    for (const auto& k : catalog.entries)
        if (fits_register_budget(k.shape, hw, prec)) valid.push_back(&k);
    if (valid.empty())
        throw NoValidKernel("no cataloged kernel fits the register budget");

    KernelSelection best;
    bool have = false;
    for (const auto* k : valid) {
        // Benchmark GEBB: (m_c0 x k_c0) * (k_c0 x n_r) from the cache bounds.
        const long l1_elems = hw.l1d_bytes / fp;
        const long l2_half = hw.l2_bytes / (2 * fp);
        long k_c0 = std::max<long>(k->shape.k_unroll,
                                   round_down(l1_elems / k->shape.n_r,
                                              k->shape.k_unroll));
        k_c0 = std::min<long>(k_c0, 1024);
        long m_c0 = std::max<long>(k->shape.m_r,
                                   round_down(l2_half / k_c0, k->shape.m_r));
        m_c0 = std::min<long>(m_c0, 1024);
        const long panels = m_c0 / k->shape.m_r;

        std::mt19937 rng(12345);
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        std::vector<T> a(static_cast<std::size_t>(m_c0) * k_c0);
        std::vector<T> b(static_cast<std::size_t>(k_c0) * k->shape.n_r);
        for (auto& v : a) v = static_cast<T>(dist(rng));
        for (auto& v : b) v = static_cast<T>(dist(rng));
        std::vector<T> tile(static_cast<std::size_t>(k->shape.m_r) * k->shape.n_r);

        auto sweep = [&] {
            for (long g = 0; g < panels; ++g)
                k->body(a.data() + g * (k->shape.m_r * k_c0), b.data(), k_c0,
                        tile.data(), false);
        };
        for (int w = 0; w < trial.warmups; ++w) sweep();
        std::vector<double> times;
        times.reserve(trial.repetitions);
        for (int r = 0; r < trial.repetitions; ++r)
            times.push_back(std::max(timer(sweep), 1e-12));
        const double sec = median_of(times);
        Problem gebb;
        gebb.m = m_c0;
        gebb.n = k->shape.n_r;
        gebb.k = k_c0;
        gebb.precision = prec;
        const double gf = gflops(gebb, sec);
        if (!have || detail::selection_better(gf, k->shape, best.measured_gflops,
                                              best.shape)) {
            best.kernel_name = k->name;
            best.shape = k->shape;
            best.measured_gflops = gf;
            have = true;
        }
    }
    best.profile_fingerprint = profile_fingerprint(hw);
    return best;
}

// Selection with the persisted install-time cache: reuse a cached choice for
// this profile fingerprint unless retune is forced.
template <class T>
KernelSelection select_kernel_cached(const KernelCatalog<T>& catalog,
                                     const HardwareProfile& hw,
                                     const TrialConfig& trial,
                                     const std::string& cache_path,
                                     bool retune = false,
                                     RunTimer timer = monotonic_run_timer()) {
    const std::string fp = profile_fingerprint(hw);
    KernelSelection sel;
    if (!retune && !cache_path.empty() &&
        lookup_kernel_cache(cache_path, fp, sel) &&
        find_kernel(catalog, sel.kernel_name))
        return sel;
    sel = select_kernel(catalog, hw, trial, timer);
    if (!cache_path.empty()) append_kernel_cache(cache_path, sel);
    return sel;
}

// One blocking + threading candidate for the runtime evaluator.
struct PlanCandidate {
    BlockingParams blocking;
    ThreadPlan threads;
};

namespace detail {

inline bool plan_better(const ExecutionPlan& a, const ExecutionPlan& b) {
    if (a.measured_gflops != b.measured_gflops)
        return a.measured_gflops > b.measured_gflops;
    if (a.blocking.m_c != b.blocking.m_c) return a.blocking.m_c > b.blocking.m_c;
    if (a.blocking.k_c != b.blocking.k_c) return a.blocking.k_c > b.blocking.k_c;
    return a.threads.n_partitions < b.threads.n_partitions;
}

template <class T>
void fill_uniform(std::vector<T>& v, std::uint32_t seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (auto& x : v) x = static_cast<T>(dist(rng));
}

// Correctness gate: the candidate must reproduce the naive oracle on a
// cropped sub-problem before its timing counts.
template <class T>
bool spot_check(const Problem& p, const ExecutionPlan& plan,
                const Microkernel<T>& kernel) {
    Problem sp = p;
    sp.m = std::min<long>(p.m, 64);
    sp.k = std::min<long>(p.k, 64);
    sp.n = std::min<long>(p.n, 64);
    std::vector<T> a(sp.m * sp.k), b(sp.k * sp.n), c(sp.m * sp.n),
        ref(sp.m * sp.n);
    fill_uniform(a, 99u);
    fill_uniform(b, 77u);
    fill_uniform(c, 55u);
    ref = c;
    auto av = MatrixView<T>::row_major(a.data(), sp.m, sp.k);
    auto bv = MatrixView<T>::row_major(b.data(), sp.k, sp.n);
    auto cv = MatrixView<T>::row_major(c.data(), sp.m, sp.n);
    auto rv = MatrixView<T>::row_major(ref.data(), sp.m, sp.n);

    auto pa = pack_a(static_cast<T>(sp.alpha), av, plan);
    auto pb = pack_b(static_cast<T>(1), bv, plan);
    compute(static_cast<T>(sp.beta), cv, pa, pb, plan, kernel);
    naive_gemm(sp, av, bv, rv);

    double amax = 0, bmax = 0, cmax = 0;
    for (auto v : a) amax = std::max(amax, std::abs(static_cast<double>(v)));
    for (auto v : b) bmax = std::max(bmax, std::abs(static_cast<double>(v)));
    for (auto v : ref) cmax = std::max(cmax, std::abs(static_cast<double>(v)));
    const double eps = std::numeric_limits<T>::epsilon();
    const double tol =
        8.0 * static_cast<double>(sp.k) * eps *
        (std::abs(sp.alpha) * amax * bmax + std::abs(sp.beta) * cmax + 1.0);
    for (long i = 0; i < sp.m * sp.n; ++i)
        if (std::abs(static_cast<double>(c[i]) - static_cast<double>(ref[i])) >
            tol)
            return false;
    return true;
}

}  // namespace detail

// Runtime performance evaluator: pack once per candidate, time the compute,
// score by measured GFlops, keep the maximizer that passes the correctness
// gate.
template <class T>
ExecutionPlan evaluate_and_select(const Problem& p,
                                  const std::vector<PlanCandidate>& candidates,
                                  const KernelSelection& kernel_sel,
                                  const KernelCatalog<T>& catalog,
                                  const TrialConfig& trial,
                                  RunTimer timer = monotonic_run_timer(),
                                  std::function<bool(const PlanCandidate&)>
                                      correctness_gate = nullptr) {
    if (candidates.empty())
        throw InfeasibleBlocking("evaluate_and_select: no candidates");
    const Microkernel<T>* kernel = find_kernel(catalog, kernel_sel.kernel_name);
    if (!kernel) throw NoValidKernel("selected kernel missing from catalog");

    std::vector<T> a(p.m * p.k), b(p.k * p.n), c0(p.m * p.n);
    detail::fill_uniform(a, 1u);
    detail::fill_uniform(b, 2u);
    detail::fill_uniform(c0, 3u);
    auto av = MatrixView<T>::row_major(a.data(), p.m, p.k);
    auto bv = MatrixView<T>::row_major(b.data(), p.k, p.n);

    ExecutionPlan best;
    bool have = false;
    for (const auto& cand : candidates) {
        ExecutionPlan plan = make_plan(p, cand.blocking, cand.threads, kernel_sel);
        plan.blocking.m_t =
            strip_height(cand.blocking, cand.threads, kernel_sel.shape.m_r);
        const bool ok = correctness_gate ? correctness_gate(cand)
                                         : detail::spot_check(p, plan, *kernel);
        if (!ok) continue;

        auto pa = pack_a(static_cast<T>(p.alpha), av, plan);
        auto pb = pack_b(static_cast<T>(1), bv, plan);
        std::vector<T> c(c0);
        auto cv = MatrixView<T>::row_major(c.data(), p.m, p.n);
        auto run = [&] {
            compute(static_cast<T>(p.beta), cv, pa, pb, plan, *kernel);
        };
        for (int w = 0; w < trial.warmups; ++w) run();
        std::vector<double> times;
        times.reserve(trial.repetitions);
        for (int r = 0; r < trial.repetitions; ++r)
            times.push_back(std::max(timer(run), 1e-12));
        plan.measured_gflops = gflops(p, median_of(times));
        if (!have || detail::plan_better(plan, best)) {
            best = plan;
            have = true;
        }
    }
    if (!have)
        throw OracleMismatch(
            "every candidate failed the correctness spot-check");
    return best;
}

// Full runtime stage: blocking candidates x thread plans (capped), evaluated
// and reduced to one plan.
template <class T>
ExecutionPlan tune(const Problem& p, const HardwareProfile& hw,
                   const KernelSelection& kernel_sel,
                   const KernelCatalog<T>& catalog, const TrialConfig& trial,
                   RunTimer timer = monotonic_run_timer()) {
    auto blockings = design_candidates(p, hw, kernel_sel);
    std::vector<PlanCandidate> cands;
    for (const auto& bl : blockings) {
        for (const auto& tp : thread_plan_candidates(p, bl, hw)) {
            cands.push_back({bl, tp});
            if (cands.size() >= 64) break;
        }
        if (cands.size() >= 64) break;
    }
    return evaluate_and_select(p, cands, kernel_sel, catalog, trial, timer);
}

}  // namespace tsmm
