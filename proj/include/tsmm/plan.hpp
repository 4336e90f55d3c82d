#pragma once

#include <string>
#include <vector>

#include "tsmm/kernel.hpp"
#include "tsmm/trial.hpp"
#include "tsmm/types.hpp"

namespace tsmm {

enum class SearchPattern { Neighborhood, PowerOfTwo };

// Cache-blocked geometry. k_c * n_c elements fit L1; m_c * k_c fits half L2.
struct BlockingParams {
    long m_c = 0;
    long k_c = 0;
    long n_c = 0;
    long m_t = 0;
    long n_t = 0;  // n-slice width per thread partition; 0 when n <= n_c
    SearchPattern pattern = SearchPattern::Neighborhood;

    bool satisfies_cache_bounds(const HardwareProfile& hw, Precision p) const {
        const long fp = fp_size(p);
        return k_c * n_c <= hw.l1d_bytes / fp &&
               m_c * k_c <= hw.l2_bytes / (2 * fp);
    }
};

// Work decomposition: n_partitions slices on n, m_partitions on m; row
// strips of height m_t are dealt round-robin to the m slots.
struct ThreadPlan {
    int total_threads = 1;
    int n_partitions = 1;
    int m_partitions = 1;

    int slots() const { return n_partitions * m_partitions; }
    int strip_owner(long global_strip_index) const {
        return static_cast<int>(global_strip_index % m_partitions);
    }
};

struct KernelSelection {
    std::string kernel_name;
    KernelShape shape;
    double measured_gflops = 0.0;
    std::string profile_fingerprint;
};

struct ExecutionPlan {
    BlockingParams blocking;
    ThreadPlan threads;
    KernelSelection kernel;
    KernelShape kernel_shape;  // mirrors kernel.shape; geometry authority
    long m = 0, n = 0, k = 0;
    Precision precision = Precision::Double;
    double measured_gflops = 0.0;
};

inline ExecutionPlan make_plan(const Problem& p, BlockingParams bl, ThreadPlan tp,
                               KernelSelection ks) {
    ExecutionPlan plan;
    plan.blocking = bl;
    plan.threads = tp;
    plan.kernel = ks;
    plan.kernel_shape = ks.shape;
    plan.m = p.m;
    plan.n = p.n;
    plan.k = p.k;
    plan.precision = p.precision;
    return plan;
}

// 2mnk flops over wall seconds; packing time is excluded by every caller.
inline double gflops(const Problem& p, double seconds) {
    if (seconds <= 0.0) throw NonPositiveTime("gflops: time must be positive");
    return (2.0 * static_cast<double>(p.m) * static_cast<double>(p.n) *
            static_cast<double>(p.k)) /
           (seconds * 1e9);
}

// Cache-blocked designer: neighborhood search below the largest feasible
// (m_c, k_c) plus the largest-power-of-two pattern.
std::vector<BlockingParams> design_candidates(const Problem& p,
                                              const HardwareProfile& hw,
                                              const KernelSelection& kernel);

// All thread partitions worth evaluating for one blocking. n is never
// divided when n <= n_c, and no slice goes below n_c.
std::vector<ThreadPlan> thread_plan_candidates(const Problem& p,
                                               const BlockingParams& blocking,
                                               const HardwareProfile& hw);

// The heuristically best partition (first candidate). Always succeeds.
ThreadPlan optimize_threads(const Problem& p, const BlockingParams& blocking,
                            const HardwareProfile& hw);

// m_t for a blocking under a thread plan: m_c split over m_partitions,
// rounded up to a tile multiple.
long strip_height(const BlockingParams& blocking, const ThreadPlan& tp, int m_r);

// --- plan cache -------------------------------------------------------------
// One line per problem fingerprint:
// m,k,n,precision,m_c,k_c,n_c,m_t,n_partitions,m_partitions,kernel_name,gflops

std::string plan_cache_line(const ExecutionPlan& plan);
bool parse_plan_cache_line(const std::string& line, ExecutionPlan& out);
bool lookup_plan_cache(const std::string& path, const Problem& p,
                       ExecutionPlan& out);
void append_plan_cache(const std::string& path, const ExecutionPlan& plan);

// --- kernel cache -----------------------------------------------------------
// One line per profile fingerprint:
// fingerprint,kernel_name,m_r,n_r,k_unroll,gflops  (newest line wins)

std::string kernel_cache_line(const KernelSelection& sel);
bool lookup_kernel_cache(const std::string& path, const std::string& fingerprint,
                         KernelSelection& out);
void append_kernel_cache(const std::string& path, const KernelSelection& sel);

}  // namespace tsmm
