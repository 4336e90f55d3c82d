#pragma once

#include <atomic>
#include <thread>
#include <vector>

#include "tsmm/kernel.hpp"
#include "tsmm/pack.hpp"
#include "tsmm/plan.hpp"
#include "tsmm/types.hpp"

namespace tsmm {

struct ComputeStats {
    // Synchronization events inside the jc loop. The pre-pack contract is
    // that this stays zero: threads join only once, at the end.
    std::atomic<long> barriers_inside_jc{0};
    std::atomic<long> tasks_run{0};
};

// Literal 3-nested loop with ascending-k summation; the correctness oracle.
// Each term is (alpha * a) * b so the rounding of the alpha fold matches the
// packed-A path exactly.
template <class T>
void naive_gemm(const Problem& p, const MatrixView<T>& a, const MatrixView<T>& b,
                MatrixView<T> c) {
    validate_problem(p, a, b, c);
    const T alpha = static_cast<T>(p.alpha);
    const T beta = static_cast<T>(p.beta);
    for (long i = 0; i < p.m; ++i) {
        for (long j = 0; j < p.n; ++j) {
            T sum = T(0);
            for (long kk = 0; kk < p.k; ++kk)
                sum += (alpha * a.at(i, kk)) * b.at(kk, j);
            c.at(i, j) = sum + beta * c.at(i, j);
        }
    }
}

namespace detail {

// Per-thread-slot work over pre-packed buffers. Strips owned by this slot's
// m partition, n panels owned by its n partition; jc blocks run ascending so
// every C element accumulates in a fixed order.
template <class T>
void compute_task(T beta, MatrixView<T>& c, const PackedBuffer<T>& pa,
                  const PackedBuffer<T>& pb, const ExecutionPlan& plan,
                  int m_slot, int n_slot, const Microkernel<T>& kernel) {
    const int mr = plan.kernel.shape.m_r;
    const int nr = plan.kernel.shape.n_r;
    const long k_blocks = ceil_div(pa.depth, pa.k_block);
    const long a_strips_per_jc = static_cast<long>(pa.header.size()) / k_blocks;
    const long b_blocks_per_jc = static_cast<long>(pb.header.size()) / k_blocks;
    const long blocks_per_part =
        ceil_div(b_blocks_per_jc, plan.threads.n_partitions);
    const long nb0 = n_slot * blocks_per_part;
    const long nb1 = std::min(nb0 + blocks_per_part, b_blocks_per_jc);

    std::vector<T> tile(static_cast<std::size_t>(mr) * nr);

    for (long s = 0; s < a_strips_per_jc; ++s) {
        if (plan.threads.strip_owner(s) != m_slot) continue;
        const BlockDescriptor& ad0 = pa.header[s];
        const long row0 = ad0.ic_index * pa.outer_block + ad0.it_index * pa.strip;
        const long a_panels = round_up(ad0.rows, mr) / mr;
        for (long nb = nb0; nb < nb1; ++nb) {
            const BlockDescriptor& bd0 = pb.header[nb];
            const long col0 = bd0.ic_index * pb.outer_block;
            const long b_panels = round_up(bd0.cols, nr) / nr;
            for (long g = 0; g < a_panels; ++g) {
                const long rows = std::min<long>(mr, ad0.rows - g * mr);
                for (long h = 0; h < b_panels; ++h) {
                    const long cols = std::min<long>(nr, bd0.cols - h * nr);
                    // The tile accumulates across all jc blocks so every C
                    // element sums its k terms in one ascending pass,
                    // matching the oracle's rounding.
                    for (long jci = 0; jci < k_blocks; ++jci) {
                        const BlockDescriptor& ad =
                            pa.header[jci * a_strips_per_jc + s];
                        const BlockDescriptor& bd =
                            pb.header[jci * b_blocks_per_jc + nb];
                        const long kb = ad.cols;
                        kernel.body(pa.payload.data() + ad.offset + g * (mr * kb),
                                    pb.payload.data() + bd.offset + h * (nr * kb),
                                    kb, tile.data(), jci > 0);
                    }
                    // Merge the valid part of the tile; beta exactly once.
                    for (long i = 0; i < rows; ++i) {
                        T* crow = &c.at(row0 + g * mr + i, col0 + h * nr);
                        const T* trow = tile.data() + i * nr;
                        for (long j = 0; j < cols; ++j)
                            crow[j * c.col_stride] =
                                trow[j] + beta * crow[j * c.col_stride];
                    }
                }
            }
        }
    }
}

}  // namespace detail

// COMPUTE: C = alpha*A*B + beta*C over pre-packed buffers (alpha was folded
// into packed A). Parallel across disjoint C regions, no synchronization
// until the final join.
template <class T>
void compute(T beta, MatrixView<T> c, const PackedBuffer<T>& pa,
             const PackedBuffer<T>& pb, const ExecutionPlan& plan,
             const Microkernel<T>& kernel, ComputeStats* stats = nullptr) {
    if (pa.which != Operand::A || pb.which != Operand::B)
        throw PlanMismatch("compute: operands swapped");
    if (pa.k_block != plan.blocking.k_c || pb.k_block != plan.blocking.k_c ||
        pa.outer_block != plan.blocking.m_c || pb.outer_block != plan.blocking.n_c ||
        pa.strip != std::min(plan.blocking.m_t, plan.blocking.m_c) ||
        pa.tile != plan.kernel.shape.m_r || pb.tile != plan.kernel.shape.n_r)
        throw PlanMismatch("compute: packed geometry disagrees with plan");
    if (pa.depth != pb.depth) throw PlanMismatch("compute: A and B depth differ");
    if (!c.valid() || c.rows != pa.outer || c.cols != pb.outer)
        throw PlanMismatch("compute: C shape disagrees with packed operands");
    if (kernel.shape.m_r != plan.kernel.shape.m_r ||
        kernel.shape.n_r != plan.kernel.shape.n_r)
        throw PlanMismatch("compute: kernel shape disagrees with plan");

    const int np = plan.threads.n_partitions;
    const int mp = plan.threads.m_partitions;
    const int slots = np * mp;

    auto run_slot = [&](int slot) {
        detail::compute_task<T>(beta, c, pa, pb, plan, slot % mp, slot / mp,
                                kernel);
        if (stats) stats->tasks_run.fetch_add(1, std::memory_order_relaxed);
    };

    if (slots == 1) {
        run_slot(0);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(slots - 1);
    for (int s = 1; s < slots; ++s) pool.emplace_back(run_slot, s);
    run_slot(0);
    for (auto& t : pool) t.join();
}

}  // namespace tsmm
