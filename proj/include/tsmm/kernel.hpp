#pragma once

#include <functional>
#include <string>
#include <vector>

#include "tsmm/types.hpp"

namespace tsmm {

// Register-tile geometry of an inner kernel. k_unroll is the k-loop unroll
// depth; summation over k stays ascending regardless of unrolling.
struct KernelShape {
    int m_r = 4;
    int n_r = 4;
    int k_unroll = 1;
};

inline long vector_lanes(const HardwareProfile& hw, Precision p) {
    long lanes = hw.vector_bits / (8 * fp_size(p));
    return lanes < 1 ? 1 : lanes;
}

// Accumulators plus one A panel load and one B panel load must fit the
// register file.
inline bool fits_register_budget(const KernelShape& s, const HardwareProfile& hw,
                                 Precision p) {
    long lanes = vector_lanes(hw, p);
    long regs = ceil_div(static_cast<long>(s.m_r) * s.n_r, lanes) +
                ceil_div(s.m_r, lanes) + ceil_div(s.n_r, lanes);
    return regs <= hw.simd_register_count;
}

// FMA share of the per-k-iteration instruction stream. FMA count is the
// vector accumulator count; loads are counted as multi-register load
// instructions (up to four vector registers per load, as on ARMv8 ld1).
inline double tile_flop_to_load_ratio(const KernelShape& s,
                                      const HardwareProfile& hw, Precision p) {
    if (!fits_register_budget(s, hw, p))
        throw ShapeOverBudget("kernel " + std::to_string(s.m_r) + "x" +
                              std::to_string(s.n_r) + " exceeds register budget");
    long lanes = vector_lanes(hw, p);
    long fma_ops = ceil_div(static_cast<long>(s.m_r) * s.n_r, lanes);
    long a_vecs = ceil_div(s.m_r, lanes);
    long b_vecs = ceil_div(s.n_r, lanes);
    long load_ops = ceil_div(a_vecs, 4) + ceil_div(b_vecs, 4);
    return static_cast<double>(fma_ops) / static_cast<double>(fma_ops + load_ops);
}

// Inner kernel contract: c_tile (m_r x n_r, row-major, contiguous) receives
// A_slice * B_slice, added on top when accumulate is set. A_slice holds kc
// steps of m_r contiguous values, B_slice kc steps of n_r values.
template <class T>
using KernelBody = std::function<void(const T* a_slice, const T* b_slice,
                                      long kc, T* c_tile, bool accumulate)>;

template <class T>
struct Microkernel {
    std::string name;
    KernelShape shape;
    KernelBody<T> body;
};

enum class KernelProvenance { Reference, Vectorized };

template <class T>
struct KernelCatalog {
    std::vector<Microkernel<T>> entries;
    KernelProvenance provenance = KernelProvenance::Reference;
};

// Literal triple loop with ascending-k summation; the tile-level oracle.
template <class T>
Microkernel<T> reference_kernel(KernelShape shape) {
    Microkernel<T> k;
    k.shape = shape;
    k.name = "ref_" + std::to_string(shape.m_r) + "x" + std::to_string(shape.n_r);
    const int mr = shape.m_r, nr = shape.n_r;
    k.body = [mr, nr](const T* a, const T* b, long kc, T* c, bool acc) {
        for (int i = 0; i < mr; ++i) {
            for (int j = 0; j < nr; ++j) {
                T sum = acc ? c[i * nr + j] : T(0);
                for (long p = 0; p < kc; ++p)
                    sum += a[p * mr + i] * b[p * nr + j];
                c[i * nr + j] = sum;
            }
        }
    };
    return k;
}

// Compile-time shaped kernel. The k loop is unrolled KU deep with the two
// half-iterations interleaving loads and accumulation; summation order over
// k is identical to the reference kernel.
template <class T, int MR, int NR, int KU>
void tiled_kernel_body(const T* a, const T* b, long kc, T* c, bool acc) {
    T accv[MR * NR];
    if (acc) {
        for (int i = 0; i < MR * NR; ++i) accv[i] = c[i];
    } else {
        for (int i = 0; i < MR * NR; ++i) accv[i] = T(0);
    }
    long p = 0;
    for (; p + KU <= kc; p += KU) {
        for (int u = 0; u < KU; ++u) {
            const T* ap = a + (p + u) * MR;
            const T* bp = b + (p + u) * NR;
            for (int i = 0; i < MR; ++i) {
                const T av = ap[i];
                for (int j = 0; j < NR; ++j) accv[i * NR + j] += av * bp[j];
            }
        }
    }
    for (; p < kc; ++p) {
        const T* ap = a + p * MR;
        const T* bp = b + p * NR;
        for (int i = 0; i < MR; ++i) {
            const T av = ap[i];
            for (int j = 0; j < NR; ++j) accv[i * NR + j] += av * bp[j];
        }
    }
    for (int i = 0; i < MR * NR; ++i) c[i] = accv[i];
}

template <class T, int MR, int NR, int KU>
Microkernel<T> make_tiled_kernel() {
    Microkernel<T> k;
    k.shape = KernelShape{MR, NR, KU};
    k.name = "tiled_" + std::to_string(MR) + "x" + std::to_string(NR);
    k.body = &tiled_kernel_body<T, MR, NR, KU>;
    return k;
}

// All kernels whose tile fits the profile's register file. The reference
// 4x4 kernel is always listed first.
template <class T>
KernelCatalog<T> build_catalog(const HardwareProfile& hw) {
    constexpr Precision p = precision_of<T>();
    KernelCatalog<T> cat;
    cat.provenance = KernelProvenance::Vectorized;
    cat.entries.push_back(reference_kernel<T>(KernelShape{4, 4, 1}));
    Microkernel<T> candidates[] = {
        make_tiled_kernel<T, 4, 4, 4>(),  make_tiled_kernel<T, 8, 4, 4>(),
        make_tiled_kernel<T, 16, 4, 4>(), make_tiled_kernel<T, 12, 8, 2>(),
        make_tiled_kernel<T, 8, 8, 4>(),  make_tiled_kernel<T, 6, 8, 2>(),
    };
    for (auto& k : candidates)
        if (fits_register_budget(k.shape, hw, p)) cat.entries.push_back(k);
    return cat;
}

template <class T>
const Microkernel<T>* find_kernel(const KernelCatalog<T>& cat,
                                  const std::string& name) {
    for (const auto& k : cat.entries)
        if (k.name == name) return &k;
    return nullptr;
}

}  // namespace tsmm
