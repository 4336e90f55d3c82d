#pragma once

#include <algorithm>
#include <cstring>
#include <fstream>
#include <vector>

#include "tsmm/plan.hpp"
#include "tsmm/types.hpp"

namespace tsmm {

enum class Operand { A, B };

// One packed block (a GEBB strip for A, an n_c panel for B). Offsets are
// element counts into the payload so buffers stay relocatable.
struct BlockDescriptor {
    long jc_index = 0;  // k-block
    long ic_index = 0;  // m-block for A, n-block for B
    long it_index = 0;  // thread strip within the m-block (A only)
    int thread_hint = 0;
    std::size_t offset = 0;
    long rows = 0;  // source rows covered (A: m extent, B: k extent)
    long cols = 0;  // source cols covered (A: k extent, B: n extent)
};

template <class T>
struct PackedBuffer {
    Operand which = Operand::A;
    long outer = 0;        // m for A, n for B
    long depth = 0;        // k
    long outer_block = 0;  // m_c for A, n_c for B
    long k_block = 0;      // k_c
    long strip = 0;        // m_t for A, n_c for B
    int tile = 0;          // m_r for A, n_r for B
    T alpha_applied = T(1);
    std::vector<BlockDescriptor> header;
    std::vector<T> payload;
};

// PACKA: jc over K step k_c, ic over M step m_c, it over m_c step m_t.
// Each strip stores m_r-interleaved micro-panels (per k column, m_r rows
// contiguous), scaled by alpha, zero-padded to full tiles.
template <class T>
PackedBuffer<T> pack_a(T alpha, const MatrixView<T>& a, const ExecutionPlan& plan) {
    const BlockingParams& bl = plan.blocking;
    if (!a.valid()) throw GeometryMismatch("pack_a: invalid A view");
    if (bl.m_c < 1 || bl.k_c < 1 || bl.m_t < 1)
        throw GeometryMismatch("pack_a: invalid blocking");
    const long m = a.rows, k = a.cols;
    const int mr = plan.kernel.shape.m_r;
    const long m_t = std::min(bl.m_t, bl.m_c);

    PackedBuffer<T> pb;
    pb.which = Operand::A;
    pb.outer = m;
    pb.depth = k;
    pb.outer_block = bl.m_c;
    pb.k_block = bl.k_c;
    pb.strip = m_t;
    pb.tile = mr;
    pb.alpha_applied = alpha;

    // Strips are laid out jc-major; the thread hint round-robins over the
    // global (ic, it) strip order, matching compute ownership.
    std::size_t total = 0;
    for (long jc = 0; jc < k; jc += bl.k_c) {
        const long kb = std::min(bl.k_c, k - jc);
        for (long ic = 0; ic < m; ic += bl.m_c) {
            const long mb = std::min(bl.m_c, m - ic);
            for (long it = 0; it < mb; it += m_t) {
                const long rows = std::min(m_t, mb - it);
                total += static_cast<std::size_t>(round_up(rows, mr)) * kb;
            }
        }
    }
    pb.payload.assign(total, T(0));

    std::size_t off = 0;
    for (long jc = 0, jci = 0; jc < k; jc += bl.k_c, ++jci) {
        const long kb = std::min(bl.k_c, k - jc);
        long strip_index = 0;
        for (long ic = 0, ici = 0; ic < m; ic += bl.m_c, ++ici) {
            const long mb = std::min(bl.m_c, m - ic);
            for (long it = 0, iti = 0; it < mb; it += m_t, ++iti) {
                const long rows = std::min(m_t, mb - it);
                const long padded = round_up(rows, mr);
                BlockDescriptor d;
                d.jc_index = jci;
                d.ic_index = ici;
                d.it_index = iti;
                d.thread_hint =
                    static_cast<int>(strip_index % plan.threads.m_partitions);
                d.offset = off;
                d.rows = rows;
                d.cols = kb;
                pb.header.push_back(d);
                T* dst = pb.payload.data() + off;
                for (long g = 0; g < padded / mr; ++g) {
                    for (long p = 0; p < kb; ++p) {
                        for (int r = 0; r < mr; ++r) {
                            const long row = g * mr + r;
                            dst[g * (mr * kb) + p * mr + r] =
                                row < rows ? alpha * a.at(ic + it + row, jc + p)
                                           : T(0);
                        }
                    }
                }
                off += static_cast<std::size_t>(padded) * kb;
                ++strip_index;
            }
        }
    }
    return pb;
}

// PACKB: jc over K step k_c, ic over N step n_c. Blocks store
// n_r-interleaved micro-panels (per k row, n_r columns contiguous).
template <class T>
PackedBuffer<T> pack_b(T alpha, const MatrixView<T>& b, const ExecutionPlan& plan) {
    const BlockingParams& bl = plan.blocking;
    if (!b.valid()) throw GeometryMismatch("pack_b: invalid B view");
    if (bl.n_c < 1 || bl.k_c < 1) throw GeometryMismatch("pack_b: invalid blocking");
    const long k = b.rows, n = b.cols;
    const int nr = plan.kernel.shape.n_r;

    PackedBuffer<T> pb;
    pb.which = Operand::B;
    pb.outer = n;
    pb.depth = k;
    pb.outer_block = bl.n_c;
    pb.k_block = bl.k_c;
    pb.strip = bl.n_c;
    pb.tile = nr;
    pb.alpha_applied = alpha;

    std::size_t total = 0;
    for (long jc = 0; jc < k; jc += bl.k_c) {
        const long kb = std::min(bl.k_c, k - jc);
        for (long ic = 0; ic < n; ic += bl.n_c) {
            const long nb = std::min(bl.n_c, n - ic);
            total += static_cast<std::size_t>(round_up(nb, nr)) * kb;
        }
    }
    pb.payload.assign(total, T(0));

    const long n_blocks = ceil_div(n, bl.n_c);
    const long blocks_per_part = ceil_div(n_blocks, plan.threads.n_partitions);
    std::size_t off = 0;
    for (long jc = 0, jci = 0; jc < k; jc += bl.k_c, ++jci) {
        const long kb = std::min(bl.k_c, k - jc);
        for (long ic = 0, ici = 0; ic < n; ic += bl.n_c, ++ici) {
            const long nb = std::min(bl.n_c, n - ic);
            const long padded = round_up(nb, nr);
            BlockDescriptor d;
            d.jc_index = jci;
            d.ic_index = ici;
            d.thread_hint = static_cast<int>(ici / blocks_per_part);
            d.offset = off;
            d.rows = kb;
            d.cols = nb;
            pb.header.push_back(d);
            T* dst = pb.payload.data() + off;
            for (long h = 0; h < padded / nr; ++h) {
                for (long p = 0; p < kb; ++p) {
                    for (int q = 0; q < nr; ++q) {
                        const long col = h * nr + q;
                        dst[h * (nr * kb) + p * nr + q] =
                            col < nb ? alpha * b.at(jc + p, ic + col) : T(0);
                    }
                }
            }
            off += static_cast<std::size_t>(padded) * kb;
        }
    }
    return pb;
}

template <class T>
struct DenseMatrix {
    long rows = 0;
    long cols = 0;
    std::vector<T> data;  // row-major
    T& at(long i, long j) { return data[i * cols + j]; }
    const T& at(long i, long j) const { return data[i * cols + j]; }
};

// Reconstructs the alpha-scaled source matrix from a packed buffer.
// Independent of the compute path; the round-trip test oracle.
template <class T>
DenseMatrix<T> unpack_check(const PackedBuffer<T>& pb) {
    const int tile = pb.tile;
    // Header sanity: blocks in bounds and non-overlapping.
    {
        std::vector<std::pair<std::size_t, std::size_t>> spans;
        for (const auto& d : pb.header) {
            const long padded =
                round_up(pb.which == Operand::A ? d.rows : d.cols, tile);
            const std::size_t len = static_cast<std::size_t>(padded) *
                                    (pb.which == Operand::A ? d.cols : d.rows);
            if (d.offset + len > pb.payload.size())
                throw CorruptHeader("packed block escapes payload");
            spans.emplace_back(d.offset, d.offset + len);
        }
        std::sort(spans.begin(), spans.end());
        for (std::size_t i = 1; i < spans.size(); ++i)
            if (spans[i].first < spans[i - 1].second)
                throw CorruptHeader("packed blocks overlap");
    }

    DenseMatrix<T> out;
    if (pb.which == Operand::A) {
        out.rows = pb.outer;
        out.cols = pb.depth;
        out.data.assign(out.rows * out.cols, T(0));
        const long m_t = pb.strip;
        for (const auto& d : pb.header) {
            const long jc = d.jc_index * pb.k_block;
            const long row0 = d.ic_index * pb.outer_block + d.it_index * m_t;
            const long padded = round_up(d.rows, tile);
            const T* src = pb.payload.data() + d.offset;
            for (long g = 0; g < padded / tile; ++g)
                for (long p = 0; p < d.cols; ++p)
                    for (int r = 0; r < tile; ++r) {
                        const long row = g * tile + r;
                        if (row < d.rows)
                            out.at(row0 + row, jc + p) =
                                src[g * (tile * d.cols) + p * tile + r];
                    }
        }
    } else {
        out.rows = pb.depth;
        out.cols = pb.outer;
        out.data.assign(out.rows * out.cols, T(0));
        for (const auto& d : pb.header) {
            const long jc = d.jc_index * pb.k_block;
            const long col0 = d.ic_index * pb.outer_block;
            const long padded = round_up(d.cols, tile);
            const T* src = pb.payload.data() + d.offset;
            for (long h = 0; h < padded / tile; ++h)
                for (long p = 0; p < d.rows; ++p)
                    for (int q = 0; q < tile; ++q) {
                        const long col = h * tile + q;
                        if (col < d.cols)
                            out.at(jc + p, col0 + col) =
                                src[h * (tile * d.rows) + p * tile + q];
                    }
        }
    }
    return out;
}

// --- binary dump (CLI --dump-packed) ---------------------------------------
// Fixed 32-byte header, descriptor table, then raw little-endian payload.

namespace detail {
constexpr char kPackMagic[8] = {'T', 'S', 'M', 'M', 'P', 'A', 'K', '1'};
}

template <class T>
void dump_packed(const PackedBuffer<T>& pb, std::ostream& out) {
    char head[32] = {};
    std::memcpy(head, detail::kPackMagic, 8);
    head[8] = pb.which == Operand::A ? 'A' : 'B';
    head[9] = static_cast<char>(sizeof(T));
    std::uint64_t counts[2] = {pb.header.size(), pb.payload.size()};
    std::memcpy(head + 16, counts, 16);
    out.write(head, 32);
    std::int64_t geom[6] = {pb.outer, pb.depth, pb.outer_block,
                            pb.k_block, pb.strip, pb.tile};
    out.write(reinterpret_cast<const char*>(geom), sizeof geom);
    T alpha = pb.alpha_applied;
    out.write(reinterpret_cast<const char*>(&alpha), sizeof alpha);
    for (const auto& d : pb.header) {
        std::int64_t rec[6] = {d.jc_index, d.ic_index, d.it_index,
                               d.thread_hint, static_cast<std::int64_t>(d.offset),
                               0};
        rec[5] = (d.rows << 20) | d.cols;  // rows/cols packed, both < 2^20
        out.write(reinterpret_cast<const char*>(rec), sizeof rec);
    }
    out.write(reinterpret_cast<const char*>(pb.payload.data()),
              static_cast<std::streamsize>(pb.payload.size() * sizeof(T)));
}

template <class T>
PackedBuffer<T> load_packed(std::istream& in) {
    char head[32];
    in.read(head, 32);
    if (!in || std::memcmp(head, detail::kPackMagic, 8) != 0)
        throw CorruptHeader("packed dump: bad magic");
    if (head[9] != static_cast<char>(sizeof(T)))
        throw CorruptHeader("packed dump: element size mismatch");
    PackedBuffer<T> pb;
    pb.which = head[8] == 'A' ? Operand::A : Operand::B;
    std::uint64_t counts[2];
    std::memcpy(counts, head + 16, 16);
    std::int64_t geom[6];
    in.read(reinterpret_cast<char*>(geom), sizeof geom);
    pb.outer = geom[0];
    pb.depth = geom[1];
    pb.outer_block = geom[2];
    pb.k_block = geom[3];
    pb.strip = geom[4];
    pb.tile = static_cast<int>(geom[5]);
    T alpha;
    in.read(reinterpret_cast<char*>(&alpha), sizeof alpha);
    pb.alpha_applied = alpha;
    pb.header.resize(counts[0]);
    for (auto& d : pb.header) {
        std::int64_t rec[6];
        in.read(reinterpret_cast<char*>(rec), sizeof rec);
        d.jc_index = rec[0];
        d.ic_index = rec[1];
        d.it_index = rec[2];
        d.thread_hint = static_cast<int>(rec[3]);
        d.offset = static_cast<std::size_t>(rec[4]);
        d.rows = rec[5] >> 20;
        d.cols = rec[5] & ((1 << 20) - 1);
    }
    pb.payload.resize(counts[1]);
    in.read(reinterpret_cast<char*>(pb.payload.data()),
            static_cast<std::streamsize>(pb.payload.size() * sizeof(T)));
    if (!in) throw CorruptHeader("packed dump: truncated");
    return pb;
}

}  // namespace tsmm
