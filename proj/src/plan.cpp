#include "tsmm/plan.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace tsmm {

double median_of(std::vector<double> samples) {
    if (samples.empty()) throw Error("median of empty sample set");
    std::sort(samples.begin(), samples.end());
    const std::size_t n = samples.size();
    return n % 2 ? samples[n / 2]
                 : 0.5 * (samples[n / 2 - 1] + samples[n / 2]);
}

namespace {

long largest_pow2_at_most(long v) {
    long p = 1;
    while (p * 2 <= v) p *= 2;
    return p;
}

}  // namespace

std::vector<BlockingParams> design_candidates(const Problem& p,
                                              const HardwareProfile& hw,
                                              const KernelSelection& kernel) {
    const long fp = fp_size(p.precision);
    const long l1_elems = hw.l1d_bytes / fp;
    const long l2_half = hw.l2_bytes / (2 * fp);
    const int m_r = kernel.shape.m_r;
    const int n_r = kernel.shape.n_r;
    const int ku = kernel.shape.k_unroll;

    if (static_cast<long>(n_r) * ku > l1_elems ||
        static_cast<long>(m_r) * ku > l2_half)
        throw InfeasibleBlocking("cache bounds smaller than one register tile");

    // n_c: the whole (tile-rounded) n when it leaves room for a useful k_c;
    // otherwise the widest n_r multiple that keeps k_c >= 64 (or the k
    // unroll when the cache is too small even for that).
    long n_c = round_up(std::min(p.n, l1_elems), n_r);
    if (n_c * ku > l1_elems || p.n > n_c) {
        // n exceeds what L1 allows at full width; panelize n.
        long denom = std::max<long>(ku, 64);
        long cap = round_down(l1_elems / denom, n_r);
        if (cap < n_r) cap = round_down(l1_elems / ku, n_r);
        n_c = std::max<long>(n_r, std::min(cap, round_up(p.n, n_r)));
    }
    if (n_c * ku > l1_elems)
        throw InfeasibleBlocking("n_c infeasible under the L1 bound");

    std::vector<BlockingParams> out;
    std::set<std::pair<long, long>> seen;
    auto push = [&](long m_c, long k_c, SearchPattern pat) {
        if (m_c < 1 || k_c < 1) return;
        BlockingParams bl;
        bl.m_c = m_c;
        bl.k_c = k_c;
        bl.n_c = n_c;
        bl.m_t = m_c;
        bl.n_t = p.n > n_c ? n_c : 0;
        bl.pattern = pat;
        if (!bl.satisfies_cache_bounds(hw, p.precision)) return;
        if (pat == SearchPattern::Neighborhood &&
            !seen.insert({m_c, k_c}).second)
            return;
        out.push_back(bl);
    };

    // Pattern 1: neighborhood below the largest feasible (m_c, k_c),
    // stepping one kernel tile at a time, window 8 on m and 4 on k.
    long k_c_max = round_down(l1_elems / n_c, ku);
    k_c_max = std::min(k_c_max, round_up(p.k, static_cast<long>(ku)));
    k_c_max = std::max<long>(k_c_max, ku);
    long m_c_max = round_down(l2_half / k_c_max, m_r);
    m_c_max = std::min(m_c_max, round_up(p.m, static_cast<long>(m_r)));
    m_c_max = std::max<long>(m_c_max, m_r);
    if (static_cast<long>(m_r) * k_c_max > l2_half)
        k_c_max = std::max<long>(round_down(l2_half / m_r, ku), ku);
    for (int i = 0; i <= 8; ++i) {
        const long m_c = m_c_max - static_cast<long>(i) * m_r;
        if (m_c < m_r) break;
        for (int j = 0; j <= 4; ++j) {
            const long k_c = k_c_max - static_cast<long>(j) * ku;
            if (k_c < ku) break;
            push(m_c, k_c, SearchPattern::Neighborhood);
        }
    }

    // Pattern 2: largest powers of two under the same bounds.
    {
        long k_c = largest_pow2_at_most(std::max<long>(1, l1_elems / n_c));
        long m_c = largest_pow2_at_most(std::max<long>(1, l2_half / k_c));
        if (k_c >= ku && m_c >= m_r) push(m_c, k_c, SearchPattern::PowerOfTwo);
    }

    if (out.empty())
        throw InfeasibleBlocking("no feasible blocking for this problem");
    return out;
}

std::vector<ThreadPlan> thread_plan_candidates(const Problem& p,
                                               const BlockingParams& blocking,
                                               const HardwareProfile& hw) {
    const int threads = static_cast<int>(std::max<long>(1, hw.max_threads));
    std::vector<ThreadPlan> out;
    const long n_blocks = ceil_div(p.n, blocking.n_c);
    int np_max = 1;
    if (p.n > blocking.n_c)
        np_max = static_cast<int>(std::min<long>(n_blocks, threads));
    for (int np = 1; np <= np_max; ++np) {
        // Every n slice must hold at least one full n_c panel.
        if (np > 1 && n_blocks / np < 1) continue;
        if (np > 1 && (n_blocks + np - 1) / np * blocking.n_c < blocking.n_c)
            continue;
        const int mp = std::max(1, threads / np);
        ThreadPlan tp;
        tp.total_threads = threads;
        tp.n_partitions = np;
        tp.m_partitions = mp;
        out.push_back(tp);
    }
    if (out.empty()) {
        ThreadPlan tp;
        tp.total_threads = threads;
        out.push_back(tp);
    }
    return out;
}

ThreadPlan optimize_threads(const Problem& p, const BlockingParams& blocking,
                            const HardwareProfile& hw) {
    auto cands = thread_plan_candidates(p, blocking, hw);
    // Prefer all threads on m; only spread over n when m alone cannot feed
    // every thread a strip.
    const long strips = ceil_div(p.m, std::max<long>(1, blocking.m_t));
    for (const auto& tp : cands)
        if (strips >= tp.m_partitions) return tp;
    return cands.back();
}

long strip_height(const BlockingParams& blocking, const ThreadPlan& tp, int m_r) {
    long m_t = ceil_div(blocking.m_c, tp.m_partitions);
    m_t = round_up(std::max<long>(m_t, 1), m_r);
    return std::min(m_t, round_up(blocking.m_c, static_cast<long>(m_r)));
}

// --- cache files -------------------------------------------------------------

std::string plan_cache_line(const ExecutionPlan& plan) {
    std::ostringstream os;
    os << plan.m << ',' << plan.k << ',' << plan.n << ','
       << precision_name(plan.precision) << ',' << plan.blocking.m_c << ','
       << plan.blocking.k_c << ',' << plan.blocking.n_c << ','
       << plan.blocking.m_t << ',' << plan.threads.n_partitions << ','
       << plan.threads.m_partitions << ',' << plan.kernel.kernel_name << ','
       << plan.measured_gflops;
    return os.str();
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

}  // namespace

bool parse_plan_cache_line(const std::string& line, ExecutionPlan& out) {
    auto f = split_csv(line);
    if (f.size() != 12) return false;
    try {
        out.m = std::stol(f[0]);
        out.k = std::stol(f[1]);
        out.n = std::stol(f[2]);
        if (f[3] == "f32")
            out.precision = Precision::Single;
        else if (f[3] == "f64")
            out.precision = Precision::Double;
        else
            return false;
        out.blocking.m_c = std::stol(f[4]);
        out.blocking.k_c = std::stol(f[5]);
        out.blocking.n_c = std::stol(f[6]);
        out.blocking.m_t = std::stol(f[7]);
        out.threads.n_partitions = std::stoi(f[8]);
        out.threads.m_partitions = std::stoi(f[9]);
        out.threads.total_threads =
            out.threads.n_partitions * out.threads.m_partitions;
        out.kernel.kernel_name = f[10];
        out.measured_gflops = std::stod(f[11]);
    } catch (const std::exception&) {
        return false;
    }
    return true;
}

bool lookup_plan_cache(const std::string& path, const Problem& p,
                       ExecutionPlan& out) {
    std::ifstream in(path);
    if (!in) return false;
    std::string line;
    bool found = false;
    while (std::getline(in, line)) {
        ExecutionPlan cand;
        if (!parse_plan_cache_line(line, cand)) continue;
        if (cand.m == p.m && cand.k == p.k && cand.n == p.n &&
            cand.precision == p.precision) {
            out = cand;  // newest line wins
            found = true;
        }
    }
    return found;
}

void append_plan_cache(const std::string& path, const ExecutionPlan& plan) {
    std::ofstream out(path, std::ios::app);
    out << plan_cache_line(plan) << '\n';
}

std::string kernel_cache_line(const KernelSelection& sel) {
    std::ostringstream os;
    os << sel.profile_fingerprint << ',' << sel.kernel_name << ','
       << sel.shape.m_r << ',' << sel.shape.n_r << ',' << sel.shape.k_unroll
       << ',' << sel.measured_gflops;
    return os.str();
}

bool lookup_kernel_cache(const std::string& path, const std::string& fingerprint,
                         KernelSelection& out) {
    std::ifstream in(path);
    if (!in) return false;
    std::string line;
    bool found = false;
    while (std::getline(in, line)) {
        auto f = split_csv(line);
        if (f.size() != 6) continue;
        if (f[0] != fingerprint) continue;
        try {
            KernelSelection sel;
            sel.profile_fingerprint = f[0];
            sel.kernel_name = f[1];
            sel.shape.m_r = std::stoi(f[2]);
            sel.shape.n_r = std::stoi(f[3]);
            sel.shape.k_unroll = std::stoi(f[4]);
            sel.measured_gflops = std::stod(f[5]);
            out = sel;
            found = true;  // newest line wins
        } catch (const std::exception&) {
        }
    }
    return found;
}

void append_kernel_cache(const std::string& path, const KernelSelection& sel) {
    std::ofstream out(path, std::ios::app);
    out << kernel_cache_line(sel) << '\n';
}

}  // namespace tsmm
