#pragma once

#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace tsmm {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error {
    using Error::Error;
};
struct ProfileParseError : Error {
    using Error::Error;
};
struct ShapeOverBudget : Error {
    using Error::Error;
};
struct NoValidKernel : Error {
    using Error::Error;
};
struct GeometryMismatch : Error {
    using Error::Error;
};
struct CorruptHeader : Error {
    using Error::Error;
};
struct InfeasibleBlocking : Error {
    using Error::Error;
};
struct PlanMismatch : Error {
    using Error::Error;
};
struct NonPositiveTime : Error {
    using Error::Error;
};
struct SpecError : Error {
    using Error::Error;
};
struct OracleMismatch : Error {
    using Error::Error;
};

// ---------------------------------------------------------------------------
// Precision
// ---------------------------------------------------------------------------

enum class Precision { Single, Double };

inline int fp_size(Precision p) { return p == Precision::Single ? 4 : 8; }

inline const char* precision_name(Precision p) {
    return p == Precision::Single ? "f32" : "f64";
}

template <class T>
constexpr Precision precision_of();

template <>
constexpr Precision precision_of<float>() {
    return Precision::Single;
}
template <>
constexpr Precision precision_of<double>() {
    return Precision::Double;
}

// ---------------------------------------------------------------------------
// Matrix views
// ---------------------------------------------------------------------------

enum class StorageOrder { RowMajor, ColMajor };

// Non-owning strided 2-D view. The stride implied by the storage order must
// cover the contiguous dimension.
template <class T>
struct MatrixView {
    long rows = 0;
    long cols = 0;
    long row_stride = 0;  // elements between vertically adjacent entries
    long col_stride = 0;  // elements between horizontally adjacent entries
    StorageOrder order = StorageOrder::RowMajor;
    T* data = nullptr;

    static MatrixView row_major(T* ptr, long r, long c, long ld = -1) {
        if (ld < 0) ld = c;
        return MatrixView{r, c, ld, 1, StorageOrder::RowMajor, ptr};
    }
    static MatrixView col_major(T* ptr, long r, long c, long ld = -1) {
        if (ld < 0) ld = r;
        return MatrixView{r, c, 1, ld, StorageOrder::ColMajor, ptr};
    }

    T& at(long i, long j) const { return data[i * row_stride + j * col_stride]; }

    bool valid() const {
        if (rows < 1 || cols < 1 || data == nullptr) return false;
        if (order == StorageOrder::RowMajor)
            return col_stride == 1 && row_stride >= cols;
        return row_stride == 1 && col_stride >= rows;
    }
};

// ---------------------------------------------------------------------------
// Problem
// ---------------------------------------------------------------------------

struct Problem {
    long m = 0;
    long n = 0;
    long k = 0;
    double alpha = 1.0;
    double beta = 0.0;
    Precision precision = Precision::Double;
};

template <class T>
Problem validate_problem(const Problem& p, const MatrixView<T>& a,
                         const MatrixView<T>& b, const MatrixView<T>& c) {
    if (p.m < 1 || p.n < 1 || p.k < 1)
        throw DimensionMismatch("problem dimensions must be >= 1");
    if (precision_of<T>() != p.precision)
        throw DimensionMismatch("element type does not match declared precision");
    auto check = [](const MatrixView<T>& v, long r, long cdim, const char* name) {
        if (!v.valid() || v.rows != r || v.cols != cdim)
            throw DimensionMismatch(std::string("matrix ") + name + " is " +
                                    std::to_string(v.rows) + "x" +
                                    std::to_string(v.cols) + ", expected " +
                                    std::to_string(r) + "x" + std::to_string(cdim));
    };
    check(a, p.m, p.k, "A");
    check(b, p.k, p.n, "B");
    check(c, p.m, p.n, "C");
    return p;
}

// ---------------------------------------------------------------------------
// Hardware description
// ---------------------------------------------------------------------------

struct HardwareProfile {
    long l1d_bytes = 32 * 1024;
    long l2_bytes = 1024 * 1024;
    long cache_line_bytes = 64;
    long vector_bits = 128;
    long simd_register_count = 32;
    long max_threads = 1;

    bool valid() const {
        return l1d_bytes > 0 && l2_bytes > 0 && cache_line_bytes > 0 &&
               vector_bits > 0 && simd_register_count > 0 && max_threads > 0 &&
               l1d_bytes <= l2_bytes && l1d_bytes % cache_line_bytes == 0;
    }
};

// FNV-1a over the profile fields; keys the kernel cache.
inline std::string profile_fingerprint(const HardwareProfile& hw) {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](std::uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            h ^= (v >> (8 * i)) & 0xff;
            h *= 1099511628211ull;
        }
    };
    mix(static_cast<std::uint64_t>(hw.l1d_bytes));
    mix(static_cast<std::uint64_t>(hw.l2_bytes));
    mix(static_cast<std::uint64_t>(hw.cache_line_bytes));
    mix(static_cast<std::uint64_t>(hw.vector_bits));
    mix(static_cast<std::uint64_t>(hw.simd_register_count));
    mix(static_cast<std::uint64_t>(hw.max_threads));
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

inline long round_up(long v, long multiple) {
    return ((v + multiple - 1) / multiple) * multiple;
}
inline long round_down(long v, long multiple) { return (v / multiple) * multiple; }
inline long ceil_div(long a, long b) { return (a + b - 1) / b; }

}  // namespace tsmm
