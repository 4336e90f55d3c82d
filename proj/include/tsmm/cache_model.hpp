#pragma once

#include "tsmm/types.hpp"

namespace tsmm {

// Inputs for the analytic miss-count model. The analysis assumes square
// problems (m = n = k) and square blocks (m_c = n_c = k_c = b); z and l are
// in elements, t is the thread count.
struct CacheModelInput {
    double n = 0;
    double b = 0;
    double z = 0;
    double l = 1;
    double t = 1;

    bool valid() const {
        return n >= 0 && z > 0 && l >= 1 && t >= 1 && b >= 0 &&
               3.0 * b * b <= z;
    }
};

// Order-of miss counts, kept real-valued.
double misses_naive(const CacheModelInput& in);
double misses_blocked(const CacheModelInput& in);
double misses_prepack(const CacheModelInput& in);

}  // namespace tsmm
