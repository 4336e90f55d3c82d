#include "tsmm/cache_model.hpp"

#include <cmath>

namespace tsmm {

namespace {

void check(const CacheModelInput& in) {
    if (!in.valid()) throw Error("cache model: invalid input");
}

}  // namespace

double misses_naive(const CacheModelInput& in) {
    check(in);
    return in.n * in.n * in.n / in.l;
}

double misses_blocked(const CacheModelInput& in) {
    check(in);
    return 3.0 * std::sqrt(3.0) * in.n * in.n * in.n / (in.l * std::sqrt(in.z));
}

double misses_prepack(const CacheModelInput& in) {
    check(in);
    return in.z * in.t / (3.0 * in.l) +
           2.0 * std::sqrt(3.0) * in.n * in.n * in.n / (in.l * std::sqrt(in.z));
}

}  // namespace tsmm
