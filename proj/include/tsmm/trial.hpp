#pragma once

#include <chrono>
#include <functional>
#include <vector>

#include "tsmm/types.hpp"

namespace tsmm {

enum class TrialStatistic { Median };

struct TrialConfig {
    int warmups = 3;
    int repetitions = 7;
    TrialStatistic statistic = TrialStatistic::Median;

    bool valid() const { return repetitions >= 3 && warmups >= 0; }
};

// Times one invocation of a task, in seconds. Injectable so tuning decisions
// are testable with scripted timings.
using RunTimer = std::function<double(const std::function<void()>&)>;

inline RunTimer monotonic_run_timer() {
    return [](const std::function<void()>& task) {
        auto t0 = std::chrono::steady_clock::now();
        task();
        auto t1 = std::chrono::steady_clock::now();
        return std::chrono::duration<double>(t1 - t0).count();
    };
}

double median_of(std::vector<double> samples);

}  // namespace tsmm
