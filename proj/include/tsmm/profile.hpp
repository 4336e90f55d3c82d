#pragma once

#include <iosfwd>
#include <string>

#include "tsmm/types.hpp"

namespace tsmm {

// Fallback values used whenever the OS probe cannot answer. Conservative
// enough that the cache-bound blocking stays valid on mainstream cores.
HardwareProfile default_profile();

// Probes the running machine (Linux sysconf where available); any field the
// probe cannot determine falls back to default_profile().
HardwareProfile probe_profile();

// Parses the line-oriented `key = value` profile format. Keys: l1d_bytes,
// l2_bytes, cache_line_bytes, vector_bits, simd_register_count, max_threads.
// The three cache keys are required; the rest default. Unknown keys and
// malformed lines raise ProfileParseError with the line number.
HardwareProfile parse_profile(std::istream& in);
HardwareProfile load_profile_file(const std::string& path);

}  // namespace tsmm
