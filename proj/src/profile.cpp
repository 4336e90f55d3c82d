#include "tsmm/profile.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <thread>

#ifdef __linux__
#include <unistd.h>
#endif

namespace tsmm {

HardwareProfile default_profile() {
    HardwareProfile hw;
    hw.l1d_bytes = 32 * 1024;
    hw.l2_bytes = 1024 * 1024;
    hw.cache_line_bytes = 64;
    hw.vector_bits = 128;
    hw.simd_register_count = 32;
    hw.max_threads = std::max(1u, std::thread::hardware_concurrency());
    return hw;
}

HardwareProfile probe_profile() {
    HardwareProfile hw = default_profile();
#ifdef __linux__
    auto probe = [](int name, long fallback) {
        long v = ::sysconf(name);
        return v > 0 ? v : fallback;
    };
#ifdef _SC_LEVEL1_DCACHE_SIZE
    hw.l1d_bytes = probe(_SC_LEVEL1_DCACHE_SIZE, hw.l1d_bytes);
#endif
#ifdef _SC_LEVEL2_CACHE_SIZE
    hw.l2_bytes = probe(_SC_LEVEL2_CACHE_SIZE, hw.l2_bytes);
#endif
#ifdef _SC_LEVEL1_DCACHE_LINESIZE
    hw.cache_line_bytes = probe(_SC_LEVEL1_DCACHE_LINESIZE, hw.cache_line_bytes);
#endif
#endif
    if (!hw.valid()) hw = default_profile();
    return hw;
}

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    auto e = s.find_last_not_of(" \t\r");
    if (b == std::string::npos) return "";
    return s.substr(b, e - b + 1);
}

}  // namespace

HardwareProfile parse_profile(std::istream& in) {
    std::map<std::string, long> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string s = trim(line);
        if (s.empty() || s[0] == '#') continue;
        auto eq = s.find('=');
        if (eq == std::string::npos)
            throw ProfileParseError("profile line " + std::to_string(lineno) +
                                    ": expected key = value");
        std::string key = trim(s.substr(0, eq));
        std::string val = trim(s.substr(eq + 1));
        static const char* known[] = {"l1d_bytes",   "l2_bytes",
                                      "cache_line_bytes", "vector_bits",
                                      "simd_register_count", "max_threads"};
        if (std::find_if(std::begin(known), std::end(known),
                         [&](const char* k) { return key == k; }) ==
            std::end(known))
            throw ProfileParseError("profile line " + std::to_string(lineno) +
                                    ": unknown key '" + key + "'");
        long num = 0;
        try {
            size_t pos = 0;
            num = std::stol(val, &pos);
            if (pos != val.size()) throw std::invalid_argument(val);
        } catch (const std::exception&) {
            throw ProfileParseError("profile line " + std::to_string(lineno) +
                                    ": bad value '" + val + "'");
        }
        if (num <= 0)
            throw ProfileParseError("profile line " + std::to_string(lineno) +
                                    ": value must be positive");
        kv[key] = num;
    }
    for (const char* required : {"l1d_bytes", "l2_bytes", "cache_line_bytes"})
        if (!kv.count(required))
            throw ProfileParseError(std::string("profile: missing required key '") +
                                    required + "'");
    HardwareProfile hw = default_profile();
    hw.l1d_bytes = kv["l1d_bytes"];
    hw.l2_bytes = kv["l2_bytes"];
    hw.cache_line_bytes = kv["cache_line_bytes"];
    if (kv.count("vector_bits")) hw.vector_bits = kv["vector_bits"];
    if (kv.count("simd_register_count"))
        hw.simd_register_count = kv["simd_register_count"];
    if (kv.count("max_threads")) hw.max_threads = kv["max_threads"];
    if (!hw.valid())
        throw ProfileParseError(
            "profile: inconsistent values (need l1 <= l2 and line | l1)");
    return hw;
}

HardwareProfile load_profile_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ProfileParseError("profile: cannot open '" + path + "'");
    return parse_profile(in);
}

}  // namespace tsmm
