#pragma once

#include <atomic>
#include <cstdint>

namespace yotta {

// Deterministic operation counters. Wall time is hardware-dependent; these
// are not, so benchmark comparisons report both.
struct CostMeter {
    std::atomic<std::uint64_t> hash_calls{0};
    std::atomic<std::uint64_t> bytes_hashed{0};
    std::atomic<std::uint64_t> group_exps{0};
    std::atomic<std::uint64_t> aead_ops{0};
    std::atomic<std::uint64_t> verify_calls{0};

    void reset() {
        hash_calls = 0;
        bytes_hashed = 0;
        group_exps = 0;
        aead_ops = 0;
        verify_calls = 0;
    }
};

// Process-wide meter; benchmark code resets it around measured sections.
inline CostMeter& meter() {
    static CostMeter m;
    return m;
}

struct CostSnapshot {
    std::uint64_t hash_calls = 0;
    std::uint64_t bytes_hashed = 0;
    std::uint64_t group_exps = 0;
    std::uint64_t aead_ops = 0;
    std::uint64_t verify_calls = 0;

    static CostSnapshot take() {
        const auto& m = meter();
        return {m.hash_calls, m.bytes_hashed, m.group_exps, m.aead_ops, m.verify_calls};
    }

    CostSnapshot delta_since(const CostSnapshot& earlier) const {
        return {hash_calls - earlier.hash_calls, bytes_hashed - earlier.bytes_hashed,
                group_exps - earlier.group_exps, aead_ops - earlier.aead_ops,
                verify_calls - earlier.verify_calls};
    }
};

}  // namespace yotta
