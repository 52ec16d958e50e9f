#pragma once

#include <chrono>
#include <cstdint>
#include <vector>

#include "yotta/bytes.hpp"
#include "yotta/crypto.hpp"
#include "yotta/errors.hpp"
#include "yotta/group.hpp"
#include "yotta/hash.hpp"
#include "yotta/metrics.hpp"

namespace yotta {

struct KeyAgreementMismatch : Error {
    KeyAgreementMismatch() : Error("DH sides derived different keys") {}
};

struct PairCost {
    std::uint64_t group_exps = 0;
    std::uint64_t hash_calls = 0;
    std::uint64_t aead_ops = 0;
    double wall_ms = 0;
    bool delivered = false;
};

struct BaselineReport {
    std::uint64_t n_sellers = 0;
    std::uint64_t item_size = 0;
    std::vector<PairCost> sessions;
    double exchange_ms = 0;  // key agreements
    double verify_ms = 0;    // transfer, hash verification, decryption
    std::uint64_t group_exps = 0;
    std::uint64_t hash_calls = 0;
    std::uint64_t aead_ops = 0;

    double total_ms() const { return exchange_ms + verify_ms; }
};

// One interactive pairwise exchange: both parties agree on a session key
// (two exponentiations each), the seller ships the encrypted item, the
// buyer decrypts and checks the advertised hash. No aggregation; every pair
// is independent work on the buyer's critical path.
struct PairwiseSession {
    Scalar buyer_scalar;
    GroupElement buyer_public;
    Scalar seller_scalar;
    GroupElement seller_public;
    SymmetricKey session_key;
};

inline PairwiseSession run_key_agreement(const DhGroup& group, RunRng& rng) {
    auto [bs, bp] = group.keypair(rng);
    auto [ss, sp] = group.keypair(rng);
    GroupElement buyer_shared = dh_shared(group, bs, sp);
    GroupElement seller_shared = dh_shared(group, ss, bp);
    if (!(buyer_shared == seller_shared)) throw KeyAgreementMismatch();
    return {std::move(bs), std::move(bp), std::move(ss), std::move(sp),
            group.derive_key(buyer_shared)};
}

struct PairDelivery {
    Bytes data;
    PairCost cost;
};

inline PairDelivery run_pair(const DhGroup& group, RunRng& rng, const Bytes& item) {
    CostSnapshot before = CostSnapshot::take();
    auto t0 = std::chrono::steady_clock::now();

    PairwiseSession session = run_key_agreement(group, rng);
    Digest32 advertised = sha256(item);
    Ciphertext shipped = encrypt(session.session_key, item, rng);
    Bytes received = decrypt(session.session_key, shipped);
    bool ok = sha256(received) == advertised;

    auto t1 = std::chrono::steady_clock::now();
    CostSnapshot d = CostSnapshot::take().delta_since(before);

    PairDelivery out;
    out.cost.group_exps = d.group_exps;
    out.cost.hash_calls = d.hash_calls;
    out.cost.aead_ops = d.aead_ops;
    out.cost.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    out.cost.delivered = ok;
    if (ok) out.data = std::move(received);
    return out;
}

// n independent sessions, sequential on the measurement thread.
inline BaselineReport run_baseline(std::uint64_t n_sellers, std::uint64_t item_size,
                                   std::uint64_t seed) {
    if (n_sellers < 1) throw InvalidConfig("baseline needs n >= 1");
    if (item_size < 1) throw InvalidConfig("baseline needs item_size >= 1");

    DhGroup group;
    RunRng rng(seed);

    std::vector<Bytes> items(n_sellers);
    for (auto& item : items) {
        item.resize(item_size);
        rng.fill(item);
    }

    BaselineReport report;
    report.n_sellers = n_sellers;
    report.item_size = item_size;
    report.sessions.reserve(n_sellers);

    for (const Bytes& item : items) {
        // Phase split: agreement vs transfer-and-verify.
        CostSnapshot before = CostSnapshot::take();
        auto t0 = std::chrono::steady_clock::now();
        PairwiseSession session = run_key_agreement(group, rng);
        auto t1 = std::chrono::steady_clock::now();

        Digest32 advertised = sha256(item);
        Ciphertext shipped = encrypt(session.session_key, item, rng);
        Bytes received = decrypt(session.session_key, shipped);
        bool ok = sha256(received) == advertised && received == item;
        auto t2 = std::chrono::steady_clock::now();

        CostSnapshot d = CostSnapshot::take().delta_since(before);
        PairCost cost;
        cost.group_exps = d.group_exps;
        cost.hash_calls = d.hash_calls;
        cost.aead_ops = d.aead_ops;
        cost.wall_ms = std::chrono::duration<double, std::milli>(t2 - t0).count();
        cost.delivered = ok;
        report.sessions.push_back(cost);

        report.exchange_ms += std::chrono::duration<double, std::milli>(t1 - t0).count();
        report.verify_ms += std::chrono::duration<double, std::milli>(t2 - t1).count();
        report.group_exps += d.group_exps;
        report.hash_calls += d.hash_calls;
        report.aead_ops += d.aead_ops;
    }
    return report;
}

}  // namespace yotta
