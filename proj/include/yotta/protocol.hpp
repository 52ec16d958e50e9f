#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <future>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "yotta/content_store.hpp"
#include "yotta/crypto.hpp"
#include "yotta/errors.hpp"
#include "yotta/eval.hpp"
#include "yotta/ledger.hpp"
#include "yotta/metrics.hpp"
#include "yotta/proof.hpp"

namespace yotta {

enum class VerifyMode { Individual, Aggregated };

inline std::string to_string(VerifyMode m) {
    return m == VerifyMode::Individual ? "individual" : "aggregated";
}

inline VerifyMode verify_mode_from_string(const std::string& s) {
    if (s == "individual") return VerifyMode::Individual;
    if (s == "aggregated") return VerifyMode::Aggregated;
    throw InvalidConfig("unknown verify mode: " + s);
}

// The Step-1 bundle a seller publishes to one buyer. C_i travels off-ledger.
struct SellerOffer {
    std::string seller;
    KeyCommitment key_commitment;
    Ciphertext ciphertext;    // C_i = Encrypt(K_i, address_i)
    ContentHash content_hash; // names the stored ciphertext of the data
    Proof proof;
    std::string eval_id;
    std::uint64_t asking_price = 0;

    SellerStatement statement() const {
        return SellerStatement{key_commitment, ciphertext, content_hash, eval_id};
    }
};

// Offer plus the seller-private key; the key never leaves the seller until
// the on-ledger reveal.
struct PreparedOffer {
    SellerOffer offer;
    SymmetricKey key;
};

inline PreparedOffer seller_prepare(ContentStore& store, const Bytes& data,
                                    const std::string& eval_id, std::uint64_t price,
                                    RunRng& rng, const std::string& seller_name) {
    if (data.empty()) throw EmptyData();
    EvalFunction eval = builtin_eval(eval_id);  // throws UnknownEval

    SymmetricKey key;
    rng.fill(key.key_bytes);

    // The store holds the ciphertext of the data; its CID doubles as the
    // address the buyer later recovers from C_i.
    Bytes payload = encrypt(key, data, rng).serialize();
    ContentHash hash = store.put(payload);
    Bytes address = to_bytes(hash.text());
    Ciphertext c = encrypt(key, address, rng);

    SellerOffer offer;
    offer.seller = seller_name;
    offer.key_commitment = commit_key(key);
    offer.ciphertext = c;
    offer.content_hash = hash;
    offer.eval_id = eval_id;
    offer.asking_price = price;
    offer.proof = ProofSystem::prove(offer.statement(), SellerWitness{data, key, address}, eval);
    return {std::move(offer), key};
}

struct VerifyOutcome {
    std::vector<std::size_t> accepted;  // indices into the offer list
    std::vector<std::size_t> rejected;
    double wall_ms = 0;
    CostSnapshot ops;  // delta over the verification
    bool fallback_used = false;
};

inline VerifyOutcome buyer_verify_offers(const ProofSystem& prover,
                                         const std::vector<SellerOffer>& offers,
                                         VerifyMode mode) {
    VerifyOutcome out;
    if (offers.empty()) return out;

    CostSnapshot before = CostSnapshot::take();
    auto t0 = std::chrono::steady_clock::now();

    if (mode == VerifyMode::Individual) {
        for (std::size_t i = 0; i < offers.size(); ++i) {
            if (prover.verify(offers[i].statement(), offers[i].proof))
                out.accepted.push_back(i);
            else
                out.rejected.push_back(i);
        }
    } else {
        std::vector<std::pair<SellerStatement, Proof>> batch;
        std::vector<SellerStatement> stmts;
        batch.reserve(offers.size());
        stmts.reserve(offers.size());
        for (const auto& o : offers) {
            batch.emplace_back(o.statement(), o.proof);
            stmts.push_back(o.statement());
        }
        AggregateProof agg = ProofSystem::aggregate(batch);
        if (prover.verify_aggregate(stmts, agg)) {
            for (std::size_t i = 0; i < offers.size(); ++i) out.accepted.push_back(i);
        } else {
            // Failing batch: fall back to individual checks to find culprits.
            out.fallback_used = true;
            for (std::size_t i = 0; i < offers.size(); ++i) {
                if (prover.verify(offers[i].statement(), offers[i].proof))
                    out.accepted.push_back(i);
                else
                    out.rejected.push_back(i);
            }
        }
    }

    auto t1 = std::chrono::steady_clock::now();
    out.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    out.ops = CostSnapshot::take().delta_since(before);
    return out;
}

struct PurchaseOrder {
    std::string buyer;
    std::vector<SellerOffer> offers;     // accepted offers
    std::vector<std::uint64_t> amounts;  // per offer, >= asking_price
    std::uint64_t deadline_blocks = 10;
    LedgerMode mode = LedgerMode::CommitmentOnly;
};

inline std::uint64_t buyer_fund(Ledger& ledger, const PurchaseOrder& order) {
    if (order.offers.size() != order.amounts.size())
        throw InvalidConfig("order amounts do not match offers");
    std::vector<EscrowEntry> entries;
    entries.reserve(order.offers.size());
    for (std::size_t i = 0; i < order.offers.size(); ++i) {
        const SellerOffer& o = order.offers[i];
        if (order.amounts[i] < o.asking_price)
            throw InvalidConfig("amount below asking price for " + o.seller);
        EscrowEntry e;
        e.seller = o.seller;
        e.key_commitment = o.key_commitment;
        e.ciphertext_digest = o.ciphertext.digest();
        if (order.mode == LedgerMode::FullDecrypt) e.ciphertext = o.ciphertext;
        e.amount = order.amounts[i];
        entries.push_back(std::move(e));
    }
    return ledger.deploy_escrow(order.buyer, std::move(entries),
                                ledger.height() + order.deadline_blocks, order.mode);
}

inline SubmitResult seller_claim(Ledger& ledger, std::uint64_t contract_id,
                                 const std::string& seller, const SymmetricKey& key) {
    return ledger.submit_key(contract_id, seller, key);
}

enum class DeliveryStatus { Delivered, Refunded, IntegrityFailure };

struct DeliveryResult {
    std::string seller;
    DeliveryStatus status = DeliveryStatus::Refunded;
    Bytes data;         // plaintext on Delivered
    std::string stage;  // failing check on IntegrityFailure
};

namespace detail {

inline DeliveryResult finalize_one(const EscrowContract& contract, const ContentStore& store,
                                   const SellerOffer& offer) {
    DeliveryResult r;
    r.seller = offer.seller;
    const EscrowEntry* entry = contract.find(offer.seller);
    if (!entry || entry->status != EntryStatus::Paid) {
        r.status = DeliveryStatus::Refunded;
        return r;
    }
    auto fail = [&](const char* stage) {
        r.status = DeliveryStatus::IntegrityFailure;
        r.stage = stage;
        return r;
    };
    // 1. revealed key must match the commitment (auditable from the log)
    if (!entry->revealed_key || commit_key(*entry->revealed_key) != offer.key_commitment)
        return fail("reveal");
    const SymmetricKey& key = *entry->revealed_key;
    // 2. decrypt the privately held C_i to the address
    Bytes address;
    try {
        address = decrypt(key, offer.ciphertext);
    } catch (const AuthFailure&) {
        return fail("address");
    }
    if (address != to_bytes(offer.content_hash.text())) return fail("address");
    // 3. fetch by content hash and re-verify the hash
    Bytes payload;
    try {
        payload = store.get(offer.content_hash);
    } catch (const NotFound&) {
        return fail("fetch");
    }
    if (!ContentStore::verify(offer.content_hash, payload)) return fail("fetch");
    // 4. decrypt the payload
    try {
        r.data = decrypt(key, Ciphertext::deserialize(payload));
    } catch (const Error&) {
        return fail("decrypt");
    }
    // 5. re-check the evaluation predicate
    try {
        if (!builtin_eval(offer.eval_id).predicate(r.data)) return fail("eval");
    } catch (const UnknownEval&) {
        return fail("eval");
    }
    r.status = DeliveryStatus::Delivered;
    return r;
}

}  // namespace detail

// Step 5: for each Paid entry, recover the data and re-run every binding
// check. A failure here means a soundness hole upstream; it is reported,
// not swallowed. Per-offer work is independent and fans out over a small
// worker pool.
inline std::vector<DeliveryResult> buyer_finalize(const Ledger& ledger,
                                                  const ContentStore& store,
                                                  std::uint64_t contract_id,
                                                  const std::vector<SellerOffer>& offers) {
    const EscrowContract& contract = ledger.contract(contract_id);
    std::vector<DeliveryResult> results(offers.size());
    const std::size_t workers = std::min<std::size_t>(ProofSystem::kRecheckWorkers,
                                                      std::max<std::size_t>(offers.size(), 1));
    std::vector<std::future<void>> parts;
    parts.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        parts.push_back(std::async(std::launch::async, [&, w] {
            for (std::size_t i = w; i < offers.size(); i += workers)
                results[i] = detail::finalize_one(contract, store, offers[i]);
        }));
    }
    for (auto& part : parts) part.get();
    return results;
}

// ---------------------------------------------------------------------------
// Market orchestration
// ---------------------------------------------------------------------------

enum class SellerRole { Honest, WrongKey, FailingF, ProofReplay, StoreTamper, NonClaimer };

inline std::string to_string(SellerRole r) {
    switch (r) {
        case SellerRole::Honest: return "honest";
        case SellerRole::WrongKey: return "wrong-key";
        case SellerRole::FailingF: return "failing-f";
        case SellerRole::ProofReplay: return "proof-replay";
        case SellerRole::StoreTamper: return "store-tamper";
        case SellerRole::NonClaimer: return "non-claimer";
    }
    return "?";
}

struct AdversaryMix {
    std::uint32_t wrong_key = 0;
    std::uint32_t failing_f = 0;
    std::uint32_t proof_replay = 0;
    std::uint32_t store_tamper = 0;
    std::uint32_t non_claimer = 0;

    std::uint32_t total() const {
        return wrong_key + failing_f + proof_replay + store_tamper + non_claimer;
    }
};

struct MarketConfig {
    std::uint32_t buyers = 1;
    std::uint32_t sellers = 1;
    std::uint64_t seed = 0;
    std::string eval_id = "min-records:2";
    std::vector<std::string> buyer_evals;  // optional per-buyer override
    std::uint64_t price = 10;
    std::uint64_t deadline_blocks = 10;
    LedgerMode mode = LedgerMode::CommitmentOnly;
    VerifyMode verify = VerifyMode::Aggregated;
    AdversaryMix adversaries;
    std::uint32_t non_funding_buyers = 0;
    std::uint64_t data_records = 8;

    std::string eval_for_buyer(std::uint32_t b) const {
        if (b < buyer_evals.size() && !buyer_evals[b].empty()) return buyer_evals[b];
        return eval_id;
    }

    void validate() const {
        if (buyers < 1) throw InvalidConfig("buyers must be >= 1");
        if (sellers < 1) throw InvalidConfig("sellers must be >= 1");
        if (price < 1) throw InvalidConfig("price must be >= 1");
        if (deadline_blocks < 1) throw InvalidConfig("deadline_blocks must be >= 1");
        if (data_records < 1) throw InvalidConfig("data_records must be >= 1");
        if (adversaries.total() > sellers)
            throw InvalidConfig("adversary counts exceed seller count");
        if (adversaries.proof_replay > 0 && adversaries.total() >= sellers)
            throw InvalidConfig("proof-replay adversary needs at least one honest seller");
        if (non_funding_buyers > buyers)
            throw InvalidConfig("non_funding_buyers exceeds buyer count");
        for (std::uint32_t b = 0; b < buyers; ++b)
            if (!is_known_eval(eval_for_buyer(b)))
                throw InvalidConfig("unknown eval: " + eval_for_buyer(b));
    }

    // Deterministic role assignment: adversaries occupy the low indices.
    SellerRole role_of(std::uint32_t seller_index) const {
        std::uint32_t i = seller_index;
        if (i < adversaries.wrong_key) return SellerRole::WrongKey;
        i -= adversaries.wrong_key;
        if (i < adversaries.failing_f) return SellerRole::FailingF;
        i -= adversaries.failing_f;
        if (i < adversaries.proof_replay) return SellerRole::ProofReplay;
        i -= adversaries.proof_replay;
        if (i < adversaries.store_tamper) return SellerRole::StoreTamper;
        i -= adversaries.store_tamper;
        if (i < adversaries.non_claimer) return SellerRole::NonClaimer;
        return SellerRole::Honest;
    }
};

enum class OfferOutcome { Delivered, Refunded, RejectedAtVerification };

inline std::string to_string(OfferOutcome o) {
    switch (o) {
        case OfferOutcome::Delivered: return "delivered";
        case OfferOutcome::Refunded: return "refunded";
        case OfferOutcome::RejectedAtVerification: return "rejected-at-verification";
    }
    return "?";
}

struct OfferRecord {
    std::string buyer;
    std::string seller;
    SellerRole role = SellerRole::Honest;
    OfferOutcome outcome = OfferOutcome::Refunded;
    std::string detail;
};

struct PhaseTimings {
    double prepare_ms = 0;
    double verify_ms = 0;
    double settle_ms = 0;
    double finalize_ms = 0;
};

struct MarketReport {
    std::vector<OfferRecord> outcomes;
    std::uint64_t delivered = 0;
    std::uint64_t refunded = 0;
    std::uint64_t rejected = 0;
    PhaseTimings timings;
    CostSnapshot ops;
    bool fair_exchange_ok = true;
    std::string violation;  // first detected violation, when any
    std::string ledger_log;
    std::uint64_t genesis_total = 0;
    std::uint64_t final_total = 0;
};

namespace detail {

// Synthetic CSV dataset, 3 f64 columns, col0 in [0, 10). Satisfies the
// reference predicates under their default parameterizations.
inline Bytes make_dataset(RunRng& rng, std::uint64_t records) {
    std::string out;
    for (std::uint64_t r = 0; r < records; ++r) {
        for (int c = 0; c < 3; ++c) {
            if (c) out.push_back(',');
            out += std::to_string(rng.next_below(10));
            out.push_back('.');
            out += std::to_string(rng.next_below(10));
        }
        out.push_back('\n');
    }
    return to_bytes(out);
}

// One malformed record: fails the record-count, schema, and mean predicates.
inline Bytes failing_dataset() { return to_bytes("not,a valid record\n"); }

class StopwatchMs {
public:
    StopwatchMs() : t0_(std::chrono::steady_clock::now()) {}
    double elapsed() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0_)
            .count();
    }

private:
    std::chrono::steady_clock::time_point t0_;
};

}  // namespace detail

inline MarketReport run_market(const MarketConfig& config, ContentStore& store) {
    config.validate();
    RunRng rng(config.seed);

    std::map<std::string, std::uint64_t> genesis;
    for (std::uint32_t b = 0; b < config.buyers; ++b)
        genesis["buyer" + std::to_string(b)] =
            static_cast<std::uint64_t>(config.sellers) * config.price;
    Ledger ledger(genesis);

    MarketReport report;
    report.genesis_total = ledger.genesis_total();
    CostSnapshot run_start = CostSnapshot::take();

    for (std::uint32_t b = 0; b < config.buyers; ++b) {
        const std::string buyer = "buyer" + std::to_string(b);
        const std::string eval_id = config.eval_for_buyer(b);
        const bool funds = b >= config.non_funding_buyers;  // low indices skip funding

        // Step 1: per-buyer offers, fresh key per (seller, buyer).
        detail::StopwatchMs prep_clock;
        std::vector<PreparedOffer> prepared;
        std::vector<SellerRole> roles;
        std::optional<std::size_t> replay_victim;
        for (std::uint32_t s = 0; s < config.sellers; ++s) {
            SellerRole role = config.role_of(s);
            const std::string name = "seller" + std::to_string(s);
            Bytes data = role == SellerRole::FailingF ? detail::failing_dataset()
                                                      : detail::make_dataset(rng, config.data_records);
            if (role == SellerRole::ProofReplay) {
                // Placeholder; filled in below once a victim offer exists.
                prepared.push_back({});
                prepared.back().offer.seller = name;
            } else {
                prepared.push_back(
                    seller_prepare(store, data, eval_id, config.price, rng, name));
                if (role == SellerRole::StoreTamper) {
                    // Swap the stored bytes after proving, before verification.
                    Bytes tampered = store.get(prepared.back().offer.content_hash);
                    tampered[0] ^= 0x01;
                    store.tamper_with(prepared.back().offer.content_hash, std::move(tampered));
                }
                if (role == SellerRole::Honest && !replay_victim) replay_victim = prepared.size() - 1;
            }
            roles.push_back(role);
        }
        for (std::size_t i = 0; i < prepared.size(); ++i) {
            if (roles[i] != SellerRole::ProofReplay) continue;
            // Copies the victim's published bundle verbatim; the replayer
            // never learns the victim's key.
            PreparedOffer copy;
            copy.offer = prepared[*replay_victim].offer;
            copy.offer.seller = "seller" + std::to_string(i);
            prepared[i] = std::move(copy);
        }
        report.timings.prepare_ms += prep_clock.elapsed();

        std::vector<SellerOffer> offers;
        offers.reserve(prepared.size());
        for (const auto& p : prepared) offers.push_back(p.offer);

        // Step 2
        ProofSystem prover(store);
        VerifyOutcome vo = buyer_verify_offers(prover, offers, config.verify);
        report.timings.verify_ms += vo.wall_ms;

        std::vector<OfferRecord> records(offers.size());
        for (std::size_t i = 0; i < offers.size(); ++i) {
            records[i].buyer = buyer;
            records[i].seller = offers[i].seller;
            records[i].role = roles[i];
        }
        for (std::size_t i : vo.rejected) {
            records[i].outcome = OfferOutcome::RejectedAtVerification;
            records[i].detail = "proof rejected";
        }

        if (!funds || vo.accepted.empty()) {
            for (std::size_t i : vo.accepted) {
                records[i].outcome = OfferOutcome::Refunded;
                records[i].detail = funds ? "nothing accepted" : "buyer never funded";
            }
            for (auto& r : records) report.outcomes.push_back(std::move(r));
            continue;
        }

        // Step 3
        detail::StopwatchMs settle_clock;
        PurchaseOrder order;
        order.buyer = buyer;
        order.deadline_blocks = config.deadline_blocks;
        order.mode = config.mode;
        for (std::size_t i : vo.accepted) {
            order.offers.push_back(offers[i]);
            order.amounts.push_back(offers[i].asking_price);
        }
        std::uint64_t contract_id = buyer_fund(ledger, order);

        // Step 4
        for (std::size_t i : vo.accepted) {
            SellerRole role = roles[i];
            if (role == SellerRole::NonClaimer || role == SellerRole::ProofReplay) continue;
            SymmetricKey key = prepared[i].key;
            if (role == SellerRole::WrongKey) rng.fill(key.key_bytes);
            seller_claim(ledger, contract_id, offers[i].seller, key);
        }
        ledger.advance_blocks(config.deadline_blocks + 1);
        ledger.refund_expired(contract_id);
        report.timings.settle_ms += settle_clock.elapsed();

        // Step 5
        detail::StopwatchMs fin_clock;
        std::vector<DeliveryResult> deliveries =
            buyer_finalize(ledger, store, contract_id, order.offers);
        report.timings.finalize_ms += fin_clock.elapsed();

        for (std::size_t k = 0; k < vo.accepted.size(); ++k) {
            OfferRecord& rec = records[vo.accepted[k]];
            const DeliveryResult& d = deliveries[k];
            switch (d.status) {
                case DeliveryStatus::Delivered:
                    rec.outcome = OfferOutcome::Delivered;
                    break;
                case DeliveryStatus::Refunded:
                    rec.outcome = OfferOutcome::Refunded;
                    rec.detail = "not claimed or claim rejected";
                    break;
                case DeliveryStatus::IntegrityFailure:
                    rec.outcome = OfferOutcome::Refunded;
                    rec.detail = "integrity failure at " + d.stage;
                    if (report.fair_exchange_ok) {
                        report.fair_exchange_ok = false;
                        report.violation = buyer + "/" + rec.seller +
                                           ": paid without delivery (stage " + d.stage + ")";
                    }
                    break;
            }
            // Paid-but-undelivered and delivered-but-unpaid are both fatal.
            const EscrowEntry* entry = ledger.contract(contract_id).find(rec.seller);
            bool paid = entry && entry->status == EntryStatus::Paid;
            bool delivered = d.status == DeliveryStatus::Delivered;
            if (paid != delivered && report.fair_exchange_ok) {
                report.fair_exchange_ok = false;
                report.violation = buyer + "/" + rec.seller + ": paid=" +
                                   (paid ? "yes" : "no") + " delivered=" +
                                   (delivered ? "yes" : "no");
            }
        }
        for (auto& r : records) report.outcomes.push_back(std::move(r));
    }

    for (const auto& r : report.outcomes) {
        switch (r.outcome) {
            case OfferOutcome::Delivered: report.delivered += 1; break;
            case OfferOutcome::Refunded: report.refunded += 1; break;
            case OfferOutcome::RejectedAtVerification: report.rejected += 1; break;
        }
    }
    report.ops = CostSnapshot::take().delta_since(run_start);
    report.ledger_log = ledger.serialize_log();
    report.final_total = [&] {
        std::uint64_t t = ledger.state().escrowed_total();
        for (const auto& [acct, bal] : ledger.state().balances) t += bal;
        return t;
    }();
    if (report.final_total != report.genesis_total && report.fair_exchange_ok) {
        report.fair_exchange_ok = false;
        report.violation = "token conservation broken";
    }
    return report;
}

inline MarketReport run_market(const MarketConfig& config) {
    ContentStore store;
    return run_market(config, store);
}

}  // namespace yotta
