#pragma once

#include <algorithm>
#include <cstdint>
#include <future>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "yotta/bytes.hpp"
#include "yotta/content_store.hpp"
#include "yotta/crypto.hpp"
#include "yotta/errors.hpp"
#include "yotta/eval.hpp"
#include "yotta/hash.hpp"
#include "yotta/metrics.hpp"

namespace yotta {

// Public statement behind a seller proof: no secret material.
struct SellerStatement {
    KeyCommitment key_commitment;
    Ciphertext ciphertext;  // C_i, encryption of the address under the seller key
    ContentHash content_hash;
    std::string eval_id;

    Digest32 digest() const {
        Bytes enc = to_bytes("yotta/stmt/v1");
        append_bytes(enc, key_commitment.digest.bytes);
        Bytes ct = ciphertext.serialize();
        append_u64le(enc, ct.size());
        append_bytes(enc, ct);
        append_bytes(enc, content_hash.digest.bytes);
        append_u64le(enc, eval_id.size());
        append_bytes(enc, to_bytes(eval_id));
        return sha256(enc);
    }
};

struct SellerWitness {
    Bytes data;        // plaintext dataset
    SymmetricKey key;  // encryption key
    Bytes address;     // textual CID of the stored ciphertext
};

inline constexpr std::uint8_t kRecheckBackendId = 1;
inline constexpr char kProofMagic[4] = {'Y', 'P', 'F', '1'};
inline constexpr char kAggregateMagic[4] = {'Y', 'P', 'A', '1'};

struct Proof {
    std::uint8_t backend_id = kRecheckBackendId;
    Bytes attestation;

    std::size_t size_bytes() const { return attestation.size(); }

    Bytes serialize() const {
        Bytes out(kProofMagic, kProofMagic + 4);
        out.push_back(backend_id);
        append_u64le(out, attestation.size());
        append_bytes(out, attestation);
        return out;
    }

    static Proof deserialize(std::span<const std::uint8_t> raw) {
        if (raw.size() < 13) throw MalformedProof("truncated envelope");
        if (!std::equal(kProofMagic, kProofMagic + 4, raw.begin()))
            throw MalformedProof("bad magic");
        Proof p;
        p.backend_id = raw[4];
        std::uint64_t len = 0;
        for (int i = 0; i < 8; ++i) len |= static_cast<std::uint64_t>(raw[5 + i]) << (8 * i);
        if (raw.size() != 13 + len) throw MalformedProof("length mismatch");
        p.attestation.assign(raw.begin() + 13, raw.end());
        return p;
    }
};

struct AggregateProof {
    std::uint8_t backend_id = kRecheckBackendId;
    Bytes attestation;
    std::uint64_t count = 0;

    Bytes serialize() const {
        Bytes out(kAggregateMagic, kAggregateMagic + 4);
        out.push_back(backend_id);
        append_u64le(out, count);
        append_u64le(out, attestation.size());
        append_bytes(out, attestation);
        return out;
    }
};

// Reference "commit-and-recheck" backend. The attestation seals the witness
// key and address to the statement; verification re-executes the statement
// conjunction against the verifier's content store. Complete and sound, not
// zero-knowledge; the interface admits a real SNARK backend.
//
// Attestation layout (constant 140 bytes, independent of dataset size):
//   stmt_digest (32) || key (32) || address_len u64 || address (68)
class ProofSystem {
public:
    explicit ProofSystem(const ContentStore& store) : store_(&store) {}

    static Proof prove(const SellerStatement& stmt, const SellerWitness& wit,
                       const EvalFunction& /*eval*/) {
        // The reference backend does not need the predicate at prove time;
        // a false statement simply yields a proof that fails verification.
        Proof p;
        p.backend_id = kRecheckBackendId;
        append_bytes(p.attestation, stmt.digest().bytes);
        append_bytes(p.attestation, wit.key.key_bytes);
        append_u64le(p.attestation, wit.address.size());
        append_bytes(p.attestation, wit.address);
        return p;
    }

    bool verify(const SellerStatement& stmt, const Proof& proof) const {
        meter().verify_calls += 1;
        return verify_inner(stmt, proof);
    }

    static AggregateProof aggregate(
        const std::vector<std::pair<SellerStatement, Proof>>& proofs) {
        if (proofs.empty()) throw EmptyBatch();
        std::uint8_t backend = proofs.front().second.backend_id;
        AggregateProof agg;
        agg.backend_id = backend;
        agg.count = proofs.size();

        Digest32 chain{};  // zero-initialized transcript seed
        Bytes body;
        for (const auto& [stmt, proof] : proofs) {
            if (proof.backend_id != backend) throw MixedBackends();
            chain = Sha256Stream()
                        .update(chain.bytes)
                        .update(stmt.digest().bytes)
                        .update(proof.attestation)
                        .finish();
            append_u64le(body, proof.attestation.size());
            append_bytes(body, proof.attestation);
        }
        append_bytes(agg.attestation, chain.bytes);
        append_bytes(agg.attestation, body);
        return agg;
    }

    // Single-call batch verification: one transcript pass re-derives the
    // chain digest, then the constituent rechecks fan out over a small
    // fixed worker pool.
    bool verify_aggregate(const std::vector<SellerStatement>& stmts,
                          const AggregateProof& agg) const {
        meter().verify_calls += 1;
        if (stmts.size() != agg.count) throw CountMismatch();
        if (agg.attestation.size() < 32) throw MalformedProof("aggregate too short");

        Digest32 stored_chain;
        std::copy_n(agg.attestation.begin(), 32, stored_chain.bytes.begin());

        std::span<const std::uint8_t> body(agg.attestation.data() + 32,
                                           agg.attestation.size() - 32);
        std::vector<Proof> constituents;
        constituents.reserve(stmts.size());
        Digest32 chain{};
        for (const auto& stmt : stmts) {
            if (body.size() < 8) throw MalformedProof("aggregate body truncated");
            std::uint64_t len = 0;
            for (int i = 0; i < 8; ++i) len |= static_cast<std::uint64_t>(body[i]) << (8 * i);
            body = body.subspan(8);
            if (body.size() < len) throw MalformedProof("aggregate body truncated");
            constituents.push_back(
                {agg.backend_id,
                 Bytes(body.begin(), body.begin() + static_cast<std::ptrdiff_t>(len))});
            body = body.subspan(len);

            chain = Sha256Stream()
                        .update(chain.bytes)
                        .update(stmt.digest().bytes)
                        .update(constituents.back().attestation)
                        .finish();
        }
        if (!body.empty()) throw MalformedProof("trailing bytes in aggregate");
        if (chain != stored_chain) return false;

        const std::size_t workers =
            std::min<std::size_t>(kRecheckWorkers, constituents.size());
        std::vector<std::future<bool>> parts;
        parts.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            parts.push_back(std::async(std::launch::async, [&, w] {
                bool ok = true;
                for (std::size_t i = w; i < constituents.size(); i += workers)
                    if (!verify_inner(stmts[i], constituents[i])) ok = false;
                return ok;
            }));
        }
        bool all_ok = true;
        for (auto& part : parts)
            if (!part.get()) all_ok = false;
        return all_ok;
    }

    // Batch verification pays the pool spin-up once, so the fixed cost
    // amortizes as batches grow.
    static constexpr std::size_t kRecheckWorkers = 4;

private:
    bool verify_inner(const SellerStatement& stmt, const Proof& proof) const {
        if (proof.backend_id != kRecheckBackendId)
            throw MalformedProof("unknown backend id");
        const Bytes& att = proof.attestation;
        if (att.size() < 32 + 32 + 8) throw MalformedProof("attestation too short");

        Digest32 bound_stmt;
        std::copy_n(att.begin(), 32, bound_stmt.bytes.begin());
        SymmetricKey key;
        std::copy_n(att.begin() + 32, 32, key.key_bytes.begin());
        std::uint64_t addr_len = 0;
        for (int i = 0; i < 8; ++i) addr_len |= static_cast<std::uint64_t>(att[64 + i]) << (8 * i);
        if (att.size() != 72 + addr_len) throw MalformedProof("attestation length mismatch");
        Bytes address(att.begin() + 72, att.end());

        // Statement binding: replay against a different statement fails here.
        if (bound_stmt != stmt.digest()) return false;
        if (commit_key(key) != stmt.key_commitment) return false;

        // C_i must decrypt under the key to the claimed address, which must
        // name the stored ciphertext.
        try {
            if (decrypt(key, stmt.ciphertext) != address) return false;
        } catch (const AuthFailure&) {
            return false;
        }
        if (address != to_bytes(stmt.content_hash.text())) return false;

        // The stored object must exist, match its hash, decrypt under the
        // key, and satisfy the evaluation predicate.
        Bytes payload;
        try {
            payload = store_->get(stmt.content_hash);
        } catch (const NotFound&) {
            return false;
        }
        if (!ContentStore::verify(stmt.content_hash, payload)) return false;
        Bytes data;
        try {
            data = decrypt(key, Ciphertext::deserialize(payload));
        } catch (const Error&) {
            return false;
        }
        try {
            return builtin_eval(stmt.eval_id).predicate(data);
        } catch (const UnknownEval&) {
            return false;
        }
    }

    const ContentStore* store_;
};

}  // namespace yotta
