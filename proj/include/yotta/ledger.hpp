#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "yotta/bytes.hpp"
#include "yotta/crypto.hpp"
#include "yotta/errors.hpp"
#include "yotta/hash.hpp"

namespace yotta {

using Json = nlohmann::ordered_json;

enum class LedgerMode { CommitmentOnly, FullDecrypt };

inline std::string to_string(LedgerMode m) {
    return m == LedgerMode::CommitmentOnly ? "commitment-only" : "full-decrypt";
}

inline LedgerMode ledger_mode_from_string(const std::string& s) {
    if (s == "commitment-only") return LedgerMode::CommitmentOnly;
    if (s == "full-decrypt") return LedgerMode::FullDecrypt;
    throw InvalidConfig("unknown ledger mode: " + s);
}

enum class EntryStatus { Funded, Paid, Refunded };

inline std::string to_string(EntryStatus s) {
    switch (s) {
        case EntryStatus::Funded: return "funded";
        case EntryStatus::Paid: return "paid";
        case EntryStatus::Refunded: return "refunded";
    }
    return "?";
}

struct EscrowEntry {
    std::string seller;
    KeyCommitment key_commitment;
    Digest32 ciphertext_digest;            // binds C_i without publishing it
    std::optional<Ciphertext> ciphertext;  // present in FullDecrypt mode
    std::uint64_t amount = 0;
    EntryStatus status = EntryStatus::Funded;
    std::optional<SymmetricKey> revealed_key;
};

struct EscrowContract {
    std::uint64_t id = 0;
    std::string buyer;
    std::vector<EscrowEntry> entries;
    std::uint64_t deadline = 0;  // inclusive: submissions accepted while height <= deadline
    LedgerMode mode = LedgerMode::CommitmentOnly;

    std::uint64_t escrowed_total() const {
        std::uint64_t t = 0;
        for (const auto& e : entries)
            if (e.status == EntryStatus::Funded) t += e.amount;
        return t;
    }

    const EscrowEntry* find(const std::string& seller) const {
        for (const auto& e : entries)
            if (e.seller == seller) return &e;
        return nullptr;
    }
};

struct SubmitResult {
    bool paid = false;
    std::uint64_t amount = 0;
    std::string reason;  // set when rejected
};

struct LedgerState {
    std::map<std::string, std::uint64_t> balances;
    std::uint64_t height = 0;
    std::map<std::uint64_t, EscrowContract> contracts;

    std::uint64_t escrowed_total() const {
        std::uint64_t t = 0;
        for (const auto& [id, c] : contracts) t += c.escrowed_total();
        return t;
    }

    Digest32 digest() const {
        Sha256Stream h;
        h.update(to_bytes("yotta/state/v1"));
        h.update_u64(height);
        h.update_u64(balances.size());
        for (const auto& [acct, bal] : balances) {
            h.update_u64(acct.size());
            h.update(to_bytes(acct));
            h.update_u64(bal);
        }
        h.update_u64(contracts.size());
        for (const auto& [id, c] : contracts) {
            h.update_u64(id);
            h.update_u64(c.buyer.size());
            h.update(to_bytes(c.buyer));
            h.update_u64(c.deadline);
            h.update_u64(c.mode == LedgerMode::CommitmentOnly ? 0 : 1);
            h.update_u64(c.entries.size());
            for (const auto& e : c.entries) {
                h.update_u64(e.seller.size());
                h.update(to_bytes(e.seller));
                h.update(e.key_commitment.digest.bytes);
                h.update(e.ciphertext_digest.bytes);
                if (e.ciphertext) {
                    Bytes ct = e.ciphertext->serialize();
                    h.update_u64(ct.size());
                    h.update(ct);
                } else {
                    h.update_u64(0);
                }
                h.update_u64(e.amount);
                h.update_u64(static_cast<std::uint64_t>(e.status));
                h.update_u64(e.revealed_key ? 1 : 0);
                if (e.revealed_key) h.update(e.revealed_key->key_bytes);
            }
        }
        return h.finish();
    }
};

// Deterministic simulated chain: balances, block height, escrow contracts,
// and an append-only transaction log whose replay reproduces the state
// bit for bit. Single writer; every mutation re-checks token conservation.
class Ledger {
public:
    explicit Ledger(std::map<std::string, std::uint64_t> genesis_balances) {
        state_.balances = std::move(genesis_balances);
        for (const auto& [acct, bal] : state_.balances) genesis_total_ += bal;
        Json payload;
        Json balances = Json::object();
        for (const auto& [acct, bal] : state_.balances) balances[acct] = bal;
        payload["balances"] = std::move(balances);
        append_record("genesis", std::move(payload));
    }

    const LedgerState& state() const { return state_; }
    std::uint64_t height() const { return state_.height; }
    std::uint64_t genesis_total() const { return genesis_total_; }

    std::uint64_t balance(const std::string& acct) const {
        auto it = state_.balances.find(acct);
        return it == state_.balances.end() ? 0 : it->second;
    }

    const EscrowContract& contract(std::uint64_t id) const {
        auto it = state_.contracts.find(id);
        if (it == state_.contracts.end()) throw UnknownContract();
        return it->second;
    }

    std::uint64_t advance_blocks(std::uint64_t n) {
        std::scoped_lock lk(mu_);
        if (n < 1) throw Error("advance_blocks needs n >= 1");
        state_.height += n;
        append_record("advance", Json{{"n", n}});
        return state_.height;
    }

    std::uint64_t deploy_escrow(const std::string& buyer, std::vector<EscrowEntry> entries,
                                std::uint64_t deadline, LedgerMode mode) {
        std::scoped_lock lk(mu_);
        std::uint64_t id = next_contract_id_;
        apply_deploy(id, buyer, entries, deadline, mode);
        next_contract_id_ += 1;

        Json payload;
        payload["id"] = id;
        payload["buyer"] = buyer;
        payload["deadline"] = deadline;
        payload["mode"] = to_string(mode);
        Json jentries = Json::array();
        for (const auto& e : entries) {
            Json je;
            je["seller"] = e.seller;
            je["commitment"] = e.key_commitment.digest.hex();
            je["ct_digest"] = e.ciphertext_digest.hex();
            if (e.ciphertext) je["ciphertext"] = hex_encode(e.ciphertext->serialize());
            je["amount"] = e.amount;
            jentries.push_back(std::move(je));
        }
        payload["entries"] = std::move(jentries);
        append_record("deploy", std::move(payload));
        return id;
    }

    SubmitResult submit_key(std::uint64_t contract_id, const std::string& seller,
                            const SymmetricKey& key) {
        std::scoped_lock lk(mu_);
        SubmitResult r = apply_submit(contract_id, seller, key);
        Json payload;
        payload["contract"] = contract_id;
        payload["seller"] = seller;
        payload["key"] = hex_encode(key.key_bytes);  // revealed on-chain
        payload["paid"] = r.paid;
        payload["amount"] = r.amount;
        payload["reason"] = r.reason;
        append_record("submit_key", std::move(payload));
        return r;
    }

    std::uint64_t refund_expired(std::uint64_t contract_id) {
        std::scoped_lock lk(mu_);
        std::vector<std::pair<std::string, std::uint64_t>> refunds;
        std::uint64_t total = apply_refund(contract_id, refunds);
        Json payload;
        payload["contract"] = contract_id;
        Json jr = Json::array();
        for (const auto& [seller, amount] : refunds)
            jr.push_back(Json{{"seller", seller}, {"amount", amount}});
        payload["refunded"] = std::move(jr);
        payload["total"] = total;
        append_record("refund", std::move(payload));
        return total;
    }

    // Newline-delimited records, one JSON object per transaction.
    std::string serialize_log() const {
        std::ostringstream out;
        for (const auto& rec : log_) out << rec.dump() << '\n';
        return out.str();
    }

    const std::vector<Json>& log() const { return log_; }

    // Rebuilds state from a serialized log, cross-checking every recorded
    // outcome, state digest, and the conservation invariant.
    static LedgerState replay(const std::string& serialized_log) {
        std::istringstream in(serialized_log);
        std::string line;
        std::size_t index = 0;
        std::optional<Ledger> ledger;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            Json rec;
            try {
                rec = Json::parse(line);
            } catch (const Json::exception& e) {
                throw CorruptLog(index, e.what());
            }
            try {
                replay_record(ledger, rec, index);
            } catch (const CorruptLog&) {
                throw;
            } catch (const std::exception& e) {
                throw CorruptLog(index, e.what());
            }
            index += 1;
        }
        if (!ledger) throw CorruptLog(0, "log has no genesis record");
        return ledger->state_;
    }

private:
    void apply_deploy(std::uint64_t id, const std::string& buyer,
                      std::vector<EscrowEntry>& entries, std::uint64_t deadline,
                      LedgerMode mode) {
        if (entries.empty()) throw EmptyEntries();
        if (deadline <= state_.height) throw PastDeadline();
        std::uint64_t total = 0;
        for (auto& e : entries) {
            if (e.amount < 1) throw Error("entry amount must be >= 1");
            if (mode == LedgerMode::CommitmentOnly) e.ciphertext.reset();
            e.status = EntryStatus::Funded;
            e.revealed_key.reset();
            total += e.amount;
        }
        auto it = state_.balances.find(buyer);
        if (it == state_.balances.end() || it->second < total) throw InsufficientFunds();
        it->second -= total;

        EscrowContract c;
        c.id = id;
        c.buyer = buyer;
        c.entries = entries;
        c.deadline = deadline;
        c.mode = mode;
        state_.contracts.emplace(id, std::move(c));
    }

    SubmitResult apply_submit(std::uint64_t contract_id, const std::string& seller,
                              const SymmetricKey& key) {
        auto it = state_.contracts.find(contract_id);
        if (it == state_.contracts.end()) throw UnknownContract();
        EscrowContract& c = it->second;
        EscrowEntry* entry = nullptr;
        for (auto& e : c.entries)
            if (e.seller == seller) entry = &e;
        if (!entry) throw UnknownSeller();
        if (entry->status != EntryStatus::Funded) throw AlreadySettled();
        if (state_.height > c.deadline) throw DeadlinePassed();

        if (commit_key(key) != entry->key_commitment)
            return {false, 0, "commitment mismatch"};
        if (c.mode == LedgerMode::FullDecrypt) {
            if (!entry->ciphertext) return {false, 0, "missing ciphertext"};
            if (!decrypts_ok(key, *entry->ciphertext)) return {false, 0, "decryption failed"};
        }
        entry->status = EntryStatus::Paid;
        entry->revealed_key = key;
        state_.balances[seller] += entry->amount;
        return {true, entry->amount, ""};
    }

    std::uint64_t apply_refund(std::uint64_t contract_id,
                               std::vector<std::pair<std::string, std::uint64_t>>& refunds) {
        auto it = state_.contracts.find(contract_id);
        if (it == state_.contracts.end()) throw UnknownContract();
        EscrowContract& c = it->second;
        if (state_.height <= c.deadline) throw DeadlineNotReached();
        std::uint64_t total = 0;
        for (auto& e : c.entries) {
            if (e.status != EntryStatus::Funded) continue;
            e.status = EntryStatus::Refunded;
            refunds.emplace_back(e.seller, e.amount);
            total += e.amount;
        }
        state_.balances[c.buyer] += total;
        return total;
    }

    void append_record(const std::string& kind, Json payload) {
        check_conservation();
        Json rec;
        rec["index"] = log_.size();
        rec["height"] = state_.height;
        rec["kind"] = kind;
        rec["payload"] = std::move(payload);
        rec["state_digest"] = state_.digest().hex();
        log_.push_back(std::move(rec));
    }

    void check_conservation() const {
        std::uint64_t total = state_.escrowed_total();
        for (const auto& [acct, bal] : state_.balances) total += bal;
        if (total != genesis_total_)
            throw Error("token conservation violated: " + std::to_string(total) + " vs " +
                        std::to_string(genesis_total_));
    }

    static void replay_record(std::optional<Ledger>& ledger, const Json& rec,
                              std::size_t index) {
        if (rec.at("index").get<std::uint64_t>() != index)
            throw CorruptLog(index, "record index out of order");
        const std::string kind = rec.at("kind").get<std::string>();
        const Json& payload = rec.at("payload");

        if (kind == "genesis") {
            if (ledger) throw CorruptLog(index, "duplicate genesis");
            std::map<std::string, std::uint64_t> balances;
            for (const auto& [acct, bal] : payload.at("balances").items())
                balances[acct] = bal.get<std::uint64_t>();
            ledger.emplace(std::move(balances));
        } else if (!ledger) {
            throw CorruptLog(index, "record before genesis");
        } else if (kind == "advance") {
            ledger->state_.height += payload.at("n").get<std::uint64_t>();
        } else if (kind == "deploy") {
            std::vector<EscrowEntry> entries;
            for (const auto& je : payload.at("entries")) {
                EscrowEntry e;
                e.seller = je.at("seller").get<std::string>();
                e.key_commitment = KeyCommitment{Digest32::from_hex(je.at("commitment").get<std::string>())};
                e.ciphertext_digest = Digest32::from_hex(je.at("ct_digest").get<std::string>());
                if (je.contains("ciphertext"))
                    e.ciphertext = Ciphertext::deserialize(hex_decode(je.at("ciphertext").get<std::string>()));
                e.amount = je.at("amount").get<std::uint64_t>();
                entries.push_back(std::move(e));
            }
            std::uint64_t id = payload.at("id").get<std::uint64_t>();
            if (id != ledger->next_contract_id_) throw CorruptLog(index, "contract id skew");
            ledger->apply_deploy(id, payload.at("buyer").get<std::string>(), entries,
                                 payload.at("deadline").get<std::uint64_t>(),
                                 ledger_mode_from_string(payload.at("mode").get<std::string>()));
            ledger->next_contract_id_ += 1;
        } else if (kind == "submit_key") {
            SymmetricKey key;
            Bytes raw = hex_decode(payload.at("key").get<std::string>());
            if (raw.size() != 32) throw CorruptLog(index, "bad key length");
            std::copy(raw.begin(), raw.end(), key.key_bytes.begin());
            SubmitResult r = ledger->apply_submit(payload.at("contract").get<std::uint64_t>(),
                                                  payload.at("seller").get<std::string>(), key);
            if (r.paid != payload.at("paid").get<bool>() ||
                r.amount != payload.at("amount").get<std::uint64_t>())
                throw CorruptLog(index, "recorded settlement outcome diverges from replay");
        } else if (kind == "refund") {
            std::vector<std::pair<std::string, std::uint64_t>> refunds;
            std::uint64_t total =
                ledger->apply_refund(payload.at("contract").get<std::uint64_t>(), refunds);
            if (total != payload.at("total").get<std::uint64_t>())
                throw CorruptLog(index, "recorded refund total diverges from replay");
        } else {
            throw CorruptLog(index, "unknown record kind: " + kind);
        }

        ledger->check_conservation();
        if (rec.at("height").get<std::uint64_t>() != ledger->state_.height)
            throw CorruptLog(index, "recorded height diverges from replay");
        if (rec.at("state_digest").get<std::string>() != ledger->state_.digest().hex())
            throw CorruptLog(index, "state digest diverges from replay");
    }

    mutable std::mutex mu_;
    LedgerState state_;
    std::uint64_t genesis_total_ = 0;
    std::uint64_t next_contract_id_ = 1;
    std::vector<Json> log_;
};

}  // namespace yotta
