#include <catch2/catch_amalgamated.hpp>

#include "yotta/ledger.hpp"

using namespace yotta;

namespace {

EscrowEntry entry_for(const std::string& seller, const SymmetricKey& key, std::uint64_t amount,
                      RunRng& rng, std::optional<Ciphertext> ct = std::nullopt) {
    EscrowEntry e;
    e.seller = seller;
    e.key_commitment = commit_key(key);
    if (!ct) ct = encrypt(key, to_bytes("cid:placeholder-address-material"), rng);
    e.ciphertext_digest = ct->digest();
    e.ciphertext = ct;
    e.amount = amount;
    return e;
}

}  // namespace

TEST_CASE("deploy debits the buyer and funds the entries") {
    RunRng rng(1);
    Ledger ledger({{"buyer", 100}});
    SymmetricKey k1 = gen_key(1, 1), k2 = gen_key(1, 2);
    std::uint64_t id = ledger.deploy_escrow(
        "buyer", {entry_for("s1", k1, 30, rng), entry_for("s2", k2, 30, rng)}, 10,
        LedgerMode::CommitmentOnly);
    CHECK(ledger.balance("buyer") == 40);
    CHECK(ledger.contract(id).escrowed_total() == 60);
}

TEST_CASE("insufficient funds leaves state untouched") {
    RunRng rng(2);
    Ledger ledger({{"buyer", 50}});
    SymmetricKey k = gen_key(2, 1);
    CHECK_THROWS_AS(
        ledger.deploy_escrow("buyer",
                             {entry_for("s1", k, 30, rng), entry_for("s2", k, 30, rng)}, 10,
                             LedgerMode::CommitmentOnly),
        InsufficientFunds);
    CHECK(ledger.balance("buyer") == 50);
    CHECK(ledger.state().contracts.empty());
}

TEST_CASE("deploy rejects empty entries and past deadlines") {
    RunRng rng(3);
    Ledger ledger({{"buyer", 100}});
    SymmetricKey k = gen_key(3, 1);
    CHECK_THROWS_AS(ledger.deploy_escrow("buyer", {}, 10, LedgerMode::CommitmentOnly),
                    EmptyEntries);
    ledger.advance_blocks(5);
    CHECK_THROWS_AS(
        ledger.deploy_escrow("buyer", {entry_for("s1", k, 10, rng)}, 5,
                             LedgerMode::CommitmentOnly),
        PastDeadline);
}

TEST_CASE("deploy then full timeout refund restores the buyer exactly") {
    RunRng rng(4);
    Ledger ledger({{"buyer", 100}});
    SymmetricKey k1 = gen_key(4, 1), k2 = gen_key(4, 2);
    std::uint64_t id = ledger.deploy_escrow(
        "buyer", {entry_for("s1", k1, 30, rng), entry_for("s2", k2, 30, rng)}, 10,
        LedgerMode::CommitmentOnly);
    ledger.advance_blocks(11);
    CHECK(ledger.refund_expired(id) == 60);
    CHECK(ledger.balance("buyer") == 100);

    // Conservation audit from the log alone: net delta per account is zero.
    LedgerState replayed = Ledger::replay(ledger.serialize_log());
    CHECK(replayed.balances.at("buyer") == 100);
}

TEST_CASE("correct key pays the seller; wrong key is rejected and retryable") {
    RunRng rng(5);
    Ledger ledger({{"buyer", 100}});
    SymmetricKey k = gen_key(5, 1);
    std::uint64_t id = ledger.deploy_escrow("buyer", {entry_for("s1", k, 25, rng)}, 10,
                                            LedgerMode::CommitmentOnly);

    SubmitResult wrong = ledger.submit_key(id, "s1", gen_key(5, 2));
    CHECK_FALSE(wrong.paid);
    CHECK(wrong.reason == "commitment mismatch");
    CHECK(ledger.balance("s1") == 0);

    SubmitResult right = ledger.submit_key(id, "s1", k);
    CHECK(right.paid);
    CHECK(right.amount == 25);
    CHECK(ledger.balance("s1") == 25);
    CHECK_THROWS_AS(ledger.submit_key(id, "s1", k), AlreadySettled);
}

TEST_CASE("full-decrypt mode additionally requires authenticated decryption") {
    RunRng rng(6);
    SymmetricKey k = gen_key(6, 1);
    Ciphertext ct = encrypt(k, to_bytes("the address"), rng);

    // Commitment matches but the ciphertext was swapped for someone else's.
    SymmetricKey other = gen_key(6, 2);
    Ciphertext foreign = encrypt(other, to_bytes("other address"), rng);
    EscrowEntry e;
    e.seller = "s1";
    e.key_commitment = commit_key(k);
    e.ciphertext_digest = foreign.digest();
    e.ciphertext = foreign;
    e.amount = 10;

    Ledger ledger({{"buyer", 100}});
    std::uint64_t id = ledger.deploy_escrow("buyer", {e}, 10, LedgerMode::FullDecrypt);
    SubmitResult r = ledger.submit_key(id, "s1", k);
    CHECK_FALSE(r.paid);
    CHECK(r.reason == "decryption failed");

    // With the matching ciphertext it pays.
    e.ciphertext_digest = ct.digest();
    e.ciphertext = ct;
    std::uint64_t id2 = ledger.deploy_escrow("buyer", {e}, 10, LedgerMode::FullDecrypt);
    CHECK(ledger.submit_key(id2, "s1", k).paid);
}

TEST_CASE("deadline boundary: accepted at deadline, rejected after") {
    RunRng rng(7);
    SymmetricKey k = gen_key(7, 1);
    Ledger ledger({{"buyer", 100}});
    std::uint64_t id = ledger.deploy_escrow("buyer", {entry_for("s1", k, 10, rng)}, 5,
                                            LedgerMode::CommitmentOnly);
    ledger.advance_blocks(5);  // height == deadline
    CHECK(ledger.height() == 5);
    CHECK(ledger.submit_key(id, "s1", k).paid);

    std::uint64_t id2 = ledger.deploy_escrow("buyer", {entry_for("s1", k, 10, rng)}, 7,
                                             LedgerMode::CommitmentOnly);
    ledger.advance_blocks(3);  // height 8 > deadline 7
    CHECK_THROWS_AS(ledger.submit_key(id2, "s1", k), DeadlinePassed);
}

TEST_CASE("advance_blocks requires n >= 1 and accumulates") {
    Ledger ledger({{"a", 1}});
    CHECK(ledger.advance_blocks(5) == 5);
    CHECK_THROWS_AS(ledger.advance_blocks(0), Error);
    CHECK(ledger.advance_blocks(2) == 7);
}

TEST_CASE("refund covers only funded entries and is idempotent") {
    RunRng rng(8);
    SymmetricKey k1 = gen_key(8, 1), k2 = gen_key(8, 2), k3 = gen_key(8, 3);
    Ledger ledger({{"buyer", 100}});
    std::uint64_t id = ledger.deploy_escrow(
        "buyer",
        {entry_for("s1", k1, 20, rng), entry_for("s2", k2, 20, rng),
         entry_for("s3", k3, 10, rng)},
        10, LedgerMode::CommitmentOnly);
    CHECK(ledger.submit_key(id, "s1", k1).paid);
    CHECK(ledger.submit_key(id, "s2", k2).paid);

    CHECK_THROWS_AS(ledger.refund_expired(id), DeadlineNotReached);
    ledger.advance_blocks(11);
    CHECK(ledger.refund_expired(id) == 10);
    CHECK(ledger.balance("buyer") == 60);
    CHECK(ledger.refund_expired(id) == 0);
    CHECK(ledger.balance("buyer") == 60);
}

TEST_CASE("unknown contract and seller errors") {
    Ledger ledger({{"buyer", 10}});
    CHECK_THROWS_AS(ledger.submit_key(99, "s", gen_key(1, 1)), UnknownContract);
    CHECK_THROWS_AS(ledger.refund_expired(99), UnknownContract);
    RunRng rng(9);
    std::uint64_t id = ledger.deploy_escrow(
        "buyer", {entry_for("s1", gen_key(9, 1), 5, rng)}, 10, LedgerMode::CommitmentOnly);
    CHECK_THROWS_AS(ledger.submit_key(id, "nobody", gen_key(9, 1)), UnknownSeller);
}

TEST_CASE("replay reproduces the live state exactly") {
    RunRng rng(10);
    SymmetricKey k1 = gen_key(10, 1), k2 = gen_key(10, 2);
    Ledger ledger({{"buyer", 200}, {"other", 50}});
    std::uint64_t id = ledger.deploy_escrow(
        "buyer", {entry_for("s1", k1, 40, rng), entry_for("s2", k2, 60, rng)}, 10,
        LedgerMode::CommitmentOnly);
    ledger.submit_key(id, "s1", k1);
    ledger.submit_key(id, "s2", gen_key(10, 3));  // rejected, logged
    ledger.advance_blocks(11);
    ledger.refund_expired(id);

    LedgerState replayed = Ledger::replay(ledger.serialize_log());
    CHECK(replayed.digest() == ledger.state().digest());
    CHECK(replayed.balances == ledger.state().balances);
}

TEST_CASE("dropping any interior record breaks replay") {
    RunRng rng(11);
    SymmetricKey k = gen_key(11, 1);
    Ledger ledger({{"buyer", 100}});
    std::uint64_t id = ledger.deploy_escrow("buyer", {entry_for("s1", k, 30, rng)}, 10,
                                            LedgerMode::CommitmentOnly);
    ledger.submit_key(id, "s1", k);
    std::string log = ledger.serialize_log();

    std::vector<std::string> lines;
    std::istringstream in(log);
    for (std::string line; std::getline(in, line);) lines.push_back(line);
    REQUIRE(lines.size() >= 3);
    // Truncating the tail is indistinguishable from a shorter valid log, so
    // only drops before the last record are detectable.
    for (std::size_t drop = 0; drop + 1 < lines.size(); ++drop) {
        std::string mutated;
        for (std::size_t i = 0; i < lines.size(); ++i)
            if (i != drop) mutated += lines[i] + "\n";
        CHECK_THROWS_AS(Ledger::replay(mutated), CorruptLog);
    }
}

TEST_CASE("mutating any record field is detected") {
    RunRng rng(12);
    SymmetricKey k1 = gen_key(12, 1), k2 = gen_key(12, 2);
    Ledger ledger({{"buyer", 100}});
    std::uint64_t id = ledger.deploy_escrow(
        "buyer", {entry_for("s1", k1, 30, rng), entry_for("s2", k2, 20, rng)}, 10,
        LedgerMode::CommitmentOnly);
    ledger.submit_key(id, "s1", k1);
    ledger.advance_blocks(11);
    ledger.refund_expired(id);
    std::string log = ledger.serialize_log();

    std::vector<std::string> lines;
    std::istringstream in(log);
    for (std::string line; std::getline(in, line);) lines.push_back(line);

    auto mutate_and_check = [&](std::size_t idx, auto mutator) {
        Json rec = Json::parse(lines[idx]);
        mutator(rec);
        std::string mutated;
        for (std::size_t i = 0; i < lines.size(); ++i)
            mutated += (i == idx ? rec.dump() : lines[i]) + "\n";
        CHECK_THROWS_AS(Ledger::replay(mutated), CorruptLog);
    };

    // Amount mutation in the deploy record.
    mutate_and_check(1, [](Json& r) {
        r["payload"]["entries"][0]["amount"] =
            r["payload"]["entries"][0]["amount"].get<std::uint64_t>() + 1;
    });
    // Key-byte mutation in the reveal record.
    mutate_and_check(2, [](Json& r) {
        std::string key = r["payload"]["key"].get<std::string>();
        key[0] = key[0] == 'a' ? 'b' : 'a';
        r["payload"]["key"] = key;
    });
    // Settlement status mutation.
    mutate_and_check(2, [](Json& r) { r["payload"]["paid"] = false; });
    // Refund total mutation.
    mutate_and_check(4, [](Json& r) {
        r["payload"]["total"] = r["payload"]["total"].get<std::uint64_t>() + 1;
    });
}

TEST_CASE("paid entries always carry a commitment-consistent revealed key") {
    RunRng rng(13);
    SymmetricKey k = gen_key(13, 1);
    Ledger ledger({{"buyer", 100}});
    std::uint64_t id = ledger.deploy_escrow("buyer", {entry_for("s1", k, 30, rng)}, 10,
                                            LedgerMode::CommitmentOnly);
    ledger.submit_key(id, "s1", k);
    for (const auto& [cid, contract] : ledger.state().contracts)
        for (const auto& e : contract.entries)
            if (e.status == EntryStatus::Paid) {
                REQUIRE(e.revealed_key.has_value());
                CHECK(commit_key(*e.revealed_key) == e.key_commitment);
            }
}

TEST_CASE("identical operation sequences produce byte-identical logs") {
    auto build = [] {
        RunRng rng(14);
        SymmetricKey k = gen_key(14, 1);
        Ledger ledger({{"buyer", 100}});
        std::uint64_t id = ledger.deploy_escrow("buyer", {entry_for("s1", k, 30, rng)}, 10,
                                                LedgerMode::CommitmentOnly);
        ledger.submit_key(id, "s1", k);
        ledger.advance_blocks(11);
        ledger.refund_expired(id);
        return ledger.serialize_log();
    };
    CHECK(build() == build());
}
