#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "support/ref_sha256.hpp"
#include "yotta/crypto.hpp"
#include "yotta/group.hpp"

using namespace yotta;

TEST_CASE("gen_key is deterministic per (seed, index)") {
    CHECK(gen_key(3, 1) == gen_key(3, 1));
    CHECK(gen_key(3, 1) != gen_key(3, 2));
    CHECK(gen_key(3, 1) != gen_key(4, 1));
    // Frozen regression vector for the KDF.
    CHECK(hex_encode(gen_key(7, 0).key_bytes) ==
          "ac0bc03807cf1f44bc7339923cbb16286616f4230afb275b67f71cd55d7655e9");
}

TEST_CASE("commit_key is deterministic, tag-separated, oracle-checked") {
    SymmetricKey k = gen_key(1, 1);
    CHECK(commit_key(k) == commit_key(k));
    CHECK(commit_key(k) != commit_key(gen_key(1, 2)));

    // Domain separation: the commitment is not the bare hash of the key.
    Bytes bare(k.key_bytes.begin(), k.key_bytes.end());
    CHECK(commit_key(k).digest != sha256(bare));

    // All-zero key against the independent oracle.
    SymmetricKey zero{};
    Bytes input = to_bytes(kKeyCommitTag);
    append_bytes(input, zero.key_bytes);
    CHECK(hex_encode(ref::sha256(input)) == commit_key(zero).digest.hex());
    CHECK(commit_key(zero).digest.hex() ==
          "ba3949f6f5a0f529944effacea96da1f380389134f4b546d9f97b8cf7f23f510");
}

TEST_CASE("AEAD round-trip and wrong-key failure") {
    RunRng rng(9);
    SymmetricKey k = gen_key(9, 0);
    Bytes m = to_bytes("the address goes here");
    Ciphertext ct = encrypt(k, m, rng);
    CHECK(decrypt(k, ct) == m);
    CHECK_THROWS_AS(decrypt(gen_key(9, 1), ct), AuthFailure);
    CHECK_THROWS_AS(encrypt(k, Bytes{}, rng), EmptyPlaintext);
}

TEST_CASE("AEAD golden vector, cross-generated") {
    // Generated once with an independent ChaCha20-Poly1305 implementation.
    SymmetricKey k;
    for (int i = 0; i < 32; ++i) k.key_bytes[i] = static_cast<std::uint8_t>(i);
    std::array<std::uint8_t, 12> nonce{};
    for (int i = 0; i < 12; ++i) nonce[i] = static_cast<std::uint8_t>(i);
    Bytes pt = to_bytes("yotta golden plaintext");

    Ciphertext ct = encrypt(k, std::span<const std::uint8_t>(pt), nonce);
    Bytes wire;
    append_bytes(wire, ct.body);
    append_bytes(wire, ct.auth_tag);
    CHECK(hex_encode(wire) ==
          "f0947c744837c22fdbe75a9db86d6202a01ec68229008fba32e1fe8b82fb5c4b442fc058846b");
    CHECK(decrypt(k, ct) == pt);
}

TEST_CASE("AEAD tamper rejection over randomized trials") {
    RunRng rng(77);
    std::mt19937_64 gen(77);
    for (int trial = 0; trial < 1000; ++trial) {
        SymmetricKey k;
        rng.fill(k.key_bytes);
        std::size_t len = 1 + gen() % 64;
        Bytes m(len);
        rng.fill(m);
        Ciphertext ct = encrypt(k, m, rng);
        REQUIRE(decrypt(k, ct) == m);

        // Flip one bit somewhere in nonce, body, or tag.
        Bytes wire = ct.serialize();
        std::size_t pos = gen() % wire.size();
        if (pos >= 12 && pos < 20) pos = 20 + gen() % ct.body.size();  // skip length field
        wire[pos] ^= static_cast<std::uint8_t>(1 << (gen() % 8));
        Ciphertext tampered = Ciphertext::deserialize(wire);
        CHECK_THROWS_AS(decrypt(k, tampered), AuthFailure);
    }
}

TEST_CASE("ciphertext serialization round-trips") {
    RunRng rng(5);
    SymmetricKey k = gen_key(5, 5);
    Bytes m = to_bytes("serialize me");
    Ciphertext ct = encrypt(k, m, rng);
    CHECK(Ciphertext::deserialize(ct.serialize()) == ct);
    CHECK_THROWS_AS(Ciphertext::deserialize(Bytes(10, 0)), Error);
}

TEST_CASE("DH commutativity over random scalar pairs") {
    DhGroup group;
    RunRng rng(123);
    for (int trial = 0; trial < 100; ++trial) {
        auto [a, ga] = dh_keypair(group, rng);
        auto [b, gb] = dh_keypair(group, rng);
        CHECK(dh_shared(group, a, gb) == dh_shared(group, b, ga));
    }
}

TEST_CASE("DH identity scalar and frozen exponentiation vectors") {
    DhGroup group;
    GroupElement g = group.generator();
    CHECK(group.exp(Scalar::from_u64(1)) == g);
    RunRng rng(1);
    auto [s, pub] = group.keypair(rng);
    CHECK(group.exp(Scalar::from_u64(1), pub) == pub);

    // Values computed by an independent modular-exponentiation oracle.
    CHECK(group.exp(Scalar::from_u64(5)).hex() == "0400");
    Scalar a(hex_decode("deadbeefcafebabe0123456789abcdef"));
    CHECK(group.exp(a).hex() ==
          "0ea88e1f344cfc181a0daf7edebe5eb07be38326cf959cfee524084dc3d29422");
    Scalar b(hex_decode("feedface0123"));
    CHECK(group.exp(b).hex() ==
          "5422ee7a75e4316e83a47a76540e4ab7ff16b15ac431510267a2c7177761f806");
    // g^(ab) two ways: (g^a)^b and (g^b)^a.
    const std::string gab =
        "705e58a3073fc4b89328394556aa6cce6389045658d59526cce903a1d36dfaaa";
    CHECK(group.exp(b, group.exp(a)).hex() == gab);
    CHECK(group.exp(a, group.exp(b)).hex() == gab);
}

TEST_CASE("non-members are rejected") {
    DhGroup group;
    CHECK_THROWS_AS(group.element_from_bytes(Bytes{0}), InvalidElement);
    // p-1 is -1, a quadratic non-residue: outside the order-q subgroup.
    Bytes minus_one = hex_decode(std::string(kGroupPrimeHex));
    minus_one.back() -= 1;
    CHECK_THROWS_AS(group.element_from_bytes(minus_one), InvalidElement);
    CHECK_NOTHROW(group.element_from_bytes(Bytes{4}));
}

TEST_CASE("RunRng is deterministic and serialized") {
    RunRng a(99), b(99);
    for (int i = 0; i < 50; ++i) CHECK(a.next_u64() == b.next_u64());
    Bytes x(17), y(17);
    a.fill(x);
    b.fill(y);
    CHECK(x == y);
}
