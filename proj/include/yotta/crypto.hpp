#pragma once

#include <openssl/evp.h>

#include <array>
#include <compare>
#include <cstdint>
#include <memory>
#include <mutex>
#include <random>
#include <span>

#include "yotta/bytes.hpp"
#include "yotta/errors.hpp"
#include "yotta/hash.hpp"
#include "yotta/metrics.hpp"

namespace yotta {

inline constexpr std::string_view kKeyGenTag = "yotta/keygen/v1";
inline constexpr std::string_view kKeyCommitTag = "yotta/keycommit/v1";

struct SymmetricKey {
    std::array<std::uint8_t, 32> key_bytes{};
    auto operator<=>(const SymmetricKey&) const = default;
};

struct KeyCommitment {
    Digest32 digest;
    auto operator<=>(const KeyCommitment&) const = default;
};

struct Ciphertext {
    std::array<std::uint8_t, 12> nonce{};
    Bytes body;
    std::array<std::uint8_t, 16> auth_tag{};

    bool operator==(const Ciphertext&) const = default;

    Bytes serialize() const {
        Bytes out;
        append_bytes(out, nonce);
        append_u64le(out, body.size());
        append_bytes(out, body);
        append_bytes(out, auth_tag);
        return out;
    }

    static Ciphertext deserialize(std::span<const std::uint8_t> raw) {
        if (raw.size() < 12 + 8 + 16) throw Error("ciphertext too short");
        Ciphertext ct;
        std::copy_n(raw.begin(), 12, ct.nonce.begin());
        std::uint64_t len = 0;
        for (int i = 0; i < 8; ++i) len |= static_cast<std::uint64_t>(raw[12 + i]) << (8 * i);
        if (raw.size() != 12 + 8 + len + 16) throw Error("ciphertext length mismatch");
        ct.body.assign(raw.begin() + 20, raw.begin() + 20 + static_cast<std::ptrdiff_t>(len));
        std::copy_n(raw.begin() + 20 + static_cast<std::ptrdiff_t>(len), 16, ct.auth_tag.begin());
        return ct;
    }

    Digest32 digest() const { return sha256(serialize()); }
};

// Per-run PRNG. mt19937_64 output is fully specified, so seeded runs are
// reproducible across platforms. Serialized: one handle per run.
class RunRng {
public:
    explicit RunRng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() {
        std::scoped_lock lk(mu_);
        return engine_();
    }

    void fill(std::span<std::uint8_t> out) {
        std::scoped_lock lk(mu_);
        std::size_t i = 0;
        while (i < out.size()) {
            std::uint64_t v = engine_();
            for (int b = 0; b < 8 && i < out.size(); ++b, ++i)
                out[i] = static_cast<std::uint8_t>(v >> (8 * b));
        }
    }

    std::array<std::uint8_t, 12> next_nonce() {
        std::array<std::uint8_t, 12> n{};
        fill(n);
        return n;
    }

    // Uniform in [0, bound) by rejection.
    std::uint64_t next_below(std::uint64_t bound) {
        std::scoped_lock lk(mu_);
        std::uint64_t limit = bound * ((~std::uint64_t{0}) / bound);
        std::uint64_t v;
        do { v = engine_(); } while (v >= limit);
        return v % bound;
    }

private:
    std::mutex mu_;
    std::mt19937_64 engine_;
};

// Deterministic per-(seed, index) key derivation.
inline SymmetricKey gen_key(std::uint64_t rng_seed, std::uint64_t index) {
    Bytes input = to_bytes(kKeyGenTag);
    append_u64le(input, rng_seed);
    append_u64le(input, index);
    SymmetricKey k;
    k.key_bytes = sha256(input).bytes;
    return k;
}

inline KeyCommitment commit_key(const SymmetricKey& key) {
    Bytes input = to_bytes(kKeyCommitTag);
    append_bytes(input, key.key_bytes);
    return KeyCommitment{sha256(input)};
}

namespace detail {

inline Ciphertext aead_seal(const SymmetricKey& key, const std::array<std::uint8_t, 12>& nonce,
                            std::span<const std::uint8_t> plaintext) {
    meter().aead_ops += 1;
    Ciphertext ct;
    ct.nonce = nonce;
    ct.body.resize(plaintext.size());
    std::unique_ptr<EVP_CIPHER_CTX, decltype(&EVP_CIPHER_CTX_free)> ctx(EVP_CIPHER_CTX_new(),
                                                                        &EVP_CIPHER_CTX_free);
    EVP_EncryptInit_ex(ctx.get(), EVP_chacha20_poly1305(), nullptr, key.key_bytes.data(),
                       nonce.data());
    int out_len = 0;
    EVP_EncryptUpdate(ctx.get(), ct.body.data(), &out_len, plaintext.data(),
                      static_cast<int>(plaintext.size()));
    int fin_len = 0;
    EVP_EncryptFinal_ex(ctx.get(), ct.body.data() + out_len, &fin_len);
    EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_AEAD_GET_TAG, 16, ct.auth_tag.data());
    return ct;
}

}  // namespace detail

inline Ciphertext encrypt(const SymmetricKey& key, std::span<const std::uint8_t> plaintext,
                          const std::array<std::uint8_t, 12>& nonce) {
    if (plaintext.empty()) throw EmptyPlaintext();
    return detail::aead_seal(key, nonce, plaintext);
}

inline Ciphertext encrypt(const SymmetricKey& key, const Bytes& plaintext, RunRng& rng) {
    if (plaintext.empty()) throw EmptyPlaintext();
    return detail::aead_seal(key, rng.next_nonce(), plaintext);
}

inline Bytes decrypt(const SymmetricKey& key, const Ciphertext& ct) {
    meter().aead_ops += 1;
    Bytes plaintext(ct.body.size());
    std::unique_ptr<EVP_CIPHER_CTX, decltype(&EVP_CIPHER_CTX_free)> ctx(EVP_CIPHER_CTX_new(),
                                                                        &EVP_CIPHER_CTX_free);
    EVP_DecryptInit_ex(ctx.get(), EVP_chacha20_poly1305(), nullptr, key.key_bytes.data(),
                       ct.nonce.data());
    int out_len = 0;
    EVP_DecryptUpdate(ctx.get(), plaintext.data(), &out_len, ct.body.data(),
                      static_cast<int>(ct.body.size()));
    std::array<std::uint8_t, 16> tag = ct.auth_tag;
    EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_AEAD_SET_TAG, 16, tag.data());
    int fin_len = 0;
    if (EVP_DecryptFinal_ex(ctx.get(), plaintext.data() + out_len, &fin_len) != 1)
        throw AuthFailure();
    return plaintext;
}

// Non-throwing probe, for ledger-side key checks.
inline bool decrypts_ok(const SymmetricKey& key, const Ciphertext& ct) {
    try {
        decrypt(key, ct);
        return true;
    } catch (const AuthFailure&) {
        return false;
    }
}

}  // namespace yotta
