#pragma once

#include <openssl/bn.h>

#include <memory>
#include <string>
#include <utility>

#include "yotta/bytes.hpp"
#include "yotta/crypto.hpp"
#include "yotta/errors.hpp"
#include "yotta/metrics.hpp"

namespace yotta {

// Fixed 256-bit safe prime p = 2q + 1; the generator g = 4 spans the
// order-q subgroup of quadratic residues. Parameters frozen so runs are
// comparable across machines.
inline constexpr std::string_view kGroupPrimeHex =
    "800000000000000000000000000000000000000000000000000000000002ff7f";
inline constexpr std::string_view kGroupOrderHex =
    "4000000000000000000000000000000000000000000000000000000000017fbf";
inline constexpr unsigned kGroupGenerator = 4;

namespace detail {

struct BnDeleter {
    void operator()(BIGNUM* bn) const { BN_free(bn); }
    void operator()(BN_CTX* ctx) const { BN_CTX_free(ctx); }
};
using BnPtr = std::unique_ptr<BIGNUM, BnDeleter>;
using BnCtxPtr = std::unique_ptr<BN_CTX, BnDeleter>;

inline BnPtr bn_from_hex(std::string_view hex) {
    BIGNUM* bn = nullptr;
    BN_hex2bn(&bn, std::string(hex).c_str());
    return BnPtr(bn);
}

}  // namespace detail

class Scalar {
public:
    explicit Scalar(Bytes be_bytes) : bytes_(std::move(be_bytes)) {}

    static Scalar from_u64(std::uint64_t v) {
        Bytes b;
        for (int i = 7; i >= 0; --i) b.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
        return Scalar(std::move(b));
    }

    const Bytes& big_endian() const { return bytes_; }

private:
    Bytes bytes_;  // big-endian, already reduced into [1, q)
};

class GroupElement {
public:
    const Bytes& big_endian() const { return bytes_; }
    std::string hex() const { return hex_encode(bytes_); }
    bool operator==(const GroupElement&) const = default;

private:
    friend class DhGroup;
    explicit GroupElement(Bytes be) : bytes_(std::move(be)) {}
    Bytes bytes_;  // big-endian value in [1, p), membership checked
};

// Multiplicative group mod the fixed safe prime; the DCDH baseline and the
// crypto test suite share these parameters.
class DhGroup {
public:
    DhGroup()
        : p_(detail::bn_from_hex(kGroupPrimeHex)),
          q_(detail::bn_from_hex(kGroupOrderHex)),
          g_(detail::BnPtr(BN_new())),
          ctx_(detail::BnCtxPtr(BN_CTX_new())) {
        BN_set_word(g_.get(), kGroupGenerator);
    }

    // Scalar uniform in [1, q), drawn deterministically from the run PRNG.
    Scalar random_scalar(RunRng& rng) const {
        Bytes raw(32);
        detail::BnPtr v(BN_new());
        for (;;) {
            rng.fill(raw);
            BN_bin2bn(raw.data(), static_cast<int>(raw.size()), v.get());
            BN_mod(v.get(), v.get(), q_.get(), ctx_.get());
            if (!BN_is_zero(v.get())) break;
        }
        return Scalar(bn_bytes(v.get()));
    }

    GroupElement generator() const { return element_unchecked(bn_bytes(g_.get())); }

    // g^scalar
    GroupElement exp(const Scalar& scalar) const { return pow_element(g_.get(), scalar); }

    // base^scalar; the shared-secret half of DH.
    GroupElement exp(const Scalar& scalar, const GroupElement& base) const {
        detail::BnPtr b(BN_bin2bn(base.big_endian().data(),
                                  static_cast<int>(base.big_endian().size()), nullptr));
        return pow_element(b.get(), scalar);
    }

    std::pair<Scalar, GroupElement> keypair(RunRng& rng) const {
        Scalar s = random_scalar(rng);
        GroupElement pub = exp(s);
        return {std::move(s), std::move(pub)};
    }

    GroupElement element_from_bytes(Bytes be) const {
        detail::BnPtr v(BN_bin2bn(be.data(), static_cast<int>(be.size()), nullptr));
        if (!is_member(v.get())) throw InvalidElement();
        return element_unchecked(bn_bytes(v.get()));
    }

    // Shared key = H(tag || shared element), matching the symmetric layer.
    SymmetricKey derive_key(const GroupElement& shared) const {
        Bytes input = to_bytes("yotta/dcdh-kdf/v1");
        append_bytes(input, shared.big_endian());
        SymmetricKey k;
        k.key_bytes = sha256(input).bytes;
        return k;
    }

private:
    GroupElement pow_element(const BIGNUM* base, const Scalar& scalar) const {
        meter().group_exps += 1;
        detail::BnPtr e(BN_bin2bn(scalar.big_endian().data(),
                                  static_cast<int>(scalar.big_endian().size()), nullptr));
        detail::BnPtr r(BN_new());
        BN_mod_exp(r.get(), base, e.get(), p_.get(), ctx_.get());
        return element_unchecked(bn_bytes(r.get()));
    }

    // Member iff 0 < v < p and v^q == 1 (order-q subgroup).
    bool is_member(const BIGNUM* v) const {
        if (BN_is_zero(v) || BN_is_negative(v) || BN_cmp(v, p_.get()) >= 0) return false;
        detail::BnPtr r(BN_new());
        BN_mod_exp(r.get(), v, q_.get(), p_.get(), ctx_.get());
        return BN_is_one(r.get());
    }

    static GroupElement element_unchecked(Bytes be) { return GroupElement(std::move(be)); }

    static Bytes bn_bytes(const BIGNUM* v) {
        Bytes out(static_cast<std::size_t>(BN_num_bytes(v)));
        BN_bn2bin(v, out.data());
        return out;
    }

    detail::BnPtr p_, q_, g_;
    detail::BnCtxPtr ctx_;
};

inline std::pair<Scalar, GroupElement> dh_keypair(const DhGroup& group, RunRng& rng) {
    return group.keypair(rng);
}

inline GroupElement dh_shared(const DhGroup& group, const Scalar& secret,
                              const GroupElement& peer_public) {
    return group.exp(secret, group.element_from_bytes(peer_public.big_endian()));
}

}  // namespace yotta
