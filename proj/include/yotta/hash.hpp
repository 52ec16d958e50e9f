#pragma once

#include <openssl/evp.h>

#include <array>
#include <compare>
#include <cstdint>
#include <memory>
#include <span>

#include "yotta/bytes.hpp"
#include "yotta/metrics.hpp"

namespace yotta {

struct Digest32 {
    std::array<std::uint8_t, 32> bytes{};

    auto operator<=>(const Digest32&) const = default;

    std::string hex() const { return hex_encode(bytes); }

    static Digest32 from_hex(std::string_view hex) {
        Bytes raw = hex_decode(hex);
        if (raw.size() != 32) throw std::invalid_argument("digest hex must be 64 chars");
        Digest32 d;
        std::copy(raw.begin(), raw.end(), d.bytes.begin());
        return d;
    }
};

inline Digest32 sha256(std::span<const std::uint8_t> data) {
    meter().hash_calls += 1;
    meter().bytes_hashed += data.size();
    Digest32 out;
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), out.bytes.data(), &len, EVP_sha256(), nullptr);
    return out;
}

inline Digest32 sha256(const Bytes& data) {
    return sha256(std::span<const std::uint8_t>(data));
}

// Incremental variant for transcript chaining.
class Sha256Stream {
public:
    Sha256Stream() : ctx_(EVP_MD_CTX_new(), &EVP_MD_CTX_free) {
        EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr);
    }

    Sha256Stream& update(std::span<const std::uint8_t> data) {
        meter().bytes_hashed += data.size();
        EVP_DigestUpdate(ctx_.get(), data.data(), data.size());
        return *this;
    }

    Sha256Stream& update_u64(std::uint64_t v) {
        Bytes enc;
        append_u64le(enc, v);
        return update(enc);
    }

    Digest32 finish() {
        meter().hash_calls += 1;
        Digest32 out;
        unsigned int len = 0;
        EVP_DigestFinal_ex(ctx_.get(), out.bytes.data(), &len);
        return out;
    }

private:
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

}  // namespace yotta
