#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>

#include "yotta/bytes.hpp"
#include "yotta/errors.hpp"
#include "yotta/hash.hpp"

namespace yotta {

// Content identifier: SHA-256 of the stored bytes, "cid:" + 64 hex chars
// in textual form. Identical content always maps to the same ContentHash.
struct ContentHash {
    Digest32 digest;

    auto operator<=>(const ContentHash&) const = default;

    std::string text() const { return "cid:" + digest.hex(); }

    static ContentHash of(std::span<const std::uint8_t> payload) {
        return ContentHash{sha256(payload)};
    }

    static ContentHash from_text(std::string_view s) {
        if (s.size() != 4 + 64 || s.substr(0, 4) != "cid:")
            throw Error("bad content hash text: " + std::string(s));
        return ContentHash{Digest32::from_hex(s.substr(4))};
    }
};

// In-process content-addressed store standing in for IPFS. Append-only for
// a run; optional file-backed mode writes one file per object named by hex
// digest. Concurrent reads, serialized writes.
class ContentStore {
public:
    ContentStore() = default;

    explicit ContentStore(std::filesystem::path dir) : dir_(std::move(dir)) {
        std::filesystem::create_directories(*dir_);
        for (const auto& entry : std::filesystem::directory_iterator(*dir_)) {
            if (!entry.is_regular_file()) continue;
            Bytes payload = read_file(entry.path());
            ContentHash h = ContentHash::of(payload);
            if (h.digest.hex() != entry.path().filename().string())
                throw Error("store file does not match its name: " + entry.path().string());
            objects_.emplace(h, std::move(payload));
        }
    }

    ContentHash put(const Bytes& payload) {
        if (payload.empty()) throw EmptyPayload();
        ContentHash h = ContentHash::of(payload);
        std::unique_lock lk(mu_);
        auto it = objects_.find(h);
        if (it != objects_.end()) {
            // Idempotent put; equal content must mean equal bytes.
            if (it->second != payload) throw Error("content hash collision: " + h.text());
            return h;
        }
        objects_.emplace(h, payload);
        if (dir_) write_file(*dir_ / h.digest.hex(), payload);
        return h;
    }

    Bytes get(const ContentHash& hash) const {
        std::shared_lock lk(mu_);
        auto it = objects_.find(hash);
        if (it == objects_.end()) throw NotFound(hash.text());
        return it->second;
    }

    bool contains(const ContentHash& hash) const {
        std::shared_lock lk(mu_);
        return objects_.contains(hash);
    }

    static bool verify(const ContentHash& hash, std::span<const std::uint8_t> payload) {
        return ContentHash::of(payload) == hash;
    }

    std::size_t object_count() const {
        std::shared_lock lk(mu_);
        return objects_.size();
    }

    // Adversary-simulation hook: overwrite stored bytes without updating the
    // hash, modeling an out-of-protocol mutation of the backing storage.
    void tamper_with(const ContentHash& hash, Bytes replacement) {
        std::unique_lock lk(mu_);
        auto it = objects_.find(hash);
        if (it == objects_.end()) throw NotFound(hash.text());
        it->second = std::move(replacement);
    }

private:
    static Bytes read_file(const std::filesystem::path& p) {
        std::ifstream in(p, std::ios::binary);
        return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    }

    static void write_file(const std::filesystem::path& p, const Bytes& payload) {
        std::ofstream out(p, std::ios::binary | std::ios::trunc);
        out.write(reinterpret_cast<const char*>(payload.data()),
                  static_cast<std::streamsize>(payload.size()));
    }

    mutable std::shared_mutex mu_;
    std::map<ContentHash, Bytes> objects_;
    std::optional<std::filesystem::path> dir_;
};

}  // namespace yotta
