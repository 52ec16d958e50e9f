#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "yotta/errors.hpp"
#include "yotta/protocol.hpp"

namespace yotta {

// Scenario files are plain `key = value` lines; '#' starts a comment.
// Recognized keys:
//   buyers, sellers, seed, price, deadline_blocks, data_records  (integers)
//   eval                   default evaluation function id
//   eval.buyer<i>          per-buyer override
//   mode                   commitment-only | full-decrypt
//   verify                 individual | aggregated
//   adversary.wrong_key, adversary.failing_f, adversary.proof_replay,
//   adversary.store_tamper, adversary.non_claimer   (counts)
//   non_funding_buyers     (count)
inline MarketConfig parse_market_config(std::istream& in) {
    MarketConfig cfg;
    std::string line;
    std::size_t lineno = 0;
    auto trim = [](std::string s) {
        std::size_t a = s.find_first_not_of(" \t");
        std::size_t b = s.find_last_not_of(" \t");
        return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
    };
    auto to_u64 = [&](const std::string& key, const std::string& v) -> std::uint64_t {
        try {
            std::size_t pos = 0;
            std::uint64_t n = std::stoull(v, &pos);
            if (pos != v.size()) throw std::invalid_argument("trailing characters");
            return n;
        } catch (const std::exception&) {
            throw InvalidConfig("bad integer for " + key + ": '" + v + "'");
        }
    };

    while (std::getline(in, line)) {
        lineno += 1;
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw InvalidConfig("line " + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw InvalidConfig("line " + std::to_string(lineno) + ": empty key or value");

        if (key == "buyers") cfg.buyers = static_cast<std::uint32_t>(to_u64(key, value));
        else if (key == "sellers") cfg.sellers = static_cast<std::uint32_t>(to_u64(key, value));
        else if (key == "seed") cfg.seed = to_u64(key, value);
        else if (key == "price") cfg.price = to_u64(key, value);
        else if (key == "deadline_blocks") cfg.deadline_blocks = to_u64(key, value);
        else if (key == "data_records") cfg.data_records = to_u64(key, value);
        else if (key == "eval") cfg.eval_id = value;
        else if (key.starts_with("eval.buyer")) {
            std::uint64_t idx = to_u64(key, key.substr(10));
            if (cfg.buyer_evals.size() <= idx) cfg.buyer_evals.resize(idx + 1);
            cfg.buyer_evals[idx] = value;
        } else if (key == "mode") cfg.mode = ledger_mode_from_string(value);
        else if (key == "verify") cfg.verify = verify_mode_from_string(value);
        else if (key == "adversary.wrong_key")
            cfg.adversaries.wrong_key = static_cast<std::uint32_t>(to_u64(key, value));
        else if (key == "adversary.failing_f")
            cfg.adversaries.failing_f = static_cast<std::uint32_t>(to_u64(key, value));
        else if (key == "adversary.proof_replay")
            cfg.adversaries.proof_replay = static_cast<std::uint32_t>(to_u64(key, value));
        else if (key == "adversary.store_tamper")
            cfg.adversaries.store_tamper = static_cast<std::uint32_t>(to_u64(key, value));
        else if (key == "adversary.non_claimer")
            cfg.adversaries.non_claimer = static_cast<std::uint32_t>(to_u64(key, value));
        else if (key == "non_funding_buyers")
            cfg.non_funding_buyers = static_cast<std::uint32_t>(to_u64(key, value));
        else
            throw InvalidConfig("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
    cfg.validate();
    return cfg;
}

inline MarketConfig load_market_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidConfig("cannot open config file: " + path);
    return parse_market_config(in);
}

}  // namespace yotta
