#pragma once

#include <charconv>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "yotta/bytes.hpp"
#include "yotta/errors.hpp"

namespace yotta {

// Public evaluation predicate a dataset must satisfy. Deterministic and
// total: malformed input yields false, never an exception.
struct EvalFunction {
    std::string eval_id;
    std::function<bool(std::span<const std::uint8_t>)> predicate;
    std::string description;
};

namespace detail {

inline std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(s.substr(start));
            return out;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

// Records are newline-separated; a trailing newline does not add an empty record.
inline std::vector<std::string_view> records_of(std::span<const std::uint8_t> data) {
    std::string_view text(reinterpret_cast<const char*>(data.data()), data.size());
    if (!text.empty() && text.back() == '\n') text.remove_suffix(1);
    if (text.empty()) return {};
    return split(text, '\n');
}

inline std::optional<double> parse_f64(std::string_view field) {
    double value = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size()) return std::nullopt;
    return value;
}

inline std::optional<std::uint64_t> parse_u64(std::string_view field) {
    std::uint64_t value = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size()) return std::nullopt;
    return value;
}

}  // namespace detail

// Reference predicate registry, keyed by eval_id:
//   min-records:<n>             at least n newline-separated records
//   schema:csv:f64x<k>          every record is exactly k comma-separated f64 fields
//   mean-in-range:col<i>:<lo>:<hi>   mean of CSV column i lies in [lo, hi]
inline EvalFunction builtin_eval(const std::string& eval_id) {
    auto parts = detail::split(eval_id, ':');

    if (parts.size() == 2 && parts[0] == "min-records") {
        auto n = detail::parse_u64(parts[1]);
        if (!n) throw UnknownEval(eval_id);
        std::uint64_t threshold = *n;
        return {eval_id,
                [threshold](std::span<const std::uint8_t> data) {
                    return detail::records_of(data).size() >= threshold;
                },
                "at least " + std::to_string(threshold) + " records"};
    }

    if (parts.size() == 3 && parts[0] == "schema" && parts[1] == "csv" &&
        parts[2].starts_with("f64x")) {
        auto k = detail::parse_u64(parts[2].substr(4));
        if (!k || *k == 0) throw UnknownEval(eval_id);
        std::uint64_t width = *k;
        return {eval_id,
                [width](std::span<const std::uint8_t> data) {
                    auto records = detail::records_of(data);
                    if (records.empty()) return false;
                    for (auto rec : records) {
                        auto fields = detail::split(rec, ',');
                        if (fields.size() != width) return false;
                        for (auto f : fields)
                            if (!detail::parse_f64(f)) return false;
                    }
                    return true;
                },
                "CSV with " + std::to_string(width) + " f64 columns"};
    }

    if (parts.size() == 4 && parts[0] == "mean-in-range" && parts[1].starts_with("col")) {
        auto col = detail::parse_u64(parts[1].substr(3));
        auto lo = detail::parse_f64(parts[2]);
        auto hi = detail::parse_f64(parts[3]);
        if (!col || !lo || !hi) throw UnknownEval(eval_id);
        std::uint64_t c = *col;
        double low = *lo, high = *hi;
        return {eval_id,
                [c, low, high](std::span<const std::uint8_t> data) {
                    auto records = detail::records_of(data);
                    if (records.empty()) return false;
                    double sum = 0;
                    for (auto rec : records) {
                        auto fields = detail::split(rec, ',');
                        if (fields.size() <= c) return false;
                        auto v = detail::parse_f64(fields[c]);
                        if (!v) return false;
                        sum += *v;
                    }
                    double mean = sum / static_cast<double>(records.size());
                    return mean >= low && mean <= high;
                },
                "mean of column " + std::to_string(c) + " in [" + std::string(parts[2]) + ", " +
                    std::string(parts[3]) + "]"};
    }

    throw UnknownEval(eval_id);
}

inline bool is_known_eval(const std::string& eval_id) {
    try {
        builtin_eval(eval_id);
        return true;
    } catch (const UnknownEval&) {
        return false;
    }
}

}  // namespace yotta
