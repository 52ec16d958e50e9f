// yotta: run seeded market scenarios, benchmark against the pairwise DCDH
// baseline, and audit ledger logs.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "yotta/bench.hpp"
#include "yotta/config.hpp"
#include "yotta/content_store.hpp"
#include "yotta/ledger.hpp"
#include "yotta/protocol.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitInvariant = 3;
constexpr int kExitLogDiverged = 4;

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw yotta::Error("cannot write " + path.string());
    out << content;
}

std::string format_report(const yotta::MarketReport& report) {
    std::ostringstream out;
    out << "outcomes: " << report.delivered << " delivered, " << report.refunded
        << " refunded, " << report.rejected << " rejected-at-verification\n";
    out << "fair-exchange: " << (report.fair_exchange_ok ? "ok" : "VIOLATED") << "\n";
    if (!report.fair_exchange_ok) out << "violation: " << report.violation << "\n";
    out << "tokens: genesis " << report.genesis_total << ", final " << report.final_total
        << "\n";
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "timings_ms: prepare %.3f, verify %.3f, settle %.3f, finalize %.3f\n",
                  report.timings.prepare_ms, report.timings.verify_ms,
                  report.timings.settle_ms, report.timings.finalize_ms);
    out << buf;
    out << "ops: hash " << report.ops.hash_calls << ", bytes_hashed "
        << report.ops.bytes_hashed << ", aead " << report.ops.aead_ops << ", verify_calls "
        << report.ops.verify_calls << ", group_exps " << report.ops.group_exps << "\n";
    out << "\nper-offer:\n";
    for (const auto& r : report.outcomes) {
        out << "  " << r.buyer << " x " << r.seller << " [" << to_string(r.role)
            << "]: " << to_string(r.outcome);
        if (!r.detail.empty()) out << " (" << r.detail << ")";
        out << "\n";
    }
    return out.str();
}

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed,
            std::optional<std::string> mode, std::optional<std::string> verify,
            const std::string& out_dir) {
    yotta::MarketConfig cfg;
    try {
        cfg = yotta::load_market_config(config_path);
        if (seed) cfg.seed = *seed;
        if (mode) cfg.mode = yotta::ledger_mode_from_string(*mode);
        if (verify) cfg.verify = yotta::verify_mode_from_string(*verify);
        cfg.validate();
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }

    yotta::MarketReport report;
    try {
        if (const char* dir = std::getenv("YOTTA_STORE_DIR"); dir && *dir) {
            yotta::ContentStore store{std::filesystem::path(dir)};
            report = yotta::run_market(cfg, store);
        } else {
            report = yotta::run_market(cfg);
        }
        std::filesystem::create_directories(out_dir);
        write_file(std::filesystem::path(out_dir) / "report.txt", format_report(report));
        write_file(std::filesystem::path(out_dir) / "ledger.log", report.ledger_log);
    } catch (const std::exception& e) {
        std::cerr << "run failed: " << e.what() << "\n";
        return kExitInvariant;
    }

    std::cout << format_report(report);
    if (!report.fair_exchange_ok) {
        std::cerr << "fair-exchange invariant violated: " << report.violation << "\n";
        return kExitInvariant;
    }
    return kExitOk;
}

int cmd_bench(const std::string& sweep_arg, bool include_10k, std::uint64_t item_size,
              std::uint64_t seed, const std::string& out_path) {
    std::vector<std::uint64_t> points;
    try {
        std::stringstream ss(sweep_arg);
        std::string tok;
        while (std::getline(ss, tok, ','))
            if (!tok.empty()) points.push_back(std::stoull(tok));
        if (include_10k) points.push_back(10000);
        yotta::SweepResult result = yotta::run_sweep(points, item_size, seed);
        write_file(out_path, result.to_csv());
        write_file(out_path + ".plot.csv", result.to_plot_csv());
        std::cout << "n_sellers  yotta_verify_ms  dcdh_total_ms  speedup\n";
        for (const auto& p : result.points) {
            char buf[96];
            std::snprintf(buf, sizeof(buf), "%9llu  %15.3f  %13.3f  %6.2fx\n",
                          static_cast<unsigned long long>(p.n_sellers), p.yotta_verify_ms,
                          p.dcdh_total_ms, p.speedup);
            std::cout << buf;
        }
    } catch (const std::exception& e) {
        std::cerr << "bench error: " << e.what() << "\n";
        return kExitConfig;
    }
    return kExitOk;
}

int cmd_verify_log(const std::string& log_path) {
    std::ifstream in(log_path, std::ios::binary);
    if (!in) {
        std::cerr << "cannot open " << log_path << "\n";
        return kExitConfig;
    }
    std::stringstream buf;
    buf << in.rdbuf();
    try {
        yotta::LedgerState state = yotta::Ledger::replay(buf.str());
        std::cout << "log ok: height " << state.height << ", " << state.balances.size()
                  << " accounts, " << state.contracts.size() << " contracts\n";
        return kExitOk;
    } catch (const yotta::CorruptLog& e) {
        std::cerr << "log diverges at record " << e.index << ": " << e.what() << "\n";
        return kExitLogDiverged;
    } catch (const std::exception& e) {
        std::cerr << "log invalid: " << e.what() << "\n";
        return kExitLogDiverged;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Deterministic data-trading protocol simulator and benchmark"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "Execute a seeded market scenario");
    std::string config_path;
    std::optional<std::uint64_t> seed_override;
    std::optional<std::string> mode_override, verify_override;
    std::string out_dir = ".";
    run->add_option("--config", config_path, "Scenario config file")->required();
    run->add_option("--seed", seed_override, "Override the scenario seed");
    run->add_option("--mode", mode_override, "commitment-only | full-decrypt")
        ->check(CLI::IsMember({"commitment-only", "full-decrypt"}));
    run->add_option("--verify", verify_override, "individual | aggregated")
        ->check(CLI::IsMember({"individual", "aggregated"}));
    run->add_option("--out", out_dir, "Output directory for report and ledger log");

    // bench
    auto* bench = app.add_subcommand("bench", "Sweep seller counts vs the DCDH baseline");
    std::string sweep = "10,100,1000";
    bool include_10k = false;
    std::uint64_t item_size = 1024;
    std::uint64_t bench_seed = 42;
    std::string bench_out;
    bench->add_option("--sweep", sweep, "Comma-separated ascending seller counts");
    bench->add_flag("--include-10k", include_10k, "Append a 10000-seller point");
    bench->add_option("--item-size", item_size, "Dataset size in bytes");
    bench->add_option("--seed", bench_seed, "Benchmark seed");
    bench->add_option("--out", bench_out, "CSV output file")->required();

    // verify-log
    auto* verify_log = app.add_subcommand("verify-log", "Replay and audit a ledger log");
    std::string log_path;
    verify_log->add_option("file", log_path, "Ledger log file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    if (run->parsed())
        return cmd_run(config_path, seed_override, mode_override, verify_override, out_dir);
    if (bench->parsed())
        return cmd_bench(sweep, include_10k, item_size, bench_seed, bench_out);
    return cmd_verify_log(log_path);
}
