#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sabra/harness/experiments.hpp"

namespace {

struct CommonFlags {
    std::string config;
    std::vector<std::string> sets;
    std::optional<std::uint64_t> seed;
    std::string out;
    unsigned shards = 1;
};

void print_report(const sabra::harness::RunReport &r) {
    for (const auto &c : r.checks) {
        std::cout << sabra::to_string(c.verdict) << "  " << c.name << "  statistic=" << sabra::harness::format_double(c.statistic)
                  << " threshold=" << sabra::harness::format_double(c.threshold) << '\n';
    }
    if (r.truncated) {
        std::cout << "TRUNCATED  " << r.error << '\n';
    }
    std::cout << "overall " << sabra::to_string(r.verdict()) << " (" << r.checks.size() << " checks, " << r.wall_clock
              << " s, config " << r.config_hash << ")\n";
}

std::string schema_text() {
    std::string s = "Config keys (flat 'key = value'; '#' comments):\n";
    for (const auto &k : sabra::harness::config_schema()) {
        s += "  " + std::string(k.key) + " [" + (k.default_value[0] ? k.default_value : "derived") + "]  " +
             k.description + "\n";
    }
    return s;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Sabra shell-model simulation and verification toolkit"};
    app.set_version_flag("--version", std::string(sabra::harness::kVersion));
    app.footer(schema_text());
    app.require_subcommand(1);

    CommonFlags flags;
    std::string selected;
    for (const auto &kind : sabra::harness::experiment_kinds()) {
        auto *sub = app.add_subcommand(kind, "run the " + kind + " experiment");
        sub->add_option("--config", flags.config, "flat key = value config file")->check(CLI::ExistingFile);
        sub->add_option("--set", flags.sets, "override, key=value (repeatable)");
        sub->add_option("--seed", flags.seed, "64-bit master seed");
        sub->add_option("--out", flags.out, "output directory (trajectory.csv, report.ndjson, summary.txt)");
        sub->add_option("--shards", flags.shards, "worker threads")->check(CLI::PositiveNumber);
        sub->callback([&selected, kind] { selected = kind; });
    }

    std::string replay_dir;
    std::string replay_out;
    unsigned replay_shards = 0;
    auto *rep = app.add_subcommand("replay", "re-run a recorded experiment and compare its checks");
    rep->add_option("run", replay_dir, "output directory or report.ndjson of the recorded run")->required();
    rep->add_option("--out", replay_out, "where to write the replayed outputs (default <run>/replay)");
    rep->add_option("--shards", replay_shards, "worker threads (default: as recorded)");
    rep->callback([&selected] { selected = "replay"; });

    CLI11_PARSE(app, argc, argv);

    if (selected == "replay") {
        try {
            sabra::harness::RunOptions opts;
            opts.shards = replay_shards;
            if (!replay_out.empty()) opts.out_dir = replay_out;
            const auto result = sabra::harness::replay(replay_dir, opts);
            print_report(result.replayed);
            if (result.identical()) {
                std::cout << "replay identical (" << (result.statistics_compared ? "statistics and verdicts" : "verdicts")
                          << ")\n";
                return 0;
            }
            for (const auto &d : result.differences) std::cout << "differs: " << d << '\n';
            return 1;
        } catch (const std::exception &e) {
            std::cerr << "error: " << e.what() << '\n';
            return 1;
        }
    }

    sabra::harness::ExperimentConfig cfg;
    try {
        cfg = sabra::harness::load_config(selected, flags.config.empty() ? std::nullopt : std::optional(flags.config),
                                          flags.sets, flags.seed);
    } catch (const std::exception &e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    }
    sabra::harness::RunOptions opts;
    opts.shards = flags.shards;
    if (!flags.out.empty()) opts.out_dir = flags.out;
    try {
        const auto report = sabra::harness::run(cfg, opts);
        print_report(report);
        if (report.truncated) {
            std::cerr << "error: " << report.error << '\n';
        }
        return report.exit_code();
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
