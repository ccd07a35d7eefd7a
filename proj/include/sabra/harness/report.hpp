#pragma once

// Run records and the on-disk outputs of a run:
//   config.txt      resolved configuration (reloadable, used by replay)
//   trajectory.csv  header row, then one row per snapshot or sample
//   report.ndjson   one JSON object per check
//   summary.txt     human-readable verdict table

#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sabra/statistics.hpp"

#ifndef SABRA_VERSION
#define SABRA_VERSION "0.0.0"
#endif

namespace sabra::harness {

inline constexpr const char *kVersion = SABRA_VERSION;

struct CheckRecord {
    std::string name;
    std::string anchor;  ///< statement the check traces to
    double statistic = 0.0;
    double threshold = 0.0;
    Verdict verdict = Verdict::pass;
    double wall_clock = 0.0;  ///< seconds since run start when recorded
    nlohmann::json details = nlohmann::json::object();
};

struct RunReport {
    std::string experiment;
    std::string config_hash;
    std::uint64_t seed = 0;
    unsigned shards = 1;
    std::string version = kVersion;
    double wall_clock = 0.0;
    std::vector<CheckRecord> checks;
    bool truncated = false;
    std::string error;

    [[nodiscard]] Verdict verdict() const {
        Verdict v = truncated ? Verdict::fail : Verdict::pass;
        for (const auto &c : checks) v = worst(v, c.verdict);
        return v;
    }

    /// 0 all pass, 1 any fail, 2 inconclusive only.
    [[nodiscard]] int exit_code() const {
        switch (verdict()) {
            case Verdict::pass: return 0;
            case Verdict::fail: return 1;
            case Verdict::inconclusive: return 2;
        }
        return 1;
    }
};

inline nlohmann::json to_json(const CheckRecord &c, const RunReport &r) {
    const auto num = [](double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); };
    return {{"check", c.name},
            {"anchor", c.anchor},
            {"statistic", num(c.statistic)},
            {"threshold", num(c.threshold)},
            {"verdict", to_string(c.verdict)},
            {"experiment", r.experiment},
            {"config_hash", r.config_hash},
            {"seed", r.seed},
            {"shards", r.shards},
            {"version", r.version},
            {"wall_clock_s", c.wall_clock},
            {"details", c.details}};
}

inline Verdict verdict_from_string(const std::string &s) {
    if (s == "pass") return Verdict::pass;
    if (s == "fail") return Verdict::fail;
    if (s == "inconclusive") return Verdict::inconclusive;
    throw PreconditionError("unknown verdict '" + s + "'");
}

/// Shortest round-trip text of a double.
inline std::string format_double(double x) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

/// Owns the files of one run. Without a directory nothing is written.
class RunOutputs {
  public:
    explicit RunOutputs(std::optional<std::filesystem::path> dir) : dir_(std::move(dir)) {
        if (dir_) {
            std::filesystem::create_directories(*dir_);
            report_.open(*dir_ / "report.ndjson", std::ios::trunc);
            if (!report_) {
                throw PreconditionError("cannot write to output directory '" + dir_->string() + "'");
            }
        }
    }

    [[nodiscard]] bool enabled() const noexcept { return dir_.has_value(); }
    [[nodiscard]] const std::optional<std::filesystem::path> &directory() const noexcept { return dir_; }

    void write_config(const std::string &canonical) {
        if (dir_) {
            std::ofstream(*dir_ / "config.txt", std::ios::trunc) << canonical;
        }
    }

    /// Header: time then x_{1,1}, x_{1,2}, ..., x_{M,2}.
    void begin_trajectory(int shells, const std::string &first_column = "time") {
        if (!dir_) {
            return;
        }
        trajectory_.open(*dir_ / "trajectory.csv", std::ios::trunc);
        trajectory_ << first_column;
        for (int n = 1; n <= shells; ++n) {
            trajectory_ << ",x_" << n << "_1,x_" << n << "_2";
        }
        trajectory_ << '\n';
    }

    void trajectory_row(double t, std::span<const double> x) {
        if (!trajectory_.is_open()) {
            return;
        }
        trajectory_ << format_double(t);
        for (double v : x) trajectory_ << ',' << format_double(v);
        trajectory_ << '\n';
    }

    void emit(const CheckRecord &c, const RunReport &r) {
        if (report_.is_open()) {
            report_ << to_json(c, r).dump() << '\n';
            report_.flush();
        }
    }

    /// Marks every open stream as cut short.
    void truncate(const RunReport &r, const std::string &message) {
        if (trajectory_.is_open()) {
            trajectory_ << "# TRUNCATED: " << message << '\n';
            trajectory_.flush();
        }
        if (report_.is_open()) {
            nlohmann::json j = {{"check", "run-aborted"},
                                {"anchor", "run integrity"},
                                {"statistic", nullptr},
                                {"threshold", nullptr},
                                {"verdict", "fail"},
                                {"experiment", r.experiment},
                                {"config_hash", r.config_hash},
                                {"seed", r.seed},
                                {"shards", r.shards},
                                {"version", r.version},
                                {"wall_clock_s", r.wall_clock},
                                {"truncated", true},
                                {"error", message}};
            report_ << j.dump() << '\n';
            report_.flush();
        }
    }

    void write_summary(const RunReport &r) {
        if (trajectory_.is_open()) {
            trajectory_.close();
        }
        if (!dir_) {
            return;
        }
        std::ofstream out(*dir_ / "summary.txt", std::ios::trunc);
        out << "experiment   " << r.experiment << '\n'
            << "version      " << r.version << '\n'
            << "config hash  " << r.config_hash << '\n'
            << "seed         " << r.seed << '\n'
            << "shards       " << r.shards << '\n'
            << "wall clock   " << r.wall_clock << " s\n";
        if (r.truncated) {
            out << "TRUNCATED    " << r.error << '\n';
        }
        std::size_t counts[3] = {0, 0, 0};
        out << '\n';
        for (const auto &c : r.checks) {
            ++counts[static_cast<int>(c.verdict)];
            out << to_string(c.verdict) << "  " << c.name << "  statistic=" << format_double(c.statistic)
                << " threshold=" << format_double(c.threshold) << "  [" << c.anchor << "]\n";
        }
        out << '\n'
            << counts[0] << " pass, " << counts[1] << " fail, " << counts[2] << " inconclusive; overall "
            << to_string(r.verdict()) << '\n';
    }

  private:
    std::optional<std::filesystem::path> dir_;
    std::ofstream report_;
    std::ofstream trajectory_;
};

/// Parses report.ndjson back into checks (the run-aborted marker sets truncated).
inline RunReport read_report(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw PreconditionError("cannot open report '" + path.string() + "'");
    }
    RunReport r;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        const auto j = nlohmann::json::parse(line);
        if (first) {
            r.experiment = j.at("experiment").get<std::string>();
            r.config_hash = j.at("config_hash").get<std::string>();
            r.seed = j.at("seed").get<std::uint64_t>();
            r.shards = j.at("shards").get<unsigned>();
            r.version = j.at("version").get<std::string>();
            first = false;
        }
        if (j.value("truncated", false)) {
            r.truncated = true;
            r.error = j.value("error", "");
            continue;
        }
        CheckRecord c;
        c.name = j.at("check").get<std::string>();
        c.anchor = j.at("anchor").get<std::string>();
        c.statistic = j.at("statistic").is_null() ? std::nan("") : j.at("statistic").get<double>();
        c.threshold = j.at("threshold").is_null() ? std::nan("") : j.at("threshold").get<double>();
        c.verdict = verdict_from_string(j.at("verdict").get<std::string>());
        c.wall_clock = j.at("wall_clock_s").get<double>();
        c.details = j.value("details", nlohmann::json::object());
        r.checks.push_back(std::move(c));
    }
    if (first) {
        throw PreconditionError("report '" + path.string() + "' is empty");
    }
    return r;
}

}  // namespace sabra::harness
