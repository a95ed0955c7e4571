#pragma once

// Experiment reports: one row per result, emitted as a fixed-header CSV or
// a versioned JSON document that round-trips through the companion loader.
// Reports echo the configuration they were produced from, so a run can be
// reproduced from its own output.

#include <chrono>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace beacon::exp {

using nlohmann::json;

inline std::string config_hash(const json& config) {
    // FNV-1a over the canonical dump; enough to spot config drift.
    const std::string dump = config.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream out;
    out << std::hex << h;
    return out.str();
}

struct ReportRow {
    std::string experiment;
    std::string check;  // sub-result label; empty for the headline row
    std::uint64_t seed = 0;
    std::uint64_t trials = 0;
    double confidence = 0.95;
    double estimate = 0.0;
    double ci_halfwidth = 0.0;
    std::optional<double> bound;
    std::optional<bool> pass;
    std::string notes;
};

struct Report {
    int schema_version = 1;
    json config_echo;
    std::string timestamp;  // empty when suppressed
    std::vector<ReportRow> rows;

    bool any_failure() const {
        for (const auto& row : rows)
            if (row.pass.has_value() && !*row.pass) return true;
        return false;
    }
};

inline std::string current_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buffer[32];
    std::tm tm_utc{};
    gmtime_r(&t, &tm_utc);
    std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buffer;
}

inline constexpr const char* kCsvHeader =
    "experiment,check,config_hash,seed,trials,confidence,estimate,ci_halfwidth,bound,pass,notes";

inline std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

inline std::string to_csv(const Report& report) {
    std::ostringstream out;
    out.precision(12);
    out << kCsvHeader << '\n';
    const std::string hash = config_hash(report.config_echo);
    for (const auto& row : report.rows) {
        out << csv_escape(row.experiment) << ',' << csv_escape(row.check) << ',' << hash << ','
            << row.seed << ',' << row.trials << ',' << row.confidence << ',' << row.estimate << ','
            << row.ci_halfwidth << ',';
        if (row.bound) out << *row.bound;
        out << ',';
        if (row.pass) out << (*row.pass ? "true" : "false");
        out << ',' << csv_escape(row.notes) << '\n';
    }
    return out.str();
}

inline json to_json(const Report& report) {
    json rows = json::array();
    for (const auto& row : report.rows) {
        json r{{"experiment", row.experiment}, {"check", row.check},       {"seed", row.seed},
               {"trials", row.trials},         {"confidence", row.confidence},
               {"estimate", row.estimate},     {"ci_halfwidth", row.ci_halfwidth},
               {"notes", row.notes}};
        if (row.bound) r["bound"] = *row.bound;
        if (row.pass) r["pass"] = *row.pass;
        rows.push_back(std::move(r));
    }
    json out{{"schema_version", report.schema_version},
             {"config", report.config_echo},
             {"config_hash", config_hash(report.config_echo)},
             {"rows", std::move(rows)}};
    if (!report.timestamp.empty()) out["timestamp"] = report.timestamp;
    return out;
}

inline Report report_from_json(const json& j) {
    Report report;
    report.schema_version = j.at("schema_version").get<int>();
    if (report.schema_version != 1)
        throw std::invalid_argument("report_from_json: unsupported schema version");
    report.config_echo = j.at("config");
    if (j.contains("timestamp")) report.timestamp = j.at("timestamp").get<std::string>();
    for (const auto& r : j.at("rows")) {
        ReportRow row;
        row.experiment = r.at("experiment").get<std::string>();
        row.check = r.value("check", std::string{});
        row.seed = r.at("seed").get<std::uint64_t>();
        row.trials = r.at("trials").get<std::uint64_t>();
        row.confidence = r.at("confidence").get<double>();
        row.estimate = r.at("estimate").get<double>();
        row.ci_halfwidth = r.at("ci_halfwidth").get<double>();
        row.notes = r.value("notes", std::string{});
        if (r.contains("bound")) row.bound = r.at("bound").get<double>();
        if (r.contains("pass")) row.pass = r.at("pass").get<bool>();
        report.rows.push_back(std::move(row));
    }
    return report;
}

inline void write_report(const Report& report, const std::string& format, const std::string& path) {
    std::string payload;
    if (format == "csv") payload = to_csv(report);
    else if (format == "json") payload = to_json(report).dump(2) + "\n";
    else throw std::invalid_argument("write_report: unknown format '" + format + "'");
    if (path.empty()) return;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_report: cannot open '" + path + "'");
    out << payload;
}

}  // namespace beacon::exp
