#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "context_drift/session_engine.hpp"
#include "context_drift/vendor_json.hpp"

namespace context_drift {

inline constexpr int kRunSchemaVersion = 1;

inline constexpr std::string_view kStepsCsvHeader =
    "run_id,step,story_id,q_index,mode,raw_answer,normalized,gold,correct,latency_ms,prompt_tokens";

/// Deterministic id derived from config, model and dataset fingerprint.
std::string run_id(const RunReport& report);

json to_json(const RunReport& report);
RunReport run_report_from_json(const json& j);

/// Drops timestamps and every latency_ms field, leaving what must be
/// reproducible across identical runs.
json strip_volatile(json j);

std::string steps_csv(const RunReport& report);

/// RFC 4180 reader (quoted fields may span lines).
std::vector<std::vector<std::string>> parse_csv(std::string_view document);

/// Series label for plots, e.g. "window(6)" or "baseline".
std::string series_label(const RunReport& report);

std::string accuracy_svg(std::span<const RunReport> reports, std::span<const std::string> labels);
std::string latency_svg(std::span<const RunReport> reports, std::span<const std::string> labels);

/// Writes run.json, steps.csv, accuracy.svg and latency.svg into `out_dir`.
/// Throws IoError.
void emit_report(const RunReport& report, const std::filesystem::path& out_dir);

/// Overlays several runs (one series each) into accuracy.svg and latency.svg.
void emit_comparison(std::span<const RunReport> reports, std::span<const std::string> labels,
                     const std::filesystem::path& out_dir);

struct StepStats {
    std::size_t step = 0;
    double mean = 0.0;
    double stddev = 0.0;  // population standard deviation
    std::size_t n = 0;
};

/// Per-step mean and standard deviation of per_i over runs, for the steps
/// every run reached.
std::vector<StepStats> accuracy_stats(std::span<const RunReport> runs);

using StatsGroup = std::pair<std::string, std::vector<StepStats>>;

/// Mean accuracy curves, one series per group (e.g. per policy of a sweep).
std::string stats_svg(std::span<const StatsGroup> groups);

/// group,step,mean,stddev,n
std::string stats_csv(std::span<const StatsGroup> groups);

struct RescoreMismatch {
    std::size_t step = 0;
    std::size_t story_id = 0;
    std::size_t q_index = 0;
    bool stored = false;
    bool recomputed = false;
};

/// Re-scores every stored result from raw_answer, gold and the vocabulary.
/// Results carrying an error must be stored as incorrect.
std::vector<RescoreMismatch> rescore(const RunReport& report);

}  // namespace context_drift
