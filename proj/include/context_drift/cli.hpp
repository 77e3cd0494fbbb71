#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "context_drift/report.hpp"
#include "context_drift/session_engine.hpp"
#include "context_drift/vendor_json.hpp"

namespace context_drift::cli {

enum ExitCode : int { kExitOk = 0, kExitCheckFailed = 1, kExitUsage = 2, kExitTransport = 3 };

// Flaky backend defaults. Errors start around the size of the first prompt
// with the default preamble and reach certainty about 20 stories later.
inline constexpr double kDefaultFlakyOnsetTokens = 240.0;
inline constexpr double kDefaultFlakySpanTokens = 800.0;

/// Everything needed to reproduce a run. Loaded from a JSON file and then
/// overridden by command-line flags.
struct RunManifest {
    std::optional<std::filesystem::path> dataset_path;  // generated from `seed` when absent
    std::string mode = "incremental";                   // baseline | incremental
    std::string policy = "accumulate";                  // accumulate | window | summarize
    std::optional<std::size_t> window_size;
    std::string model = "oracle";  // oracle | scripted | flaky | http
    json model_params = json::object();

    std::size_t n_stories = 50;
    std::uint64_t seed = 0;
    std::size_t max_context_tokens = 2048;
    bool stop_on_budget = false;
    bool batched_questions = false;
    bool reask_evicted = false;
    double temperature = 0.7;
    int max_new_tokens = 16;
    std::string model_name = "vicuna-13b";
    std::optional<std::filesystem::path> preamble_file;
    std::filesystem::path out = "runs/latest";

    friend bool operator==(const RunManifest&, const RunManifest&) = default;
};

json to_json(const RunManifest& manifest);

/// Unknown keys are rejected so that typos do not silently fall back to
/// defaults. Throws ConfigError.
RunManifest manifest_from_json(const json& j);
RunManifest load_manifest(const std::filesystem::path& path);

/// Throws ConfigError on inconsistent combinations (window_size without
/// policy=window, unknown backend, missing script file, ...).
void validate_manifest(const RunManifest& manifest);

SessionConfig session_config(const RunManifest& manifest);

/// Dataset named by the manifest, or a generated one of n_stories stories.
Dataset resolve_dataset(const RunManifest& manifest);

/// Fresh model instance for one session (scripted and flaky models keep
/// per-session cursors).
struct ModelHandle {
    std::unique_ptr<ModelClient> inner;
    std::unique_ptr<ModelClient> wrapper;  // latency simulation, if requested
    ModelDescriptor descriptor;

    ModelClient& client() { return wrapper ? *wrapper : *inner; }
};

ModelHandle make_model(const RunManifest& manifest, const Dataset& dataset);

/// Runs the session the manifest describes. Does not write artifacts.
RunReport execute(const RunManifest& manifest);

struct SelftestOptions {
    std::optional<std::filesystem::path> dataset;
    std::optional<std::filesystem::path> run_json;
};

/// Prints one line per check; returns kExitOk iff all pass.
int selftest(const SelftestOptions& options, std::ostream& out);

/// Entry point used by tools/main.cpp.
int run_cli(int argc, char** argv);

}  // namespace context_drift::cli
