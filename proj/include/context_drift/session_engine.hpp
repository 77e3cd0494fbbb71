#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "context_drift/context_policy.hpp"
#include "context_drift/errors.hpp"
#include "context_drift/dataset.hpp"
#include "context_drift/model_client.hpp"
#include "context_drift/tokens.hpp"

namespace context_drift {

struct SessionConfig {
    std::size_t n_stories = 50;
    PolicyKind policy = PolicyKind::accumulate();
    std::string preamble_text;  // empty selects default_preamble()
    std::size_t max_context_tokens = 2048;
    std::uint64_t seed = 0;
    bool stop_on_budget = false;
    bool batched_questions = false;
    bool reask_evicted = false;
    RequestParams request;
    TokenEstimator estimator;  // empty selects estimate_tokens
};

/// Throws ConfigError on inconsistent settings.
void validate_config(const SessionConfig& config);

struct QuestionResult {
    std::size_t story_id = 0;
    std::size_t q_index = 0;
    std::string question;
    std::string gold;
    std::string raw_answer;
    std::string normalized;
    bool correct = false;
    QuestionMode mode = QuestionMode::fresh;
    std::int64_t latency_ms = 0;
    std::size_t prompt_tokens = 0;
    std::optional<std::string> error;

    friend bool operator==(const QuestionResult&, const QuestionResult&) = default;
};

struct StepRecord {
    std::size_t step = 0;
    std::size_t story_id = 0;
    std::vector<QuestionResult> question_results;
    double cumulative_accuracy = 0.0;  // per_i
    double new_story_accuracy = 0.0;
    std::size_t prompt_tokens = 0;  // largest request of the step
    std::int64_t latency_ms = 0;    // total model time of the step
    std::optional<std::int64_t> reported_prompt_tokens;

    friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

enum class RunMode { baseline, incremental };

std::string_view to_string(RunMode mode) noexcept;
RunMode run_mode_from_string(std::string_view s);

/// Describes the backend for the report; the engine never interprets it.
struct ModelDescriptor {
    std::string backend = "oracle";
    json parameters = json::object();
};

struct RunReport {
    RunMode mode = RunMode::incremental;
    SessionConfig config;
    ModelDescriptor model;
    std::string dataset_fingerprint;
    std::vector<Location> vocabulary;
    std::vector<StepRecord> steps;
    std::vector<Turn> transcript;
    bool budget_exceeded = false;
    double mean_story_tokens = 0.0;
    std::string started_at;
    std::string finished_at;
};

/// Observer for the context rendered at each step, before questions are
/// appended.
using RenderObserver = std::function<void(std::size_t step, std::span<const Turn> rendered)>;

struct RunOptions {
    ModelDescriptor model;
    ModelClient* summarizer = nullptr;  // defaults to the session model
    RenderObserver on_render;
};

/// Fraction of correct results. Throws std::invalid_argument when empty and
/// DuplicateResult when a (story_id, q_index) appears twice.
double compute_per_i(std::span<const QuestionResult> results);

/// As above, additionally requiring exactly one result per schedule entry
/// (MissingResult otherwise).
double compute_per_i(std::span<const QuestionResult> results, std::span<const ScheduleEntry> schedule);

/// One context per story: preamble + story, then its questions. Model errors
/// propagate wrapped in StoryRunError.
RunReport run_baseline(const Dataset& dataset, ModelClient& model, const SessionConfig& config,
                       const RunOptions& options = {});

/// The incremental session: step i injects story i through the policy and
/// asks the scheduled questions. Model errors are recorded per question.
RunReport run_incremental(const Dataset& dataset, ModelClient& model, const SessionConfig& config,
                          const RunOptions& options = {});

class StoryRunError : public Error {
public:
    StoryRunError(std::size_t story_id, std::exception_ptr cause, const std::string& what)
        : Error("story " + std::to_string(story_id) + ": " + what), story_id_(story_id), cause_(std::move(cause)) {}

    std::size_t story_id() const noexcept { return story_id_; }
    const std::exception_ptr& cause() const noexcept { return cause_; }

private:
    std::size_t story_id_;
    std::exception_ptr cause_;
};

}  // namespace context_drift
