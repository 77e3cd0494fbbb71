#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "context_drift/context_policy.hpp"
#include "context_drift/rng.hpp"
#include "context_drift/story_world.hpp"

namespace context_drift {

struct RequestParams {
    double temperature = 0.7;
    int max_new_tokens = 16;
    std::string model_name = "vicuna-13b";
};

/// Non-owning view of the messages for one completion; valid for the
/// duration of ModelClient::complete.
struct ChatRequest {
    std::span<const Turn> messages;
    RequestParams params;
};

/// Throws std::invalid_argument unless the request has messages and the
/// first one is a system message.
void validate_request(const ChatRequest& request);

struct ModelAnswer {
    std::string text;
    std::int64_t latency_ms = 0;
    std::optional<std::int64_t> reported_prompt_tokens;
    std::optional<std::int64_t> reported_completion_tokens;
};

class ModelClient {
public:
    virtual ~ModelClient() = default;
    virtual ModelAnswer complete(const ChatRequest& request) = 0;
};

// Batched questions share one user turn: "Questions:\n" + one question per
// line. Replies are read one answer per line.
inline constexpr std::string_view kQuestionsHeader = "Questions:\n";

/// Verbs the oracle understands: the generation verbs, "traveled to", and
/// the "is in" of summary facts.
const std::vector<std::string>& oracle_verbs();

/// Entity -> location after replaying the movement sentences visible in
/// `context`. Only user turns are read. Turns starting with the story header
/// must parse completely (UnparseableContext otherwise); other user turns
/// contribute whatever sentences parse as movements. System and assistant
/// turns are ignored.
std::map<std::string, std::string> replay_context(std::span<const Turn> context,
                                                  std::span<const std::string> verbs = oracle_verbs());

/// Perfect-memory answer: the subject's last destination in the rendered
/// context, or "unknown". Throws UnparseableContext if the question is not
/// "Where is <Name>?".
std::string oracle_model_answer(std::span<const Turn> context, std::string_view question_text);

/// Facts "<Name> is in the <location>." for every entity in `material`, in
/// order of first appearance. Lenient: unparseable sentences are skipped.
std::string oracle_summary(std::string_view material);

/// Replays a fixed list of answers; answer j depends only on j.
class ScriptedModel final : public ModelClient {
public:
    explicit ScriptedModel(std::vector<std::string> answers, bool cycle = false);

    ModelAnswer complete(const ChatRequest& request) override;
    std::size_t calls() const noexcept { return cursor_; }

private:
    std::vector<std::string> answers_;
    bool cycle_;
    std::size_t cursor_ = 0;
};

/// Answers from the rendered context alone, so it is sensitive to eviction.
/// Requests whose system message is the summary instruction get
/// oracle_summary() of the material.
class OracleModel final : public ModelClient {
public:
    ModelAnswer complete(const ChatRequest& request) override;
};

/// Error probability as a function of prompt tokens:
/// clamp((tokens - onset) / span, 0, 1).
struct ErrorRateCurve {
    double onset_tokens = 0.0;
    double span_tokens = 10000.0;

    double operator()(std::size_t prompt_tokens) const noexcept;
};

/// Oracle whose answers go wrong with a probability that grows with the
/// prompt size. Call j draws from derive_seed(seed, "flaky", j), so two
/// instances with the same seed fed the same requests agree exactly.
/// Summaries are produced without errors.
class FlakyMockModel final : public ModelClient {
public:
    FlakyMockModel(std::uint64_t seed, std::vector<Location> vocabulary, ErrorRateCurve curve = {});

    ModelAnswer complete(const ChatRequest& request) override;

private:
    std::string maybe_corrupt(const std::string& truth, Rng& rng, double error_rate) const;

    std::uint64_t seed_;
    std::vector<Location> vocabulary_;
    ErrorRateCurve curve_;
    std::size_t calls_ = 0;
};

/// Sets latency_ms = round(ms_per_token * prompt tokens) on the wrapped
/// model's answers; a deterministic stand-in for generation time.
class SimulatedLatencyModel final : public ModelClient {
public:
    SimulatedLatencyModel(ModelClient& inner, double ms_per_token) : inner_(inner), ms_per_token_(ms_per_token) {}

    ModelAnswer complete(const ChatRequest& request) override;

private:
    ModelClient& inner_;
    double ms_per_token_;
};

}  // namespace context_drift
