#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "context_drift/story_world.hpp"

namespace context_drift {

class ModelClient;
struct RequestParams;
struct ModelAnswer;

enum class Role { system, user, assistant };

std::string_view to_string(Role role) noexcept;
Role role_from_string(std::string_view s);

enum class TagKind { preamble, story, question, answer, summary };

std::string_view to_string(TagKind kind) noexcept;
TagKind tag_kind_from_string(std::string_view s);

// q_index value of question/answer turns that carry a whole batch of
// questions in one message.
inline constexpr std::size_t kBatchIndex = std::numeric_limits<std::size_t>::max();

/// Provenance of a turn. Question and answer turns belong to the story they
/// ask about; batched ones belong to the story injected at that step.
struct Tag {
    TagKind kind = TagKind::preamble;
    std::size_t story_id = 0;
    std::size_t q_index = 0;

    friend bool operator==(const Tag&, const Tag&) = default;
};

struct Turn {
    Role role = Role::user;
    std::string text;
    Tag tag;

    friend bool operator==(const Turn&, const Turn&) = default;
};

Turn preamble_turn(std::string text);
Turn story_turn(const Story& story);
Turn question_turn(std::size_t story_id, std::size_t q_index, std::string text);
Turn answer_turn(std::size_t story_id, std::size_t q_index, std::string text);
Turn summary_turn(std::string text);

/// "Story:\n" followed by the statements separated by single spaces.
std::string render_story_text(const Story& story);

inline constexpr std::string_view kStoryHeader = "Story:\n";

class PolicyKind {
public:
    enum class Kind { accumulate, summarize, window };

    static PolicyKind accumulate() { return PolicyKind(Kind::accumulate, 0); }
    static PolicyKind summarize() { return PolicyKind(Kind::summarize, 0); }
    /// Throws std::invalid_argument for k == 0.
    static PolicyKind window(std::size_t k);

    /// Parses "accumulate", "summarize" or "window" (with `window_size`).
    static PolicyKind parse(std::string_view name, std::size_t window_size = kDefaultWindow);

    Kind kind() const noexcept { return kind_; }
    std::size_t window_size() const noexcept { return k_; }
    bool is_window() const noexcept { return kind_ == Kind::window; }

    std::string name() const;   // "accumulate" | "summarize" | "window"
    std::string label() const;  // "window(6)" etc., used as series labels

    static constexpr std::size_t kDefaultWindow = 6;

    friend bool operator==(const PolicyKind&, const PolicyKind&) = default;

private:
    PolicyKind(Kind kind, std::size_t k) : kind_(kind), k_(k) {}

    Kind kind_;
    std::size_t k_;
};

/// Produces the summary turn that replaces prior material under Summarize.
using Summarizer = std::function<Turn(std::span<const Turn>)>;

/// Throws MalformedHistory when `history` is not a well-formed transcript:
/// a single leading system preamble, increasing story ids, questions only
/// about stories already seen, answers right after their question.
void validate_history(std::span<const Turn> history);

/// Context for the step that injects `new_story`:
///   accumulate: history + new story
///   window(k):  preamble + turns of the k-1 most recent stories + new story
///   summarize:  preamble + summarize(prior turns) + new story
/// Summarize needs `summarize` whenever there is prior material.
std::vector<Turn> render_context(const PolicyKind& policy, std::span<const Turn> history, const Story& new_story,
                                 const Summarizer& summarize = {});

/// Version tag of the fixed summarization instruction, recorded in reports.
inline constexpr std::string_view kSummaryInstructionVersion = "summary-v1";
const std::string& summary_instruction();

/// Text handed to the summarizer: each turn as "<Role>:\n<text>", separated
/// by blank lines.
std::string render_summary_material(std::span<const Turn> turns);

/// Summary turn whose text is the summarizer's completion over the fixed
/// instruction (system) and the rendered material (user). Throws
/// std::invalid_argument on an empty span; model errors propagate.
/// `answer_out`, when given, receives the raw completion (latency, usage).
Turn summarize_history(ModelClient& summarizer, std::span<const Turn> turns, const RequestParams& params,
                       ModelAnswer* answer_out = nullptr);

enum class QuestionMode { fresh, frozen };

std::string_view to_string(QuestionMode mode) noexcept;
QuestionMode question_mode_from_string(std::string_view s);

struct ScheduleEntry {
    std::size_t story_id = 0;
    std::size_t q_index = 0;
    QuestionMode mode = QuestionMode::fresh;

    friend bool operator==(const ScheduleEntry&, const ScheduleEntry&) = default;
};

/// Questions of stories 0..step in story order. Under window(k) questions of
/// stories that left the buffer are frozen unless `reask_evicted` is set.
std::vector<ScheduleEntry> question_schedule(const PolicyKind& policy, std::size_t step,
                                             std::span<const Story> stories, bool reask_evicted = false);

/// Story ids of the story-tagged turns, in order.
std::vector<std::size_t> story_ids_in(std::span<const Turn> turns);

}  // namespace context_drift
