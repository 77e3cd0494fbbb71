#include "context_drift/context_policy.hpp"

#include <algorithm>
#include <optional>
#include <set>
#include <stdexcept>

#include "context_drift/errors.hpp"
#include "context_drift/model_client.hpp"

namespace context_drift {

std::string_view to_string(Role role) noexcept {
    switch (role) {
        case Role::system: return "system";
        case Role::user: return "user";
        case Role::assistant: return "assistant";
    }
    return "user";
}

Role role_from_string(std::string_view s) {
    if (s == "system") return Role::system;
    if (s == "user") return Role::user;
    if (s == "assistant") return Role::assistant;
    throw std::invalid_argument("unknown role '" + std::string(s) + "'");
}

std::string_view to_string(TagKind kind) noexcept {
    switch (kind) {
        case TagKind::preamble: return "preamble";
        case TagKind::story: return "story";
        case TagKind::question: return "question";
        case TagKind::answer: return "answer";
        case TagKind::summary: return "summary";
    }
    return "preamble";
}

TagKind tag_kind_from_string(std::string_view s) {
    if (s == "preamble") return TagKind::preamble;
    if (s == "story") return TagKind::story;
    if (s == "question") return TagKind::question;
    if (s == "answer") return TagKind::answer;
    if (s == "summary") return TagKind::summary;
    throw std::invalid_argument("unknown turn tag '" + std::string(s) + "'");
}

std::string_view to_string(QuestionMode mode) noexcept { return mode == QuestionMode::fresh ? "fresh" : "frozen"; }

QuestionMode question_mode_from_string(std::string_view s) {
    if (s == "fresh") return QuestionMode::fresh;
    if (s == "frozen") return QuestionMode::frozen;
    throw std::invalid_argument("unknown question mode '" + std::string(s) + "'");
}

std::string render_story_text(const Story& story) {
    std::string out(kStoryHeader);
    for (std::size_t i = 0; i < story.statements.size(); ++i) {
        if (i > 0) {
            out += ' ';
        }
        out += story.statements[i].surface_text;
    }
    return out;
}

Turn preamble_turn(std::string text) { return Turn{Role::system, std::move(text), Tag{TagKind::preamble, 0, 0}}; }

Turn story_turn(const Story& story) {
    return Turn{Role::user, render_story_text(story), Tag{TagKind::story, story.id, 0}};
}

Turn question_turn(std::size_t story_id, std::size_t q_index, std::string text) {
    return Turn{Role::user, std::move(text), Tag{TagKind::question, story_id, q_index}};
}

Turn answer_turn(std::size_t story_id, std::size_t q_index, std::string text) {
    return Turn{Role::assistant, std::move(text), Tag{TagKind::answer, story_id, q_index}};
}

Turn summary_turn(std::string text) { return Turn{Role::user, std::move(text), Tag{TagKind::summary, 0, 0}}; }

PolicyKind PolicyKind::window(std::size_t k) {
    if (k == 0) {
        throw std::invalid_argument("window size must be at least 1");
    }
    return PolicyKind(Kind::window, k);
}

PolicyKind PolicyKind::parse(std::string_view name, std::size_t window_size) {
    if (name == "accumulate") return accumulate();
    if (name == "summarize") return summarize();
    if (name == "window") return window(window_size);
    throw std::invalid_argument("unknown policy '" + std::string(name) + "' (accumulate|summarize|window)");
}

std::string PolicyKind::name() const {
    switch (kind_) {
        case Kind::accumulate: return "accumulate";
        case Kind::summarize: return "summarize";
        case Kind::window: return "window";
    }
    return "accumulate";
}

std::string PolicyKind::label() const {
    return is_window() ? "window(" + std::to_string(k_) + ")" : name();
}

void validate_history(std::span<const Turn> history) {
    if (history.empty() || history.front().tag.kind != TagKind::preamble || history.front().role != Role::system) {
        throw MalformedHistory("history must start with the system preamble");
    }
    std::optional<std::size_t> last_story;
    for (std::size_t i = 1; i < history.size(); ++i) {
        const Turn& t = history[i];
        const std::string where = "turn " + std::to_string(i) + ": ";
        switch (t.tag.kind) {
            case TagKind::preamble:
                throw MalformedHistory(where + "second preamble");
            case TagKind::story:
                if (t.role != Role::user) {
                    throw MalformedHistory(where + "story turns must come from the user");
                }
                if (last_story && t.tag.story_id <= *last_story) {
                    throw MalformedHistory(where + "story ids must increase");
                }
                last_story = t.tag.story_id;
                break;
            case TagKind::question:
                if (t.role != Role::user) {
                    throw MalformedHistory(where + "questions must come from the user");
                }
                if (!last_story || t.tag.story_id > *last_story) {
                    throw MalformedHistory(where + "question about a story not yet told");
                }
                if (t.tag.q_index == kBatchIndex && t.tag.story_id != *last_story) {
                    throw MalformedHistory(where + "question batch must belong to the latest story");
                }
                break;
            case TagKind::answer: {
                const Turn& prev = history[i - 1];
                if (t.role != Role::assistant) {
                    throw MalformedHistory(where + "answers must come from the assistant");
                }
                if (prev.tag.kind != TagKind::question || prev.tag.story_id != t.tag.story_id ||
                    prev.tag.q_index != t.tag.q_index) {
                    throw MalformedHistory(where + "answer without its question");
                }
                break;
            }
            case TagKind::summary:
                if (t.role == Role::system) {
                    throw MalformedHistory(where + "summary cannot be a system turn");
                }
                break;
        }
    }
}

std::vector<std::size_t> story_ids_in(std::span<const Turn> turns) {
    std::vector<std::size_t> ids;
    for (const Turn& t : turns) {
        if (t.tag.kind == TagKind::story) {
            ids.push_back(t.tag.story_id);
        }
    }
    return ids;
}

std::vector<Turn> render_context(const PolicyKind& policy, std::span<const Turn> history, const Story& new_story,
                                 const Summarizer& summarize) {
    validate_history(history);
    const std::vector<std::size_t> ids = story_ids_in(history);
    if (!ids.empty() && new_story.id <= ids.back()) {
        throw MalformedHistory("new story " + std::to_string(new_story.id) + " is not newer than story " +
                               std::to_string(ids.back()));
    }

    std::vector<Turn> out;
    switch (policy.kind()) {
        case PolicyKind::Kind::accumulate:
            out.assign(history.begin(), history.end());
            break;
        case PolicyKind::Kind::window: {
            const std::size_t keep = policy.window_size() - 1;
            const std::set<std::size_t> kept(ids.end() - static_cast<std::ptrdiff_t>(std::min(keep, ids.size())),
                                             ids.end());
            out.push_back(history.front());
            for (const Turn& t : history.subspan(1)) {
                const bool story_material = t.tag.kind == TagKind::story || t.tag.kind == TagKind::question ||
                                            t.tag.kind == TagKind::answer;
                if (story_material && kept.contains(t.tag.story_id)) {
                    out.push_back(t);
                }
            }
            break;
        }
        case PolicyKind::Kind::summarize: {
            out.push_back(history.front());
            const auto prior = history.subspan(1);
            if (!prior.empty()) {
                if (!summarize) {
                    throw std::invalid_argument("summarize policy needs a summarizer");
                }
                Turn summary = summarize(prior);
                summary.tag = Tag{TagKind::summary, 0, 0};
                out.push_back(std::move(summary));
            }
            break;
        }
    }
    out.push_back(story_turn(new_story));
    return out;
}

const std::string& summary_instruction() {
    static const std::string text =
        "You keep the memory of a chat in which stories about characters moving between places were told. "
        "Rewrite the material below as facts, one per character, giving only the place where each character "
        "is at the end. Use exactly the form '<Name> is in the <place>.' and write nothing else.";
    return text;
}

std::string render_summary_material(std::span<const Turn> turns) {
    std::string out;
    for (std::size_t i = 0; i < turns.size(); ++i) {
        if (i > 0) {
            out += "\n\n";
        }
        out += turns[i].role == Role::assistant ? "Assistant:\n" : "User:\n";
        out += turns[i].text;
    }
    return out;
}

Turn summarize_history(ModelClient& summarizer, std::span<const Turn> turns, const RequestParams& params,
                       ModelAnswer* answer_out) {
    if (turns.empty()) {
        throw std::invalid_argument("nothing to summarize");
    }
    const std::vector<Turn> messages = {
        Turn{Role::system, summary_instruction(), Tag{TagKind::preamble, 0, 0}},
        Turn{Role::user, render_summary_material(turns), Tag{TagKind::summary, 0, 0}},
    };
    ModelAnswer answer = summarizer.complete(ChatRequest{messages, params});
    Turn summary = summary_turn(answer.text);
    if (answer_out != nullptr) {
        *answer_out = std::move(answer);
    }
    return summary;
}

std::vector<ScheduleEntry> question_schedule(const PolicyKind& policy, std::size_t step,
                                             std::span<const Story> stories, bool reask_evicted) {
    if (step >= stories.size()) {
        throw std::out_of_range("schedule step " + std::to_string(step) + " beyond " +
                                std::to_string(stories.size()) + " stories");
    }
    std::vector<ScheduleEntry> out;
    for (std::size_t j = 0; j <= step; ++j) {
        const bool in_buffer = !policy.is_window() || j + policy.window_size() > step;
        const QuestionMode mode = (in_buffer || reask_evicted) ? QuestionMode::fresh : QuestionMode::frozen;
        for (std::size_t q = 0; q < stories[j].questions.size(); ++q) {
            out.push_back(ScheduleEntry{j, q, mode});
        }
    }
    return out;
}

}  // namespace context_drift
