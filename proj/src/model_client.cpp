#include "context_drift/model_client.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "context_drift/errors.hpp"
#include "context_drift/text.hpp"
#include "context_drift/tokens.hpp"

namespace context_drift {

void validate_request(const ChatRequest& request) {
    if (request.messages.empty()) {
        throw std::invalid_argument("chat request has no messages");
    }
    if (request.messages.front().role != Role::system) {
        throw std::invalid_argument("first message of a chat request must be the system message");
    }
}

const std::vector<std::string>& oracle_verbs() {
    static const std::vector<std::string> verbs = [] {
        std::vector<std::string> v = default_verbs();
        v.emplace_back("traveled to");
        v.emplace_back("is in");
        return v;
    }();
    return verbs;
}

std::map<std::string, std::string> replay_context(std::span<const Turn> context, std::span<const std::string> verbs) {
    std::map<std::string, std::string> where;
    for (const Turn& turn : context) {
        if (turn.role != Role::user) {
            continue;
        }
        std::string_view body = turn.text;
        const bool is_story = body.substr(0, kStoryHeader.size()) == kStoryHeader;
        if (is_story) {
            body.remove_prefix(kStoryHeader.size());
        }
        for (std::string_view sentence : text::split_sentences(body)) {
            auto statement = parse_movement(sentence, verbs);
            if (statement) {
                where[statement->actor.name] = statement->destination.name;
            } else if (is_story) {
                throw UnparseableContext("story sentence is not a movement: '" + std::string(sentence) + "'");
            }
        }
    }
    return where;
}

std::string oracle_model_answer(std::span<const Turn> context, std::string_view question_text) {
    const auto subject = parse_where_question(question_text);
    if (!subject) {
        throw UnparseableContext("not a 'Where is <Name>?' question: '" + std::string(question_text) + "'");
    }
    const auto where = replay_context(context);
    const auto it = where.find(subject->name);
    return it == where.end() ? "unknown" : it->second;
}

std::string oracle_summary(std::string_view material) {
    std::vector<std::string> order;
    std::unordered_map<std::string, std::string> where;
    for (std::string_view sentence : text::split_sentences(material)) {
        auto statement = parse_movement(sentence, oracle_verbs());
        if (!statement) {
            continue;
        }
        auto [it, inserted] = where.try_emplace(statement->actor.name, statement->destination.name);
        if (inserted) {
            order.push_back(statement->actor.name);
        } else {
            it->second = statement->destination.name;
        }
    }
    if (order.empty()) {
        return "Nothing to remember.";
    }
    std::vector<std::string> facts;
    facts.reserve(order.size());
    for (const auto& name : order) {
        facts.push_back(render_statement(Entity{name}, "is in", Location{where[name]}));
    }
    return text::join(facts, " ");
}

namespace {

bool is_summary_request(const ChatRequest& request) {
    return request.messages.front().text == summary_instruction();
}

// Questions carried by the final user turn: one, or a batch after the
// "Questions:" header.
std::vector<std::string_view> questions_of(const Turn& last) {
    if (last.role != Role::user) {
        throw UnparseableContext("last message of a question request must come from the user");
    }
    std::string_view body = last.text;
    if (body.substr(0, kQuestionsHeader.size()) != kQuestionsHeader) {
        return {body};
    }
    body.remove_prefix(kQuestionsHeader.size());
    std::vector<std::string_view> out;
    for (auto line : text::split_lines(body)) {
        if (!text::trim(line).empty()) {
            out.push_back(text::trim(line));
        }
    }
    return out;
}

}  // namespace

ScriptedModel::ScriptedModel(std::vector<std::string> answers, bool cycle)
    : answers_(std::move(answers)), cycle_(cycle) {}

ModelAnswer ScriptedModel::complete(const ChatRequest& request) {
    validate_request(request);
    if (cursor_ >= answers_.size() && (!cycle_ || answers_.empty())) {
        throw ScriptExhausted("scripted model ran out of answers after " + std::to_string(cursor_) + " calls");
    }
    const std::string& text = answers_[cursor_ % answers_.size()];
    ++cursor_;
    return ModelAnswer{text, 0, std::nullopt, std::nullopt};
}

ModelAnswer OracleModel::complete(const ChatRequest& request) {
    validate_request(request);
    if (is_summary_request(request)) {
        return ModelAnswer{oracle_summary(request.messages.back().text), 0, std::nullopt, std::nullopt};
    }
    const auto context = request.messages.first(request.messages.size() - 1);
    std::vector<std::string> answers;
    for (auto q : questions_of(request.messages.back())) {
        answers.push_back(oracle_model_answer(context, q));
    }
    return ModelAnswer{text::join(answers, "\n"), 0, std::nullopt, std::nullopt};
}

double ErrorRateCurve::operator()(std::size_t prompt_tokens) const noexcept {
    if (span_tokens <= 0.0) {
        return static_cast<double>(prompt_tokens) >= onset_tokens ? 1.0 : 0.0;
    }
    const double rate = (static_cast<double>(prompt_tokens) - onset_tokens) / span_tokens;
    return std::clamp(rate, 0.0, 1.0);
}

FlakyMockModel::FlakyMockModel(std::uint64_t seed, std::vector<Location> vocabulary, ErrorRateCurve curve)
    : seed_(seed), vocabulary_(std::move(vocabulary)), curve_(curve) {}

std::string FlakyMockModel::maybe_corrupt(const std::string& truth, Rng& rng, double error_rate) const {
    if (rng.unit() >= error_rate) {
        return truth;
    }
    std::vector<const std::string*> wrong;
    for (const auto& loc : vocabulary_) {
        if (loc.name != truth) {
            wrong.push_back(&loc.name);
        }
    }
    if (wrong.empty()) {
        return "unknown";
    }
    return *wrong[rng.below(wrong.size())];
}

ModelAnswer FlakyMockModel::complete(const ChatRequest& request) {
    validate_request(request);
    Rng rng(derive_seed(seed_, "flaky", calls_++));
    if (is_summary_request(request)) {
        return ModelAnswer{oracle_summary(request.messages.back().text), 0, std::nullopt, std::nullopt};
    }
    const double rate = curve_(estimate_request_tokens(request.messages));
    const auto context = request.messages.first(request.messages.size() - 1);
    std::vector<std::string> answers;
    for (auto q : questions_of(request.messages.back())) {
        answers.push_back(maybe_corrupt(oracle_model_answer(context, q), rng, rate));
    }
    return ModelAnswer{text::join(answers, "\n"), 0, std::nullopt, std::nullopt};
}

ModelAnswer SimulatedLatencyModel::complete(const ChatRequest& request) {
    ModelAnswer answer = inner_.complete(request);
    const auto tokens = static_cast<double>(estimate_request_tokens(request.messages));
    answer.latency_ms = static_cast<std::int64_t>(std::llround(ms_per_token_ * tokens));
    return answer;
}

}  // namespace context_drift
