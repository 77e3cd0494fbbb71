#include "context_drift/session_engine.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <map>
#include <set>
#include <stdexcept>

#include "context_drift/babi_ingest.hpp"
#include "context_drift/preamble.hpp"
#include "context_drift/scoring.hpp"
#include "context_drift/text.hpp"

namespace context_drift {

std::string_view to_string(RunMode mode) noexcept { return mode == RunMode::baseline ? "baseline" : "incremental"; }

RunMode run_mode_from_string(std::string_view s) {
    if (s == "baseline") return RunMode::baseline;
    if (s == "incremental") return RunMode::incremental;
    throw std::invalid_argument("unknown mode '" + std::string(s) + "' (baseline|incremental)");
}

void validate_config(const SessionConfig& config) {
    if (config.n_stories == 0) {
        throw ConfigError("n_stories must be at least 1");
    }
    if (config.request.max_new_tokens <= 0) {
        throw ConfigError("max_new_tokens must be positive");
    }
    if (config.request.temperature < 0.0) {
        throw ConfigError("temperature must be non-negative");
    }
    const std::string& preamble = config.preamble_text.empty() ? default_preamble() : config.preamble_text;
    const std::size_t preamble_tokens = config.estimator ? config.estimator(preamble) : estimate_tokens(preamble);
    if (config.max_context_tokens < preamble_tokens) {
        throw ConfigError("max_context_tokens " + std::to_string(config.max_context_tokens) +
                          " is smaller than the preamble (" + std::to_string(preamble_tokens) + " tokens)");
    }
}

double compute_per_i(std::span<const QuestionResult> results) {
    if (results.empty()) {
        throw std::invalid_argument("no question results");
    }
    std::set<std::pair<std::size_t, std::size_t>> seen;
    std::size_t correct = 0;
    for (const auto& r : results) {
        if (!seen.insert({r.story_id, r.q_index}).second) {
            throw DuplicateResult("duplicate result for story " + std::to_string(r.story_id) + " question " +
                                  std::to_string(r.q_index));
        }
        correct += r.correct ? 1 : 0;
    }
    return static_cast<double>(correct) / static_cast<double>(results.size());
}

double compute_per_i(std::span<const QuestionResult> results, std::span<const ScheduleEntry> schedule) {
    const double accuracy = compute_per_i(results);
    std::set<std::pair<std::size_t, std::size_t>> have;
    for (const auto& r : results) {
        have.insert({r.story_id, r.q_index});
    }
    for (const auto& e : schedule) {
        if (!have.contains({e.story_id, e.q_index})) {
            throw MissingResult("no result for story " + std::to_string(e.story_id) + " question " +
                                std::to_string(e.q_index));
        }
    }
    if (have.size() != schedule.size()) {
        throw MissingResult("results do not match the schedule");
    }
    return accuracy;
}

namespace {

std::string utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// Raised inside a session when a request would exceed the token budget and
// the run is configured to stop there.
struct BudgetStop {};

bool is_recoverable(const std::exception_ptr& error) {
    try {
        std::rethrow_exception(error);
    } catch (const AuthRequired&) {
        return false;
    } catch (const ScriptExhausted&) {
        return false;
    } catch (const ModelError&) {
        return true;
    } catch (...) {
        return false;
    }
}

std::string describe(const std::exception_ptr& error) {
    try {
        std::rethrow_exception(error);
    } catch (const std::exception& e) {
        return e.what();
    } catch (...) {
        return "unknown error";
    }
}

class Session {
public:
    Session(const Dataset& dataset, ModelClient& model, const SessionConfig& config, const RunOptions& options,
            RunMode mode)
        : model_(model), config_(config), options_(options) {
        validate_config(config_);
        if (dataset.stories.size() < config_.n_stories) {
            throw ConfigError("dataset has " + std::to_string(dataset.stories.size()) + " stories, run needs " +
                              std::to_string(config_.n_stories));
        }
        stories_.assign(dataset.stories.begin(), dataset.stories.begin() + static_cast<std::ptrdiff_t>(config_.n_stories));
        for (std::size_t i = 0; i < stories_.size(); ++i) {
            stories_[i].id = i;
        }
        vocabulary_ = dataset.locations.empty() ? babi::collect_locations(stories_) : dataset.locations;

        report_.mode = mode;
        report_.config = config_;
        if (report_.config.preamble_text.empty()) {
            report_.config.preamble_text = default_preamble();
        }
        report_.model = options_.model;
        report_.dataset_fingerprint = fingerprint(dataset);
        report_.vocabulary = vocabulary_;
        report_.mean_story_tokens = babi::mean_story_tokens(stories_);
    }

    RunReport run_incremental() {
        report_.started_at = utc_now();
        std::vector<Turn> context{preamble_turn(report_.config.preamble_text)};
        report_.transcript = context;

        for (std::size_t step = 0; step < stories_.size(); ++step) {
            const std::size_t transcript_mark = report_.transcript.size();
            try {
                run_step(step, context);
            } catch (const BudgetStop&) {
                report_.transcript.resize(transcript_mark);
                report_.budget_exceeded = true;
                break;
            }
        }
        report_.finished_at = utc_now();
        return std::move(report_);
    }

    RunReport run_baseline() {
        report_.started_at = utc_now();
        std::size_t total = 0;
        std::size_t correct = 0;
        for (std::size_t j = 0; j < stories_.size(); ++j) {
            StepState state;
            std::vector<Turn> context{preamble_turn(report_.config.preamble_text), story_turn(stories_[j])};
            report_.transcript.insert(report_.transcript.end(), context.begin(), context.end());
            state.context_tokens = estimate_request_tokens(context, config_.estimator);

            std::vector<ScheduleEntry> schedule;
            for (std::size_t q = 0; q < stories_[j].questions.size(); ++q) {
                schedule.push_back(ScheduleEntry{j, q, QuestionMode::fresh});
            }
            std::vector<QuestionResult> results;
            try {
                results = ask(schedule, j, context, state, /*recover=*/false);
            } catch (const BudgetStop&) {
                report_.budget_exceeded = true;
                break;
            } catch (const std::exception& e) {
                throw StoryRunError(j, std::current_exception(), e.what());
            }

            StepRecord record = make_record(j, j, std::move(results), state);
            for (const auto& r : record.question_results) {
                ++total;
                correct += r.correct ? 1 : 0;
            }
            record.cumulative_accuracy = total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
            report_.steps.push_back(std::move(record));
        }
        report_.finished_at = utc_now();
        return std::move(report_);
    }

private:
    struct StepState {
        std::size_t context_tokens = 0;
        std::size_t max_prompt_tokens = 0;
        std::int64_t latency_ms = 0;
        std::optional<std::int64_t> reported_prompt_tokens;
    };

    void run_step(std::size_t step, std::vector<Turn>& context) {
        const Story& story = stories_[step];
        StepState state;

        Summarizer summarize;
        if (config_.policy.kind() == PolicyKind::Kind::summarize) {
            ModelClient& summarizer = options_.summarizer != nullptr ? *options_.summarizer : model_;
            summarize = [&](std::span<const Turn> prior) {
                ModelAnswer raw;
                Turn summary;
                try {
                    summary = summarize_history(summarizer, prior, config_.request, &raw);
                } catch (const std::exception& e) {
                    throw StoryRunError(step, std::current_exception(), std::string("summarization failed: ") + e.what());
                }
                state.latency_ms += raw.latency_ms;
                report_.transcript.push_back(summary);
                return summary;
            };
        }

        std::vector<Turn> rendered = render_context(config_.policy, context, story, summarize);
        report_.transcript.push_back(rendered.back());
        if (options_.on_render) {
            options_.on_render(step, rendered);
        }
        state.context_tokens = estimate_request_tokens(rendered, config_.estimator);

        const auto schedule = question_schedule(config_.policy, step, stories_, config_.reask_evicted);
        std::vector<ScheduleEntry> fresh;
        for (const auto& e : schedule) {
            if (e.mode == QuestionMode::fresh) {
                fresh.push_back(e);
            }
        }

        std::vector<QuestionResult> asked;
        try {
            asked = ask(fresh, step, rendered, state, /*recover=*/true);
        } catch (const BudgetStop&) {
            throw;
        } catch (const StoryRunError&) {
            throw;
        } catch (const std::exception& e) {
            throw StoryRunError(step, std::current_exception(), e.what());
        }

        std::map<std::pair<std::size_t, std::size_t>, QuestionResult> by_key;
        for (auto& r : asked) {
            last_fresh_[{r.story_id, r.q_index}] = r;
            by_key[{r.story_id, r.q_index}] = std::move(r);
        }
        std::vector<QuestionResult> results;
        results.reserve(schedule.size());
        for (const auto& e : schedule) {
            if (e.mode == QuestionMode::fresh) {
                results.push_back(std::move(by_key.at({e.story_id, e.q_index})));
                continue;
            }
            const auto it = last_fresh_.find({e.story_id, e.q_index});
            if (it == last_fresh_.end()) {
                throw std::logic_error("frozen question was never asked");
            }
            QuestionResult frozen = it->second;
            frozen.mode = QuestionMode::frozen;
            frozen.latency_ms = 0;
            frozen.prompt_tokens = 0;
            results.push_back(std::move(frozen));
        }

        StepRecord record = make_record(step, step, std::move(results), state);
        record.cumulative_accuracy = compute_per_i(record.question_results, schedule);
        report_.steps.push_back(std::move(record));
        context = std::move(rendered);
    }

    StepRecord make_record(std::size_t step, std::size_t story_id, std::vector<QuestionResult> results,
                           const StepState& state) const {
        StepRecord record;
        record.step = step;
        record.story_id = story_id;
        std::size_t own = 0;
        std::size_t own_correct = 0;
        for (const auto& r : results) {
            if (r.story_id == story_id) {
                ++own;
                own_correct += r.correct ? 1 : 0;
            }
        }
        record.new_story_accuracy = own == 0 ? 0.0 : static_cast<double>(own_correct) / static_cast<double>(own);
        record.question_results = std::move(results);
        record.prompt_tokens = state.max_prompt_tokens;
        record.latency_ms = state.latency_ms;
        record.reported_prompt_tokens = state.reported_prompt_tokens;
        return record;
    }

    QuestionResult blank_result(const ScheduleEntry& e) const {
        const Question& q = stories_[e.story_id].questions[e.q_index];
        QuestionResult r;
        r.story_id = e.story_id;
        r.q_index = e.q_index;
        r.question = std::string(text::trim(q.text));
        r.gold = q.gold_answer.name;
        r.mode = QuestionMode::fresh;
        return r;
    }

    void finish_result(QuestionResult& r, const std::string& raw) const {
        r.raw_answer = raw;
        r.normalized = normalize(raw, vocabulary_).canonical;
        r.correct = !r.error && score(raw, Location{r.gold}, vocabulary_);
    }

    // Sends one request whose final message was just appended to `context`.
    // Returns nullopt when a recoverable model error was recorded in `error`.
    std::optional<ModelAnswer> send(std::vector<Turn>& context, StepState& state, std::size_t& prompt_tokens,
                                    std::optional<std::string>& error, bool recover) {
        prompt_tokens = state.context_tokens;
        state.max_prompt_tokens = std::max(state.max_prompt_tokens, prompt_tokens);
        if (config_.stop_on_budget && prompt_tokens > config_.max_context_tokens) {
            throw BudgetStop{};
        }
        try {
            ModelAnswer answer = model_.complete(ChatRequest{context, config_.request});
            state.latency_ms += answer.latency_ms;
            if (answer.reported_prompt_tokens) {
                state.reported_prompt_tokens =
                    std::max(state.reported_prompt_tokens.value_or(0), *answer.reported_prompt_tokens);
            }
            return answer;
        } catch (...) {
            const auto current = std::current_exception();
            if (!recover || !is_recoverable(current)) {
                throw;
            }
            error = describe(current);
            return std::nullopt;
        }
    }

    void push(std::vector<Turn>& context, StepState& state, Turn turn) {
        state.context_tokens += config_.estimator ? config_.estimator(turn.text) : estimate_tokens(turn.text);
        report_.transcript.push_back(turn);
        context.push_back(std::move(turn));
    }

    std::vector<QuestionResult> ask(const std::vector<ScheduleEntry>& entries, std::size_t step,
                                    std::vector<Turn>& context, StepState& state, bool recover) {
        std::vector<QuestionResult> results;
        if (entries.empty()) {
            return results;
        }
        if (config_.batched_questions) {
            std::vector<std::string> lines;
            for (const auto& e : entries) {
                results.push_back(blank_result(e));
                lines.push_back(results.back().question);
            }
            push(context, state, question_turn(step, kBatchIndex, std::string(kQuestionsHeader) + text::join(lines, "\n")));
            std::size_t prompt_tokens = 0;
            std::optional<std::string> error;
            const auto answer = send(context, state, prompt_tokens, error, recover);
            std::vector<std::string> replies;
            if (answer) {
                push(context, state, answer_turn(step, kBatchIndex, answer->text));
                for (auto line : text::split_lines(answer->text)) {
                    if (!text::trim(line).empty()) {
                        replies.emplace_back(text::trim(line));
                    }
                }
            }
            for (std::size_t k = 0; k < results.size(); ++k) {
                auto& r = results[k];
                r.prompt_tokens = prompt_tokens;
                r.latency_ms = answer ? answer->latency_ms : 0;
                r.error = error;
                finish_result(r, error ? "[error] " + *error : (k < replies.size() ? replies[k] : std::string()));
            }
            return results;
        }

        for (const auto& e : entries) {
            QuestionResult r = blank_result(e);
            push(context, state, question_turn(e.story_id, e.q_index, r.question));
            const auto answer = send(context, state, r.prompt_tokens, r.error, recover);
            if (answer) {
                push(context, state, answer_turn(e.story_id, e.q_index, answer->text));
                r.latency_ms = answer->latency_ms;
                finish_result(r, answer->text);
            } else {
                finish_result(r, "[error] " + *r.error);
            }
            results.push_back(std::move(r));
        }
        return results;
    }

    ModelClient& model_;
    SessionConfig config_;
    RunOptions options_;
    std::vector<Story> stories_;
    std::vector<Location> vocabulary_;
    RunReport report_;
    std::map<std::pair<std::size_t, std::size_t>, QuestionResult> last_fresh_;
};

}  // namespace

RunReport run_baseline(const Dataset& dataset, ModelClient& model, const SessionConfig& config,
                       const RunOptions& options) {
    if (dataset.stories.empty()) {
        throw ConfigError("dataset is empty");
    }
    return Session(dataset, model, config, options, RunMode::baseline).run_baseline();
}

RunReport run_incremental(const Dataset& dataset, ModelClient& model, const SessionConfig& config,
                          const RunOptions& options) {
    return Session(dataset, model, config, options, RunMode::incremental).run_incremental();
}

}  // namespace context_drift
