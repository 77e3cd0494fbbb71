#include <gtest/gtest.h>

#include <set>

#include "context_drift/babi_ingest.hpp"
#include "context_drift/dataset.hpp"
#include "context_drift/errors.hpp"
#include "context_drift/name_pool.hpp"
#include "context_drift/report.hpp"
#include "context_drift/session_engine.hpp"

using namespace context_drift;

namespace {

Dataset dataset(std::size_t n, std::uint64_t seed = 4, std::size_t questions = 1) {
    GenerationParams p;
    p.seed = seed;
    p.n_actors_per_story = std::max<std::size_t>(2, questions);
    p.n_statements_per_story = std::max<std::size_t>(2, questions);
    p.n_questions_per_story = questions;
    return make_generated_dataset(p, n);
}

SessionConfig config(std::size_t n, PolicyKind policy = PolicyKind::accumulate()) {
    SessionConfig c;
    c.n_stories = n;
    c.policy = policy;
    return c;
}

// Fails the calls whose 0-based index is in `failing`, otherwise defers.
class FailingModel final : public ModelClient {
public:
    FailingModel(ModelClient& inner, std::set<std::size_t> failing, bool auth = false)
        : inner_(inner), failing_(std::move(failing)), auth_(auth) {}

    ModelAnswer complete(const ChatRequest& request) override {
        if (failing_.contains(calls_++)) {
            if (auth_) throw AuthRequired(401, "no key");
            throw TransportError("connection reset");
        }
        return inner_.complete(request);
    }

private:
    ModelClient& inner_;
    std::set<std::size_t> failing_;
    bool auth_;
    std::size_t calls_ = 0;
};

}  // namespace

TEST(Estimator, WhitespaceCount) {
    EXPECT_EQ(estimate_tokens("Mario moved to the school."), 5u);
    EXPECT_EQ(estimate_tokens(""), 0u);
    for (const auto& [a, b] : std::vector<std::pair<std::string, std::string>>{{"a b", "c"}, {"Where is X?", "x  y\nz"}}) {
        EXPECT_EQ(estimate_tokens(a + " " + b), estimate_tokens(a) + estimate_tokens(b));
    }
}

TEST(PerI, Arithmetic) {
    std::vector<QuestionResult> r(4);
    for (std::size_t i = 0; i < 4; ++i) {
        r[i].story_id = i;
        r[i].correct = i != 2;
    }
    EXPECT_DOUBLE_EQ(compute_per_i(r), 0.75);
    r[2].correct = true;
    EXPECT_DOUBLE_EQ(compute_per_i(r), 1.0);
    r[3].story_id = 0;
    EXPECT_THROW(compute_per_i(r), DuplicateResult);
    EXPECT_THROW(compute_per_i(std::vector<QuestionResult>{}), std::invalid_argument);
}

TEST(PerI, MissingScheduledResult) {
    std::vector<QuestionResult> r(1);
    const std::vector<ScheduleEntry> schedule{{0, 0, QuestionMode::fresh}, {1, 0, QuestionMode::fresh}};
    EXPECT_THROW(compute_per_i(r, schedule), MissingResult);
}

TEST(Incremental, OracleIsPerfectUnderEveryPolicy) {
    const Dataset d = dataset(12);
    for (const auto& policy : {PolicyKind::accumulate(), PolicyKind::window(6), PolicyKind::window(1), PolicyKind::summarize()}) {
        for (bool batched : {false, true}) {
            OracleModel oracle;
            SessionConfig c = config(12, policy);
            c.batched_questions = batched;
            const RunReport r = run_incremental(d, oracle, c);
            ASSERT_EQ(r.steps.size(), 12u);
            for (const auto& s : r.steps) EXPECT_EQ(s.cumulative_accuracy, 1.0) << policy.label() << " step " << s.step;
        }
    }
}

TEST(Incremental, OracleWithSeveralQuestionsPerStory) {
    const Dataset d = dataset(8, 9, 3);
    OracleModel oracle;
    const RunReport r = run_incremental(d, oracle, config(8, PolicyKind::summarize()));
    for (const auto& s : r.steps) EXPECT_EQ(s.cumulative_accuracy, 1.0);
}

TEST(Incremental, WrongOnStoryZeroGivesThreeQuarters) {
    const Dataset d = dataset(4);
    std::vector<std::string> script;
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j <= i; ++j) script.push_back(j == 0 ? "nowhere" : d.stories[j].questions[0].gold_answer.name);
    }
    ScriptedModel model(script);
    const RunReport r = run_incremental(d, model, config(4));
    EXPECT_DOUBLE_EQ(r.steps[3].cumulative_accuracy, 0.75);
    EXPECT_DOUBLE_EQ(r.steps[0].cumulative_accuracy, 0.0);
    EXPECT_DOUBLE_EQ(r.steps[1].cumulative_accuracy, 0.5);
}

TEST(Incremental, FreshQuestionsPerStepUnderAccumulate) {
    const Dataset d = dataset(6, 2, 2);
    OracleModel oracle;
    const RunReport r = run_incremental(d, oracle, config(6));
    for (const auto& s : r.steps) {
        EXPECT_EQ(s.question_results.size(), 2 * (s.step + 1));
        for (const auto& q : s.question_results) EXPECT_EQ(q.mode, QuestionMode::fresh);
    }
}

TEST(Incremental, BasicInvariants) {
    const Dataset d = dataset(10);
    ScriptedModel model({"kitchen", "garden", "the park", "I think office"}, true);
    const RunReport r = run_incremental(d, model, config(10));
    EXPECT_DOUBLE_EQ(r.steps[0].cumulative_accuracy, r.steps[0].new_story_accuracy);
    for (std::size_t i = 0; i < r.steps.size(); ++i) {
        const auto& s = r.steps[i];
        EXPECT_EQ(s.step, i);
        EXPECT_GE(s.cumulative_accuracy, 0.0);
        EXPECT_LE(s.cumulative_accuracy, 1.0);
        if (i > 0) EXPECT_GE(s.prompt_tokens, r.steps[i - 1].prompt_tokens);
        std::size_t correct = 0;
        for (const auto& q : s.question_results) correct += q.correct;
        EXPECT_DOUBLE_EQ(s.cumulative_accuracy, static_cast<double>(correct) / s.question_results.size());
    }
}

TEST(Incremental, FrozenAnswersNeverChange) {
    const Dataset d = dataset(14);
    FlakyMockModel model(3, d.locations, ErrorRateCurve{0.0, 300.0});
    const RunReport r = run_incremental(d, model, config(14, PolicyKind::window(4)));
    std::map<std::size_t, QuestionResult> last_fresh;
    std::size_t frozen_seen = 0;
    for (const auto& s : r.steps) {
        EXPECT_EQ(s.question_results.size(), s.step + 1);
        for (const auto& q : s.question_results) {
            const bool should_be_frozen = q.story_id + 4 <= s.step;
            EXPECT_EQ(q.mode == QuestionMode::frozen, should_be_frozen);
            if (q.mode == QuestionMode::fresh) {
                last_fresh[q.story_id] = q;
            } else {
                ++frozen_seen;
                EXPECT_EQ(q.correct, last_fresh.at(q.story_id).correct);
                EXPECT_EQ(q.raw_answer, last_fresh.at(q.story_id).raw_answer);
            }
        }
    }
    EXPECT_GT(frozen_seen, 0u);
}

TEST(Incremental, ReaskEvictedLetsTheOracleFail) {
    const Dataset d = dataset(5);
    OracleModel oracle;
    SessionConfig c = config(5, PolicyKind::window(2));
    c.reask_evicted = true;
    const RunReport r = run_incremental(d, oracle, c);
    EXPECT_DOUBLE_EQ(r.steps[4].cumulative_accuracy, 2.0 / 5.0);
    for (const auto& q : r.steps[4].question_results) {
        EXPECT_EQ(q.mode, QuestionMode::fresh);
        if (q.story_id < 3) EXPECT_EQ(q.raw_answer, "unknown");
    }
}

TEST(Incremental, WindowContextsHoldMinStories) {
    const Dataset d = dataset(10);
    for (std::size_t k : {1u, 3u, 6u, 10u, 20u}) {
        OracleModel oracle;
        RunOptions options;
        options.on_render = [&](std::size_t step, std::span<const Turn> turns) {
            EXPECT_EQ(story_ids_in(turns).size(), std::min(step + 1, k));
        };
        run_incremental(d, oracle, config(10, PolicyKind::window(k)), options);
    }
}

TEST(Incremental, DeterministicUpToVolatileFields) {
    const Dataset d = dataset(10);
    auto once = [&] {
        ScriptedModel model({"kitchen", "garden", "park"}, true);
        return strip_volatile(to_json(run_incremental(d, model, config(10, PolicyKind::window(3)))));
    };
    EXPECT_EQ(once().dump(), once().dump());
}

TEST(Incremental, TransportErrorsAreRecordedAndRunContinues) {
    const Dataset d = dataset(4);
    OracleModel oracle;
    FailingModel model(oracle, {1, 4});
    const RunReport r = run_incremental(d, model, config(4));
    ASSERT_EQ(r.steps.size(), 4u);
    const auto& failed = r.steps[1].question_results[0];
    ASSERT_TRUE(failed.error);
    EXPECT_FALSE(failed.correct);
    EXPECT_EQ(failed.raw_answer.rfind("[error] ", 0), 0u);
    EXPECT_TRUE(r.steps[1].question_results[1].correct);
    EXPECT_TRUE(rescore(r).empty());
}

TEST(Incremental, AuthFailureAborts) {
    const Dataset d = dataset(4);
    OracleModel oracle;
    FailingModel model(oracle, {2}, true);
    try {
        run_incremental(d, model, config(4));
        FAIL();
    } catch (const StoryRunError& e) {
        EXPECT_EQ(e.story_id(), 1u);
        EXPECT_THROW(std::rethrow_exception(e.cause()), AuthRequired);
    }
}

TEST(Incremental, BudgetStopKeepsCompleteSteps) {
    const Dataset d = dataset(30);
    OracleModel oracle;
    SessionConfig c = config(30);
    c.stop_on_budget = true;
    c.max_context_tokens = 2048;
    const RunReport r = run_incremental(d, oracle, c);
    EXPECT_TRUE(r.budget_exceeded);
    ASSERT_FALSE(r.steps.empty());
    EXPECT_LT(r.steps.size(), 30u);
    for (const auto& s : r.steps) EXPECT_LE(s.prompt_tokens, 2048u);
    EXPECT_EQ(r.transcript.back().tag.kind, TagKind::answer);
    EXPECT_EQ(story_ids_in(r.transcript).size(), r.steps.size());
}

TEST(Incremental, WindowStaysWithinBudget) {
    const Dataset d = dataset(50);
    OracleModel oracle;
    SessionConfig c = config(50, PolicyKind::window(6));
    c.stop_on_budget = true;
    const RunReport r = run_incremental(d, oracle, c);
    EXPECT_FALSE(r.budget_exceeded);
    EXPECT_EQ(r.steps.size(), 50u);
}

TEST(Incremental, LatencyIsSummedOverTheStep) {
    const Dataset d = dataset(3);
    OracleModel oracle;
    SimulatedLatencyModel slow(oracle, 1.0);
    const RunReport r = run_incremental(d, slow, config(3));
    for (const auto& s : r.steps) {
        std::int64_t sum = 0;
        for (const auto& q : s.question_results) sum += q.latency_ms;
        EXPECT_EQ(s.latency_ms, sum);
        EXPECT_EQ(s.question_results.back().latency_ms, static_cast<std::int64_t>(s.prompt_tokens));
    }
}

TEST(Incremental, SummaryCallsCountTowardLatency) {
    const Dataset d = dataset(3);
    OracleModel oracle;
    SimulatedLatencyModel slow(oracle, 1.0);
    const RunReport r = run_incremental(d, slow, config(3, PolicyKind::summarize()));
    std::int64_t asked = 0;
    for (const auto& q : r.steps[2].question_results) asked += q.latency_ms;
    EXPECT_GT(r.steps[2].latency_ms, asked);
    std::size_t summaries = 0;
    for (const auto& t : r.transcript) summaries += t.tag.kind == TagKind::summary;
    EXPECT_EQ(summaries, 2u);
}

TEST(Incremental, SeparateSummarizer) {
    const Dataset d = dataset(3);
    OracleModel oracle;
    ScriptedModel summarizer({"Nothing to remember."}, true);
    RunOptions options;
    options.summarizer = &summarizer;
    const RunReport r = run_incremental(d, oracle, config(3, PolicyKind::summarize()), options);
    EXPECT_EQ(summarizer.calls(), 2u);
    EXPECT_LT(r.steps[2].cumulative_accuracy, 1.0);
}

TEST(Incremental, StoriesAreReindexedAndVocabularyCollected) {
    Dataset d = dataset(5);
    d.stories.erase(d.stories.begin());
    d.locations.clear();
    OracleModel oracle;
    const RunReport r = run_incremental(d, oracle, config(3));
    EXPECT_EQ(r.steps[2].story_id, 2u);
    EXPECT_FALSE(r.vocabulary.empty());
}

TEST(Incremental, DatasetTooSmall) {
    const Dataset d = dataset(3);
    OracleModel oracle;
    EXPECT_THROW(run_incremental(d, oracle, config(4)), ConfigError);
}

TEST(Config, Validation) {
    SessionConfig c;
    c.n_stories = 0;
    EXPECT_THROW(validate_config(c), ConfigError);
    c = SessionConfig{};
    c.max_context_tokens = 10;
    EXPECT_THROW(validate_config(c), ConfigError);
    EXPECT_NO_THROW(validate_config(SessionConfig{}));
}

TEST(Baseline, OracleIsPerfectAndScriptedNowhereIsZero) {
    const Dataset d = dataset(10);
    OracleModel oracle;
    const RunReport r = run_baseline(d, oracle, config(10));
    ASSERT_EQ(r.steps.size(), 10u);
    EXPECT_EQ(r.steps.back().cumulative_accuracy, 1.0);
    ScriptedModel nowhere({"nowhere"}, true);
    EXPECT_EQ(run_baseline(d, nowhere, config(10)).steps.back().cumulative_accuracy, 0.0);
}

TEST(Baseline, EachStoryStandsAlone) {
    const Dataset d = dataset(6);
    OracleModel oracle;
    std::size_t stories_seen = 0;
    const RunReport r = run_baseline(d, oracle, config(6));
    for (const auto& t : r.transcript) {
        if (t.tag.kind == TagKind::preamble) stories_seen = 0;
        if (t.tag.kind == TagKind::story) EXPECT_EQ(++stories_seen, 1u);
    }
    for (const auto& s : r.steps) EXPECT_EQ(s.question_results.size(), 1u);
}

TEST(Baseline, AgreesWithIncrementalAtStepZero) {
    const Dataset d = dataset(5, 6, 2);
    ScriptedModel a({"kitchen", "garden", "office"}, true);
    ScriptedModel b({"kitchen", "garden", "office"}, true);
    const RunReport base = run_baseline(d, a, config(5));
    const RunReport inc = run_incremental(d, b, config(5));
    EXPECT_EQ(base.steps[0], inc.steps[0]);
}

TEST(Baseline, ErrorsCarryTheStoryId) {
    const Dataset d = dataset(4);
    OracleModel oracle;
    FailingModel model(oracle, {2});
    try {
        run_baseline(d, model, config(4));
        FAIL();
    } catch (const StoryRunError& e) {
        EXPECT_EQ(e.story_id(), 2u);
        EXPECT_THROW(std::rethrow_exception(e.cause()), TransportError);
    }
}

TEST(Baseline, TruncatedCorpusIsShorter) {
    const auto original = babi::parse_babi(read_file(std::string(CONTEXT_DRIFT_TEST_DATA_DIR) + "/babi_qa1_sample.txt"));
    auto truncated = babi::substitute_names(original, babi::build_unique_mapping(original, extended_name_pool(2000), 1));
    for (auto& s : truncated) s = babi::truncate_story(s);
    Dataset full;
    full.source = "babi";
    full.stories = original;
    Dataset shortd = full;
    shortd.stories = truncated;
    OracleModel o1;
    OracleModel o2;
    const RunReport rf = run_baseline(full, o1, config(original.size()));
    const RunReport rs = run_baseline(shortd, o2, config(truncated.size()));
    EXPECT_LT(rs.mean_story_tokens, rf.mean_story_tokens);
    EXPECT_EQ(rs.steps.back().cumulative_accuracy, 1.0);
}
