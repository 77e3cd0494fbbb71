#include <gtest/gtest.h>

#include <set>

#include "../oracles/replay_oracle.hpp"
#include "context_drift/babi_ingest.hpp"
#include "context_drift/dataset.hpp"
#include "context_drift/errors.hpp"
#include "context_drift/name_pool.hpp"
#include "context_drift/text.hpp"

using namespace context_drift;

namespace {

std::string sample_text() { return read_file(std::string(CONTEXT_DRIFT_TEST_DATA_DIR) + "/babi_qa1_sample.txt"); }

Story story_of(const std::vector<std::string>& sentences) {
    Story s;
    for (const auto& text : sentences) s.statements.push_back(*parse_movement(text, default_verbs()));
    return s;
}

std::vector<std::string> surfaces(const Story& story) {
    std::vector<std::string> out;
    for (const auto& st : story.statements) out.push_back(st.surface_text);
    return out;
}

std::vector<std::string> pool_names(std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(default_name_pool()[i]);
    return out;
}

}  // namespace

TEST(ParseLine, StatementAndQuestion) {
    const auto s = babi::parse_line("1 Mary moved to the bathroom.", 1);
    EXPECT_EQ(s.line_no, 1u);
    EXPECT_EQ(s.kind, babi::RawBabiLine::Kind::statement);
    EXPECT_EQ(s.text, "Mary moved to the bathroom.");
    const auto q = babi::parse_line("12 Where is Mary? \tbathroom\t1 11", 5);
    EXPECT_EQ(q.kind, babi::RawBabiLine::Kind::question);
    EXPECT_EQ(q.answer, "bathroom");
    EXPECT_EQ(q.supporting_ids, (std::vector<std::size_t>{1, 11}));
}

TEST(ParseBabi, SingleStory) {
    const auto stories = babi::parse_babi("1 Mary moved to the bathroom.\n2 Where is Mary?\tbathroom\t1");
    ASSERT_EQ(stories.size(), 1u);
    ASSERT_EQ(stories[0].statements.size(), 1u);
    ASSERT_EQ(stories[0].questions.size(), 1u);
    EXPECT_EQ(stories[0].questions[0].gold_answer.name, "bathroom");
    EXPECT_EQ(stories[0].questions[0].subject.name, "Mary");
}

TEST(ParseBabi, LineNumberResetStartsNewStory) {
    const auto stories = babi::parse_babi(
        "1 Mary moved to the bathroom.\n2 Where is Mary?\tbathroom\t1\n"
        "1 John went to the hallway.\n2 Where is John?\thallway\t1\n");
    ASSERT_EQ(stories.size(), 2u);
    EXPECT_EQ(stories[1].statements[0].actor.name, "John");
    EXPECT_EQ(stories[1].id, 1u);
}

TEST(ParseBabi, MalformedPrefixReportsLine) {
    try {
        babi::parse_babi("1 Mary moved to the bathroom.\nx Mary moved.\n");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2u);
    }
}

TEST(ParseBabi, QuestionWithoutAnswerIsAnError) {
    EXPECT_THROW(babi::parse_babi("1 Mary moved to the bathroom.\n2 Where is Mary?\n"), ParseError);
}

TEST(ParseBabi, NonMovementModes) {
    const std::string text = "1 Mary picked up the football.\n2 Mary went to the garden.\n3 Where is Mary?\tgarden\t2\n";
    EXPECT_THROW(babi::parse_babi(text), ParseError);
    babi::ParseOptions skip;
    skip.non_movement = babi::NonMovementMode::skip;
    const auto stories = babi::parse_babi(text, skip);
    ASSERT_EQ(stories.size(), 1u);
    EXPECT_EQ(stories[0].statements.size(), 1u);
    EXPECT_EQ(stories[0].questions[0].supporting_ids, (std::vector<std::size_t>{1}));
}

TEST(ParseBabi, SampleCorpusRoundTripsThroughEmitter) {
    const std::string text = sample_text();
    const auto stories = babi::parse_babi(text);
    EXPECT_EQ(stories.size(), 120u);
    EXPECT_EQ(babi::to_babi(stories), text);
    EXPECT_EQ(babi::parse_babi(babi::to_babi(stories)), stories);
}

TEST(ParseBabi, SampleGoldsAgreeWithReplayOracleAtEachQuestion) {
    for (const auto& story : babi::parse_babi(sample_text())) {
        const auto all = surfaces(story);
        for (const auto& q : story.questions) {
            const std::vector<std::string> prefix(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(q.position));
            EXPECT_EQ(replay_oracle::answer(prefix, q.subject.name).value_or("?"), q.gold_answer.name);
        }
    }
}

TEST(Substitute, DirectReplacement) {
    Story s = story_of({"Mary moved to the bathroom."});
    s.questions.push_back(Question{"Where is Mary?", Entity{"Mary"}, Location{"bathroom"}, 1, {1}});
    babi::NameMapping m;
    m.add(0, "Mary", "Zorana");
    const auto out = babi::substitute_names({s}, m);
    EXPECT_EQ(out[0].statements[0].surface_text, "Zorana moved to the bathroom.");
    EXPECT_EQ(out[0].statements[0].actor.name, "Zorana");
    EXPECT_EQ(out[0].questions[0].text, "Where is Zorana?");
    EXPECT_EQ(out[0].questions[0].subject.name, "Zorana");
}

TEST(Substitute, WholeWordsOnly) {
    Story s;
    s.statements.push_back(MovementStatement{Entity{"Mary"}, "moved to", Location{"Maryland"}, "Mary moved to the Maryland."});
    babi::NameMapping m;
    m.add(0, "Mary", "Zorana");
    EXPECT_EQ(babi::substitute_names({s}, m)[0].statements[0].surface_text, "Zorana moved to the Maryland.");
}

TEST(Substitute, IncompleteMapping) {
    const Story s = story_of({"Mary moved to the bathroom.", "John went to the park."});
    babi::NameMapping m;
    m.add(0, "Mary", "Zorana");
    EXPECT_THROW(babi::substitute_names({s}, m), IncompleteMapping);
}

TEST(Substitute, InverseRestoresCorpusAndTokenCounts) {
    const auto stories = babi::parse_babi(sample_text());
    const auto pool = extended_name_pool(2000);
    const auto mapping = babi::build_unique_mapping(stories, pool, 4);
    ASSERT_TRUE(mapping.is_injective());
    const auto renamed = babi::substitute_names(stories, mapping);
    EXPECT_EQ(babi::substitute_names(renamed, mapping.inverse()), stories);
    for (std::size_t i = 0; i < stories.size(); ++i) {
        for (std::size_t j = 0; j < stories[i].statements.size(); ++j) {
            const auto& a = stories[i].statements[j].surface_text;
            const auto& b = renamed[i].statements[j].surface_text;
            EXPECT_EQ(text::count_ws_tokens(a), text::count_ws_tokens(b));
            EXPECT_EQ(a.back(), b.back());
        }
    }
}

TEST(UniqueMapping, TwoStoriesSameNamesGetFourReplacements) {
    const Story a = story_of({"Mary moved to the bathroom.", "John went to the park."});
    const auto m = babi::build_unique_mapping({a, a}, pool_names(10), 1);
    EXPECT_EQ(m.size(), 4u);
    std::set<std::string> images;
    for (const auto& [key, image] : m.pairs()) images.insert(image);
    EXPECT_EQ(images.size(), 4u);
    EXPECT_FALSE(images.contains("Mary"));
    EXPECT_FALSE(images.contains("John"));
}

TEST(UniqueMapping, ExactPoolIsConsumed) {
    const Story a = story_of({"Mary moved to the bathroom.", "John went to the park."});
    const auto m = babi::build_unique_mapping({a}, pool_names(2), 1);
    EXPECT_EQ(m.size(), 2u);
    EXPECT_THROW(babi::build_unique_mapping({a}, pool_names(1), 1), PoolExhausted);
}

TEST(UniqueMapping, PoolEntriesEqualToOriginalsAreSkipped) {
    const Story a = story_of({"Mary moved to the bathroom."});
    EXPECT_THROW(babi::build_unique_mapping({a}, {"Mary"}, 1), PoolExhausted);
}

TEST(UniqueMapping, DeterministicInSeed) {
    const auto stories = babi::parse_babi(sample_text());
    const auto pool = extended_name_pool(2000);
    EXPECT_EQ(babi::build_unique_mapping(stories, pool, 9).pairs(), babi::build_unique_mapping(stories, pool, 9).pairs());
    EXPECT_NE(babi::build_unique_mapping(stories, pool, 9).pairs(), babi::build_unique_mapping(stories, pool, 10).pairs());
}

TEST(Truncate, KeepsLastTwoAndAsksAboutFinalActor) {
    const Story s = story_of({"Ann moved to the kitchen.", "Bob went to the garden.", "Ann travelled to the office."});
    const Story t = babi::truncate_story(s);
    ASSERT_EQ(t.statements.size(), 2u);
    EXPECT_EQ(t.statements[0].surface_text, "Bob went to the garden.");
    EXPECT_EQ(t.statements[1].surface_text, "Ann travelled to the office.");
    ASSERT_EQ(t.questions.size(), 1u);
    EXPECT_EQ(t.questions[0].text, "Where is Ann?");
    EXPECT_EQ(t.questions[0].gold_answer.name,
              replay_oracle::answer(surfaces(t), "Ann").value_or("?"));
}

TEST(Truncate, TwoStatementStoryRederivesQuestion) {
    Story s = story_of({"Ann moved to the kitchen.", "Bob went to the garden."});
    s.questions.push_back(Question{"Where is Ann?", Entity{"Ann"}, Location{"kitchen"}, 2, {1}});
    const Story t = babi::truncate_story(s);
    EXPECT_EQ(t.statements, s.statements);
    ASSERT_EQ(t.questions.size(), 1u);
    EXPECT_EQ(t.questions[0].subject.name, "Bob");
    EXPECT_EQ(t.questions[0].gold_answer.name, "garden");
}

TEST(Truncate, SingleStatementIsKept) {
    const Story t = babi::truncate_story(story_of({"Cy moved to the hall."}));
    ASSERT_EQ(t.statements.size(), 1u);
    EXPECT_EQ(t.questions[0].text, "Where is Cy?");
    EXPECT_EQ(t.questions[0].gold_answer.name, "hall");
}

TEST(Truncate, EmptyStoryThrows) { EXPECT_THROW(babi::truncate_story(Story{}), EmptyStory); }

TEST(Transform, SamplePipelineInvariants) {
    const auto original = babi::parse_babi(sample_text());
    const auto pool = extended_name_pool(2000);
    auto stories = babi::substitute_names(original, babi::build_unique_mapping(original, pool, 0));
    for (auto& s : stories) s = babi::truncate_story(s);
    EXPECT_TRUE(names_shared_across_stories(stories).empty());
    for (const auto& s : stories) {
        EXPECT_LE(s.statements.size(), 2u);
        ASSERT_EQ(s.questions.size(), 1u);
        EXPECT_EQ(replay_oracle::answer(surfaces(s), s.questions[0].subject.name).value_or("?"),
                  s.questions[0].gold_answer.name);
    }
    EXPECT_LT(babi::mean_story_tokens(stories), babi::mean_story_tokens(original));
}

TEST(Locations, CollectedInOrderOfAppearance) {
    const Story s = story_of({"Ann moved to the kitchen.", "Bob went to the garden.", "Ann went to the kitchen."});
    const auto locs = babi::collect_locations({s});
    ASSERT_EQ(locs.size(), 2u);
    EXPECT_EQ(locs[0].name, "kitchen");
    EXPECT_EQ(locs[1].name, "garden");
}
