#include <gtest/gtest.h>

#include <filesystem>

#include "context_drift/babi_ingest.hpp"
#include "context_drift/dataset.hpp"
#include "context_drift/errors.hpp"

using namespace context_drift;

namespace {

std::filesystem::path temp_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("context_drift_test_" + name);
    std::filesystem::remove_all(dir);
    return dir;
}

}  // namespace

TEST(Sha256, KnownAnswers) {
    EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Dataset, JsonRoundTrip) {
    GenerationParams p;
    p.seed = 7;
    p.n_statements_per_story = 4;
    const Dataset d = make_generated_dataset(p, 12);
    const Dataset back = dataset_from_json(to_json(d));
    EXPECT_EQ(back.stories, d.stories);
    EXPECT_EQ(back.locations, d.locations);
    EXPECT_EQ(back.params, d.params);
    EXPECT_EQ(fingerprint(back), fingerprint(d));
}

TEST(Dataset, FingerprintIsStableAndContentSensitive) {
    GenerationParams p;
    p.seed = 7;
    const Dataset a = make_generated_dataset(p, 50);
    const Dataset b = make_generated_dataset(p, 50);
    EXPECT_EQ(fingerprint(a), fingerprint(b));
    EXPECT_EQ(fingerprint(a).rfind("sha256:", 0), 0u);
    Dataset c = a;
    c.stories[3].questions[0].gold_answer.name = "nowhere";
    EXPECT_NE(fingerprint(a), fingerprint(c));
}

TEST(Dataset, SaveAndLoad) {
    const auto dir = temp_dir("dataset");
    GenerationParams p;
    p.seed = 3;
    const Dataset d = make_generated_dataset(p, 5);
    save_dataset(d, dir / "nested" / "dataset.json");
    const Dataset back = load_dataset(dir / "nested" / "dataset.json");
    EXPECT_EQ(fingerprint(back), fingerprint(d));
    std::filesystem::remove_all(dir);
}

TEST(Dataset, LoadMissingFileThrowsIoError) {
    EXPECT_THROW(load_dataset("/nonexistent/context_drift/dataset.json"), IoError);
}

TEST(Dataset, RejectsWrongSchemaVersion) {
    GenerationParams p;
    json j = to_json(make_generated_dataset(p, 2));
    j["schema_version"] = 99;
    EXPECT_THROW(dataset_from_json(j), ConfigError);
}

TEST(Dataset, SharedNamesDetected) {
    GenerationParams p;
    p.seed = 2;
    EXPECT_TRUE(names_shared_across_stories(make_generated_dataset(p, 50).stories).empty());
    p.unique_names = false;
    p.name_pool = {"Ann", "Bob", "Cid"};
    EXPECT_FALSE(names_shared_across_stories(make_generated_dataset(p, 10).stories).empty());
}

TEST(Dataset, GeneratedDatasetCarriesVocabulary) {
    GenerationParams p;
    const Dataset d = make_generated_dataset(p, 20);
    EXPECT_EQ(d.locations.size(), default_locations().size());
    for (const auto& s : d.stories) {
        for (const auto& q : s.questions) {
            EXPECT_NE(std::find(d.locations.begin(), d.locations.end(), q.gold_answer), d.locations.end());
        }
    }
}
