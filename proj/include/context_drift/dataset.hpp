#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "context_drift/story_world.hpp"
#include "vendor_json.hpp"

namespace context_drift {

inline constexpr int kDatasetSchemaVersion = 1;

/// A story corpus plus the location vocabulary its answers are scored
/// against. `params` is present for generated corpora.
struct Dataset {
    std::string source = "generated";  // "generated" | "babi"
    std::optional<GenerationParams> params;
    std::vector<Location> locations;
    std::vector<Story> stories;
};

Dataset make_generated_dataset(const GenerationParams& params, std::size_t n_stories);

json to_json(const GenerationParams& params);
GenerationParams generation_params_from_json(const json& j);
json to_json(const Story& story);
Story story_from_json(const json& j);
json to_json(const Dataset& dataset);
Dataset dataset_from_json(const json& j);

/// "sha256:<hex>" over the canonical serialization of the locations and
/// stories. Independent of generation params.
std::string fingerprint(const Dataset& dataset);

std::string sha256_hex(std::string_view data);

Dataset load_dataset(const std::filesystem::path& path);
void save_dataset(const Dataset& dataset, const std::filesystem::path& path);

/// Names appearing in more than one story (empty when globally unique).
std::vector<std::string> names_shared_across_stories(const std::vector<Story>& stories);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace context_drift
