#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "context_drift/story_world.hpp"

namespace context_drift::babi {

// bAbI layout: "<n> <content>" per line; question lines carry
// "<content>\t<answer>\t<supporting ids>". n == 1 starts a new story.

struct RawBabiLine {
    enum class Kind { statement, question };

    std::size_t line_no = 0;
    Kind kind = Kind::statement;
    std::string text;
    std::optional<std::string> answer;
    std::vector<std::size_t> supporting_ids;
};

enum class NonMovementMode { error, skip };

struct ParseOptions {
    NonMovementMode non_movement = NonMovementMode::error;
    std::vector<std::string> verbs;  // empty selects default_verbs()
};

/// Parses a single line. `file_line` is only used for error messages.
RawBabiLine parse_line(std::string_view line, std::size_t file_line);

/// Throws ParseError (with the 1-based file line) on malformed input.
std::vector<Story> parse_babi(std::string_view text, const ParseOptions& options = {});

/// Re-emits stories in the bAbI layout; questions are interleaved at their
/// recorded positions and lines renumbered from 1 per story.
std::string to_babi(const std::vector<Story>& stories);

/// Renaming scoped per (story index, original name).
class NameMapping {
public:
    void add(std::size_t story, const std::string& original, const std::string& replacement);
    const std::string* find(std::size_t story, const std::string& original) const;
    std::size_t size() const noexcept { return pairs_.size(); }
    bool is_injective() const;
    NameMapping inverse() const;

    const std::map<std::pair<std::size_t, std::string>, std::string>& pairs() const noexcept { return pairs_; }

private:
    std::map<std::pair<std::size_t, std::string>, std::string> pairs_;
};

/// Entity names of one story in order of first appearance (actors and
/// question subjects).
std::vector<std::string> entity_names(const Story& story);

/// Every (story, name) scope gets a pool name that is neither an original
/// name anywhere in the corpus nor used by another scope. Deterministic in
/// `seed`. Throws PoolExhausted.
NameMapping build_unique_mapping(const std::vector<Story>& stories, const std::vector<std::string>& name_pool,
                                 std::uint64_t seed);

/// Whole-word renaming of statements, question texts and subjects.
/// Throws IncompleteMapping when a name in a story has no image.
std::vector<Story> substitute_names(const std::vector<Story>& stories, const NameMapping& mapping);

/// Keeps the last two statements and one question about the actor of the
/// final statement. Throws EmptyStory.
Story truncate_story(const Story& story);

/// Mean whitespace-token count per story, statements and questions included.
double mean_story_tokens(const std::vector<Story>& stories);

/// Distinct destinations and gold answers in order of first appearance.
std::vector<Location> collect_locations(const std::vector<Story>& stories);

}  // namespace context_drift::babi
