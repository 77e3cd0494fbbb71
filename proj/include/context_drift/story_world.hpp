#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace context_drift {

/// A character in a story. Names are capitalized and contain no whitespace.
struct Entity {
    std::string name;

    friend auto operator<=>(const Entity&, const Entity&) = default;
};

/// A place an entity can be, stored lowercase ("bedroom", "living room").
struct Location {
    std::string name;

    friend auto operator<=>(const Location&, const Location&) = default;
};

bool is_valid_entity_name(std::string_view name) noexcept;

struct MovementStatement {
    Entity actor;
    std::string verb_phrase;
    Location destination;
    std::string surface_text;

    friend bool operator==(const MovementStatement&, const MovementStatement&) = default;
};

struct Question {
    std::string text;  // "Where is <Name>?"
    Entity subject;
    Location gold_answer;
    // Statements preceding the question in its source layout. Generated and
    // truncated stories ask after the last statement.
    std::size_t position = 0;
    std::vector<std::size_t> supporting_ids;

    friend bool operator==(const Question&, const Question&) = default;
};

struct Story {
    std::size_t id = 0;
    std::vector<MovementStatement> statements;
    std::vector<Question> questions;

    friend bool operator==(const Story&, const Story&) = default;
};

const std::vector<std::string>& default_verbs();
const std::vector<std::string>& default_locations();

struct GenerationParams {
    std::size_t n_actors_per_story = 2;
    std::size_t n_statements_per_story = 2;
    std::size_t n_questions_per_story = 1;
    std::vector<std::string> name_pool;      // empty selects the built-in pool
    std::vector<std::string> location_pool;  // empty selects default_locations()
    std::vector<std::string> verb_pool;      // empty selects default_verbs()
    std::uint64_t seed = 0;
    bool unique_names = true;

    friend bool operator==(const GenerationParams&, const GenerationParams&) = default;
};

// ---------------------------------------------------------------------------
// Surface grammar: "<Actor> <verb phrase> the <location>."

std::string render_statement(const Entity& actor, std::string_view verb_phrase, const Location& destination);
MovementStatement make_statement(const Entity& actor, std::string_view verb_phrase, const Location& destination);
std::string render_question(const Entity& subject);

/// Parses one sentence of the surface grammar. The verb phrase must be one of
/// `verbs` (longest match wins); the article before the location is optional.
/// Returns nullopt when the sentence does not have that shape.
std::optional<MovementStatement> parse_movement(std::string_view sentence, std::span<const std::string> verbs);

/// Subject of a "Where is <Name>?" question, or nullopt.
std::optional<Entity> parse_where_question(std::string_view question);

// ---------------------------------------------------------------------------
// World model

/// Destination of the last statement whose actor is `subject`.
/// Throws UnknownEntity if the subject never moves.
Location final_location(const Story& story, const Entity& subject);
Location final_location(std::span<const MovementStatement> statements, const Entity& subject);

/// Deterministic story `story_id` for `params`; a pure function of both.
/// In unique-names mode story k takes names [k*A, (k+1)*A) of the name pool
/// shuffled under derive_seed(seed, "names", 0), so stories never share a
/// name. Throws PoolExhausted when the pool runs out and
/// std::invalid_argument for inconsistent parameters.
Story generate_story(const GenerationParams& params, std::size_t story_id);

std::vector<Story> generate_dataset(const GenerationParams& params, std::size_t n_stories);

/// Resolves empty pools to the built-in defaults.
GenerationParams with_default_pools(GenerationParams params);

}  // namespace context_drift
