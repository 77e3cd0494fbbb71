#include "context_drift/story_world.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <stdexcept>

#include "context_drift/errors.hpp"
#include "context_drift/name_pool.hpp"
#include "context_drift/rng.hpp"
#include "context_drift/text.hpp"

namespace context_drift {

const std::vector<std::string>& default_verbs() {
    static const std::vector<std::string> verbs = {"moved to", "went to", "travelled to", "journeyed to",
                                                   "went back to"};
    return verbs;
}

const std::vector<std::string>& default_locations() {
    static const std::vector<std::string> locations = {"bathroom", "bedroom", "cafeteria", "garden", "hallway",
                                                       "kitchen",  "library", "office",    "park",   "school"};
    return locations;
}

bool is_valid_entity_name(std::string_view name) noexcept {
    if (name.empty() || std::isupper(static_cast<unsigned char>(name.front())) == 0) {
        return false;
    }
    return std::all_of(name.begin(), name.end(), [](char c) {
        const auto u = static_cast<unsigned char>(c);
        return std::isalpha(u) != 0 || c == '-' || c == '\'' || u >= 0x80;
    });
}

std::string render_statement(const Entity& actor, std::string_view verb_phrase, const Location& destination) {
    std::string out = actor.name;
    out += ' ';
    out += verb_phrase;
    out += " the ";
    out += destination.name;
    out += '.';
    return out;
}

MovementStatement make_statement(const Entity& actor, std::string_view verb_phrase, const Location& destination) {
    return MovementStatement{actor, std::string(verb_phrase), destination,
                             render_statement(actor, verb_phrase, destination)};
}

std::string render_question(const Entity& subject) { return "Where is " + subject.name + "?"; }

std::optional<MovementStatement> parse_movement(std::string_view sentence, std::span<const std::string> verbs) {
    const std::string_view surface = text::trim(sentence);
    std::string_view s = surface;
    if (!s.empty() && s.back() == '.') {
        s.remove_suffix(1);
    }
    s = text::trim(s);

    const std::size_t space = s.find(' ');
    if (space == std::string_view::npos) {
        return std::nullopt;
    }
    const std::string_view actor = s.substr(0, space);
    if (!is_valid_entity_name(actor)) {
        return std::nullopt;
    }
    std::string_view rest = s.substr(space + 1);

    const std::string* verb = nullptr;
    for (const auto& candidate : verbs) {
        if (rest.size() > candidate.size() && rest.substr(0, candidate.size()) == candidate &&
            rest[candidate.size()] == ' ' && (verb == nullptr || candidate.size() > verb->size())) {
            verb = &candidate;
        }
    }
    if (verb == nullptr) {
        return std::nullopt;
    }
    rest = text::trim(rest.substr(verb->size()));
    if (rest.substr(0, 4) == "the ") {
        rest = text::trim(rest.substr(4));
    }
    if (rest.empty() || rest.find_first_of(".?!,;:") != std::string_view::npos) {
        return std::nullopt;
    }
    return MovementStatement{Entity{std::string(actor)}, *verb, Location{text::to_lower(rest)}, std::string(surface)};
}

std::optional<Entity> parse_where_question(std::string_view question) {
    std::string_view s = text::trim(question);
    constexpr std::string_view prefix = "Where is ";
    if (s.size() <= prefix.size() + 1 || s.substr(0, prefix.size()) != prefix || s.back() != '?') {
        return std::nullopt;
    }
    const std::string_view name = text::trim(s.substr(prefix.size(), s.size() - prefix.size() - 1));
    if (!is_valid_entity_name(name)) {
        return std::nullopt;
    }
    return Entity{std::string(name)};
}

Location final_location(std::span<const MovementStatement> statements, const Entity& subject) {
    for (auto it = statements.rbegin(); it != statements.rend(); ++it) {
        if (it->actor == subject) {
            return it->destination;
        }
    }
    throw UnknownEntity("entity '" + subject.name + "' never moves in the story");
}

Location final_location(const Story& story, const Entity& subject) {
    return final_location(std::span<const MovementStatement>(story.statements), subject);
}

GenerationParams with_default_pools(GenerationParams params) {
    if (params.name_pool.empty()) {
        params.name_pool = default_name_pool();
    }
    if (params.location_pool.empty()) {
        params.location_pool = default_locations();
    }
    if (params.verb_pool.empty()) {
        params.verb_pool = default_verbs();
    }
    return params;
}

namespace {

void validate(const GenerationParams& p) {
    if (p.n_actors_per_story == 0 || p.n_statements_per_story == 0 || p.n_questions_per_story == 0) {
        throw std::invalid_argument("actors, statements and questions per story must be positive");
    }
    if (p.n_questions_per_story > p.n_actors_per_story) {
        throw std::invalid_argument("more questions per story than actors");
    }
    if (p.n_questions_per_story > p.n_statements_per_story) {
        throw std::invalid_argument("more questions per story than statements (each question needs a mover)");
    }
    std::set<std::string> seen;
    for (const auto& name : p.name_pool) {
        if (!is_valid_entity_name(name)) {
            throw std::invalid_argument("invalid entity name in pool: '" + name + "'");
        }
        if (!seen.insert(name).second) {
            throw std::invalid_argument("duplicate name in pool: '" + name + "'");
        }
    }
    for (const auto& loc : p.location_pool) {
        if (text::trim(loc).empty() || loc != text::to_lower(loc)) {
            throw std::invalid_argument("locations must be non-empty lowercase phrases: '" + loc + "'");
        }
    }
    for (const auto& verb : p.verb_pool) {
        if (text::trim(verb).empty()) {
            throw std::invalid_argument("empty verb phrase in pool");
        }
    }
}

std::vector<std::string> story_actors(const GenerationParams& p, std::size_t story_id) {
    const std::size_t a = p.n_actors_per_story;
    if (p.unique_names) {
        if (p.name_pool.size() < (story_id + 1) * a) {
            throw PoolExhausted("name pool of " + std::to_string(p.name_pool.size()) + " cannot give story " +
                                std::to_string(story_id) + " " + std::to_string(a) + " unused names");
        }
        std::vector<std::string> order = p.name_pool;
        Rng rng(derive_seed(p.seed, "names", 0));
        rng.shuffle(order);
        return {order.begin() + static_cast<std::ptrdiff_t>(story_id * a),
                order.begin() + static_cast<std::ptrdiff_t>((story_id + 1) * a)};
    }
    if (p.name_pool.size() < a) {
        throw PoolExhausted("name pool smaller than actors per story");
    }
    std::vector<std::string> order = p.name_pool;
    Rng rng(derive_seed(p.seed, "actors", story_id));
    rng.shuffle(order);
    order.resize(a);
    return order;
}

}  // namespace

Story generate_story(const GenerationParams& raw_params, std::size_t story_id) {
    const GenerationParams p = with_default_pools(raw_params);
    validate(p);

    const std::vector<std::string> actors = story_actors(p, story_id);
    const std::size_t n_statements = p.n_statements_per_story;
    Rng rng(derive_seed(p.seed, "story", story_id));

    // Every actor moves at least once when there are enough statements.
    const std::size_t movers = std::min(actors.size(), n_statements);
    std::vector<std::size_t> actor_seq;
    actor_seq.reserve(n_statements);
    for (std::size_t k = 0; k < movers; ++k) {
        actor_seq.push_back(k);
    }
    while (actor_seq.size() < n_statements) {
        actor_seq.push_back(static_cast<std::size_t>(rng.below(actors.size())));
    }
    rng.shuffle(actor_seq);

    Story story;
    story.id = story_id;
    story.statements.reserve(n_statements);
    for (std::size_t k = 0; k < n_statements; ++k) {
        const auto& verb = p.verb_pool[rng.below(p.verb_pool.size())];
        const auto& loc = p.location_pool[rng.below(p.location_pool.size())];
        story.statements.push_back(make_statement(Entity{actors[actor_seq[k]]}, verb, Location{loc}));
    }

    // Subjects: the final statement's actor first, then earlier movers by
    // recency.
    std::set<std::string> asked;
    for (std::size_t k = n_statements; k-- > 0 && story.questions.size() < p.n_questions_per_story;) {
        const Entity& who = story.statements[k].actor;
        if (!asked.insert(who.name).second) {
            continue;
        }
        Question q;
        q.text = render_question(who);
        q.subject = who;
        q.gold_answer = final_location(story, who);
        q.position = n_statements;
        q.supporting_ids = {k + 1};
        story.questions.push_back(std::move(q));
    }
    return story;
}

std::vector<Story> generate_dataset(const GenerationParams& raw_params, std::size_t n_stories) {
    if (n_stories == 0) {
        throw std::invalid_argument("n_stories must be at least 1");
    }
    const GenerationParams p = with_default_pools(raw_params);
    validate(p);
    if (p.unique_names && p.name_pool.size() < n_stories * p.n_actors_per_story) {
        throw PoolExhausted("unique names need " + std::to_string(n_stories * p.n_actors_per_story) +
                            " pool entries, have " + std::to_string(p.name_pool.size()));
    }
    std::vector<Story> stories;
    stories.reserve(n_stories);
    for (std::size_t id = 0; id < n_stories; ++id) {
        stories.push_back(generate_story(p, id));
    }
    return stories;
}

}  // namespace context_drift
