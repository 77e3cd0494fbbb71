#include "context_drift/babi_ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <limits>
#include <set>
#include <unordered_map>

#include "context_drift/errors.hpp"
#include "context_drift/rng.hpp"
#include "context_drift/text.hpp"

namespace context_drift::babi {

namespace {

bool parse_uint(std::string_view s, std::size_t& out) {
    if (s.empty() || !std::all_of(s.begin(), s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
        return false;
    }
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

std::vector<std::string_view> split_tabs(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (std::size_t tab = s.find('\t'); tab != std::string_view::npos; tab = s.find('\t', start)) {
        out.push_back(s.substr(start, tab - start));
        start = tab + 1;
    }
    out.push_back(s.substr(start));
    return out;
}

// Replaces every maximal word that is a key of `images`, all at once, so a
// mapping and its inverse compose to the identity.
std::string replace_words(std::string_view s, const std::unordered_map<std::string, std::string>& images) {
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        if (!text::is_word_char(s[i])) {
            out.push_back(s[i++]);
            continue;
        }
        const std::size_t start = i;
        while (i < s.size() && text::is_word_char(s[i])) {
            ++i;
        }
        const std::string word(s.substr(start, i - start));
        const auto it = images.find(word);
        out += it == images.end() ? word : it->second;
    }
    return out;
}

}  // namespace

RawBabiLine parse_line(std::string_view line, std::size_t file_line) {
    if (!line.empty() && line.back() == '\r') {
        line.remove_suffix(1);
    }
    const std::size_t space = line.find(' ');
    RawBabiLine raw;
    if (space == std::string_view::npos || !parse_uint(line.substr(0, space), raw.line_no)) {
        throw ParseError(file_line, "expected '<line number> <text>'");
    }
    if (raw.line_no == 0) {
        throw ParseError(file_line, "line numbers start at 1");
    }
    const std::string_view content = line.substr(space + 1);
    if (content.find('\t') != std::string_view::npos) {
        const auto fields = split_tabs(content);
        raw.kind = RawBabiLine::Kind::question;
        raw.text = std::string(fields[0]);
        if (fields.size() < 2 || text::trim(fields[1]).empty()) {
            throw ParseError(file_line, "question without answer field");
        }
        raw.answer = std::string(text::trim(fields[1]));
        if (fields.size() > 2) {
            for (auto tok : text::split_ws(fields[2])) {
                std::size_t id = 0;
                if (!parse_uint(tok, id)) {
                    throw ParseError(file_line, "supporting fact id '" + std::string(tok) + "' is not a number");
                }
                raw.supporting_ids.push_back(id);
            }
        }
        return raw;
    }
    if (text::trim(content).empty()) {
        throw ParseError(file_line, "empty line content");
    }
    if (text::trim(content).back() == '?') {
        throw ParseError(file_line, "question without answer field");
    }
    raw.kind = RawBabiLine::Kind::statement;
    raw.text = std::string(content);
    return raw;
}

std::vector<Story> parse_babi(std::string_view input, const ParseOptions& options) {
    const std::vector<std::string>& verbs = options.verbs.empty() ? default_verbs() : options.verbs;
    const bool skip = options.non_movement == NonMovementMode::skip;

    std::vector<Story> stories;
    std::unordered_map<std::size_t, std::size_t> renumbered;  // source line -> emitted line
    std::size_t emitted = 0;
    std::size_t previous_no = 0;

    const auto lines = text::split_lines(input);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::size_t file_line = i + 1;
        if (text::trim(lines[i]).empty()) {
            continue;
        }
        RawBabiLine raw = parse_line(lines[i], file_line);
        if (raw.line_no == 1) {
            stories.push_back(Story{stories.size(), {}, {}});
            renumbered.clear();
            emitted = 0;
        } else if (stories.empty()) {
            throw ParseError(file_line, "first story does not start at line 1");
        } else if (raw.line_no <= previous_no) {
            throw ParseError(file_line, "line numbers must increase within a story");
        }
        previous_no = raw.line_no;
        Story& story = stories.back();

        if (raw.kind == RawBabiLine::Kind::statement) {
            auto statement = parse_movement(raw.text, verbs);
            if (!statement) {
                if (skip) {
                    continue;
                }
                throw ParseError(file_line, "not a movement statement: '" + raw.text + "'");
            }
            statement->surface_text = raw.text;
            story.statements.push_back(std::move(*statement));
            renumbered[raw.line_no] = ++emitted;
            continue;
        }

        auto subject = parse_where_question(raw.text);
        if (!subject) {
            if (skip) {
                continue;
            }
            throw ParseError(file_line, "not a 'Where is <Name>?' question: '" + raw.text + "'");
        }
        Question q;
        q.text = raw.text;
        q.subject = std::move(*subject);
        q.gold_answer = Location{text::to_lower(*raw.answer)};
        q.position = story.statements.size();
        for (std::size_t id : raw.supporting_ids) {
            if (id >= raw.line_no) {
                throw ParseError(file_line, "supporting fact " + std::to_string(id) + " does not precede the question");
            }
            if (auto it = renumbered.find(id); it != renumbered.end()) {
                q.supporting_ids.push_back(it->second);
            }
        }
        story.questions.push_back(std::move(q));
        ++emitted;
    }
    return stories;
}

std::string to_babi(const std::vector<Story>& stories) {
    std::string out;
    for (const Story& story : stories) {
        std::size_t n = 0;
        std::size_t next_question = 0;
        auto emit_questions_at = [&](std::size_t position) {
            while (next_question < story.questions.size() && story.questions[next_question].position <= position) {
                const Question& q = story.questions[next_question++];
                out += std::to_string(++n) + " " + q.text + "\t" + q.gold_answer.name + "\t";
                for (std::size_t k = 0; k < q.supporting_ids.size(); ++k) {
                    out += (k > 0 ? " " : "") + std::to_string(q.supporting_ids[k]);
                }
                out += '\n';
            }
        };
        for (std::size_t k = 0; k < story.statements.size(); ++k) {
            emit_questions_at(k);
            out += std::to_string(++n) + " " + story.statements[k].surface_text + "\n";
        }
        emit_questions_at(std::numeric_limits<std::size_t>::max());
    }
    return out;
}

void NameMapping::add(std::size_t story, const std::string& original, const std::string& replacement) {
    pairs_[{story, original}] = replacement;
}

const std::string* NameMapping::find(std::size_t story, const std::string& original) const {
    const auto it = pairs_.find({story, original});
    return it == pairs_.end() ? nullptr : &it->second;
}

bool NameMapping::is_injective() const {
    std::set<std::string> images;
    for (const auto& [scope, image] : pairs_) {
        if (!images.insert(image).second) {
            return false;
        }
    }
    return true;
}

NameMapping NameMapping::inverse() const {
    NameMapping inv;
    for (const auto& [scope, image] : pairs_) {
        inv.add(scope.first, image, scope.second);
    }
    return inv;
}

std::vector<std::string> entity_names(const Story& story) {
    std::vector<std::string> names;
    std::set<std::string> seen;
    auto note = [&](const std::string& name) {
        if (seen.insert(name).second) {
            names.push_back(name);
        }
    };
    for (const auto& s : story.statements) {
        note(s.actor.name);
    }
    for (const auto& q : story.questions) {
        note(q.subject.name);
    }
    return names;
}

NameMapping build_unique_mapping(const std::vector<Story>& stories, const std::vector<std::string>& name_pool,
                                 std::uint64_t seed) {
    std::vector<std::vector<std::string>> scopes;
    std::set<std::string> originals;
    std::size_t needed = 0;
    for (const Story& story : stories) {
        scopes.push_back(entity_names(story));
        originals.insert(scopes.back().begin(), scopes.back().end());
        needed += scopes.back().size();
    }

    std::vector<std::string> candidates;
    std::set<std::string> taken;
    for (const auto& name : name_pool) {
        if (!originals.contains(name) && taken.insert(name).second) {
            candidates.push_back(name);
        }
    }
    if (candidates.size() < needed) {
        throw PoolExhausted("renaming needs " + std::to_string(needed) + " unused names, pool offers " +
                            std::to_string(candidates.size()));
    }
    Rng rng(derive_seed(seed, "rename", 0));
    rng.shuffle(candidates);

    NameMapping mapping;
    std::size_t next = 0;
    for (std::size_t i = 0; i < scopes.size(); ++i) {
        for (const auto& name : scopes[i]) {
            mapping.add(i, name, candidates[next++]);
        }
    }
    return mapping;
}

std::vector<Story> substitute_names(const std::vector<Story>& stories, const NameMapping& mapping) {
    std::vector<Story> out;
    out.reserve(stories.size());
    for (std::size_t i = 0; i < stories.size(); ++i) {
        std::unordered_map<std::string, std::string> images;
        for (const auto& name : entity_names(stories[i])) {
            const std::string* image = mapping.find(i, name);
            if (image == nullptr) {
                throw IncompleteMapping("story " + std::to_string(i) + ": no replacement for '" + name + "'");
            }
            images.emplace(name, *image);
        }
        Story renamed = stories[i];
        for (auto& s : renamed.statements) {
            s.actor.name = images.at(s.actor.name);
            s.surface_text = replace_words(s.surface_text, images);
        }
        for (auto& q : renamed.questions) {
            q.subject.name = images.at(q.subject.name);
            q.text = replace_words(q.text, images);
        }
        out.push_back(std::move(renamed));
    }
    return out;
}

Story truncate_story(const Story& story) {
    if (story.statements.empty()) {
        throw EmptyStory("story " + std::to_string(story.id) + " has no statements");
    }
    const std::size_t keep = std::min<std::size_t>(2, story.statements.size());
    Story out;
    out.id = story.id;
    out.statements.assign(story.statements.end() - static_cast<std::ptrdiff_t>(keep), story.statements.end());

    const Entity& last_actor = out.statements.back().actor;
    Question q;
    q.text = render_question(last_actor);
    q.subject = last_actor;
    q.gold_answer = final_location(out, last_actor);
    q.position = out.statements.size();
    q.supporting_ids = {out.statements.size()};
    out.questions.push_back(std::move(q));
    return out;
}

double mean_story_tokens(const std::vector<Story>& stories) {
    if (stories.empty()) {
        return 0.0;
    }
    std::size_t total = 0;
    for (const Story& story : stories) {
        for (const auto& s : story.statements) {
            total += text::count_ws_tokens(s.surface_text);
        }
        for (const auto& q : story.questions) {
            total += text::count_ws_tokens(q.text);
        }
    }
    return static_cast<double>(total) / static_cast<double>(stories.size());
}

std::vector<Location> collect_locations(const std::vector<Story>& stories) {
    std::vector<Location> out;
    std::set<std::string> seen;
    auto note = [&](const Location& loc) {
        if (seen.insert(loc.name).second) {
            out.push_back(loc);
        }
    };
    for (const Story& story : stories) {
        for (const auto& s : story.statements) {
            note(s.destination);
        }
        for (const auto& q : story.questions) {
            note(q.gold_answer);
        }
    }
    return out;
}

}  // namespace context_drift::babi
