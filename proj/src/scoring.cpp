#include "context_drift/scoring.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "context_drift/text.hpp"

namespace context_drift {

namespace {

std::vector<std::string> answer_tokens(std::string_view raw) {
    std::string cleaned;
    cleaned.reserve(raw.size());
    for (char c : raw) {
        const auto u = static_cast<unsigned char>(c);
        if (c == '\'') {
            continue;
        }
        if (u < 0x80 && std::ispunct(u) != 0) {
            cleaned.push_back(' ');
        } else {
            cleaned.push_back(static_cast<char>(std::tolower(u)));
        }
    }
    std::vector<std::string> tokens;
    for (auto tok : text::split_ws(cleaned)) {
        tokens.emplace_back(tok);
    }
    return tokens;
}

bool is_article(const std::string& token) { return token == "the" || token == "a" || token == "an"; }

}  // namespace

NormalizedAnswer normalize(std::string_view raw, std::span<const Location> vocabulary) {
    std::vector<std::string> tokens = answer_tokens(raw);
    std::size_t first = 0;
    while (first < tokens.size() && is_article(tokens[first])) {
        ++first;
    }

    NormalizedAnswer out;
    for (std::size_t i = first; i < tokens.size(); ++i) {
        if (i > first) {
            out.canonical += ' ';
        }
        out.canonical += tokens[i];
    }

    std::vector<std::vector<std::string>> entries;
    entries.reserve(vocabulary.size());
    for (const auto& loc : vocabulary) {
        entries.push_back(answer_tokens(loc.name));
    }

    std::set<std::size_t> seen;
    std::size_t i = 0;
    while (i < tokens.size()) {
        std::size_t best = vocabulary.size();
        std::size_t best_len = 0;
        for (std::size_t v = 0; v < entries.size(); ++v) {
            const auto& e = entries[v];
            if (e.empty() || e.size() <= best_len || i + e.size() > tokens.size()) {
                continue;
            }
            if (std::equal(e.begin(), e.end(), tokens.begin() + static_cast<std::ptrdiff_t>(i))) {
                best = v;
                best_len = e.size();
            }
        }
        if (best == vocabulary.size()) {
            ++i;
            continue;
        }
        if (seen.insert(best).second) {
            out.matched_locations.push_back(Location{text::to_lower(vocabulary[best].name)});
        }
        i += best_len;
    }
    return out;
}

bool score(std::string_view raw, const Location& gold, std::span<const Location> vocabulary) {
    const NormalizedAnswer n = normalize(raw, vocabulary);
    return n.matched_locations.size() == 1 && n.matched_locations.front().name == text::to_lower(gold.name);
}

}  // namespace context_drift
