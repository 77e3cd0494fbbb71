#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "context_drift/story_world.hpp"

namespace context_drift {

struct NormalizedAnswer {
    std::string canonical;                   // lowercase, no punctuation, no leading article
    std::vector<Location> matched_locations;  // distinct, in order of first appearance
};

/// Lowercases, strips punctuation, drops a leading "the"/"a"/"an", then
/// finds vocabulary members occurring as whole words (longest first at each
/// position).
NormalizedAnswer normalize(std::string_view raw, std::span<const Location> vocabulary);

/// Correct iff exactly one known location is mentioned and it is `gold`.
bool score(std::string_view raw, const Location& gold, std::span<const Location> vocabulary);

}  // namespace context_drift
