#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace context_drift {

/// Built-in pool of 320 distinct first names. It deliberately avoids the
/// names used by the bAbI tasks and by the teaching prompt's worked example.
const std::vector<std::string>& default_name_pool();

/// The built-in pool followed by synthetic two-syllable names (e.g. "Dasol")
/// in a fixed order, at least `n` names in total, all distinct. Large bAbI
/// corpora need more distinct names than any list of real ones.
std::vector<std::string> extended_name_pool(std::size_t n);

}  // namespace context_drift
