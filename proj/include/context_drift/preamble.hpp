#pragma once

#include <string>

namespace context_drift {

/// The teaching prompt sent as the system message of every session. Byte
/// identical to assets/teaching_prompt.txt.
const std::string& default_preamble();

}  // namespace context_drift
