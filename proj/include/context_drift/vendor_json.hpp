#pragma once

#include "json.hpp"

namespace context_drift {

// Insertion-ordered so emitted documents follow the schema's field order.
using json = nlohmann::ordered_json;

}  // namespace context_drift
