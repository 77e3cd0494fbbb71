#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string_view>

namespace context_drift {

struct Turn;

/// Whitespace-delimited token count; the harness-wide default estimator.
std::size_t estimate_tokens(std::string_view text) noexcept;

using TokenEstimator = std::function<std::size_t(std::string_view)>;

/// Sum of the estimator over every message text.
std::size_t estimate_request_tokens(std::span<const Turn> messages, const TokenEstimator& estimator = {});

}  // namespace context_drift
