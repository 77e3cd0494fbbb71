#include "context_drift/tokens.hpp"

#include "context_drift/context_policy.hpp"
#include "context_drift/text.hpp"

namespace context_drift {

std::size_t estimate_tokens(std::string_view text) noexcept { return text::count_ws_tokens(text); }

std::size_t estimate_request_tokens(std::span<const Turn> messages, const TokenEstimator& estimator) {
    std::size_t total = 0;
    for (const Turn& t : messages) {
        total += estimator ? estimator(t.text) : estimate_tokens(t.text);
    }
    return total;
}

}  // namespace context_drift
