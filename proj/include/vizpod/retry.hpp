/// @file retry.hpp
/// @brief Exponential backoff for retryable provider errors.
#pragma once

#include <chrono>
#include <functional>
#include <string_view>

#include "vizpod/error.hpp"

namespace vizpod {

struct RetryPolicy {
    int max_attempts = 4;
    std::chrono::milliseconds initial_backoff{500};
    double multiplier = 2.0;
    std::chrono::milliseconds max_backoff{8000};
    /// Replaceable so tests do not sleep.
    std::function<void(std::chrono::milliseconds)> sleep;

    std::chrono::milliseconds backoff_for(int attempt) const;
    void wait(int attempt) const;

    static RetryPolicy no_wait(int attempts = 4);
};

void detail_log_retry(std::string_view what, int attempt, std::string_view message);

/// Calls fn until it succeeds, a non-retryable Error escapes, or attempts run out.
template <typename F>
auto with_retry(const RetryPolicy& policy, F&& fn, std::string_view what = {}) -> decltype(fn()) {
    for (int attempt = 1;; ++attempt) {
        try {
            return fn();
        } catch (const Error& e) {
            if (!e.retryable() || attempt >= policy.max_attempts) throw;
            detail_log_retry(what, attempt, e.what());
            policy.wait(attempt);
        }
    }
}

}  // namespace vizpod
