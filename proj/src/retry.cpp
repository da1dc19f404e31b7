#include "vizpod/retry.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <thread>

namespace vizpod {

std::chrono::milliseconds RetryPolicy::backoff_for(int attempt) const {
    const double scaled = static_cast<double>(initial_backoff.count()) * std::pow(multiplier, attempt - 1);
    const auto ms = static_cast<long long>(std::min(scaled, static_cast<double>(max_backoff.count())));
    return std::chrono::milliseconds(ms);
}

void RetryPolicy::wait(int attempt) const {
    const auto delay = backoff_for(attempt);
    if (sleep) {
        sleep(delay);
    } else {
        std::this_thread::sleep_for(delay);
    }
}

RetryPolicy RetryPolicy::no_wait(int attempts) {
    RetryPolicy p;
    p.max_attempts = attempts;
    p.sleep = [](std::chrono::milliseconds) {};
    return p;
}

void detail_log_retry(std::string_view what, int attempt, std::string_view message) {
    spdlog::warn("{} failed (attempt {}): {}; retrying", what.empty() ? "request" : what, attempt, message);
}

}  // namespace vizpod
