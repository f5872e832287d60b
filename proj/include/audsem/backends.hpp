#pragma once

#include <chrono>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "audsem/error.hpp"

namespace audsem {

// Plain text completion: HTTP POST {prompt} -> {text}. Used for both the
// caption-filter judge and the synthesis judge.
class JudgeBackend {
public:
    virtual ~JudgeBackend() = default;
    virtual std::string complete(std::string_view prompt) = 0;
};

enum class SchemaId { TwoPhase, ThreePhase };

std::string_view schema_name(SchemaId id) noexcept;

// Structured generator: HTTP POST {prompt, schema_id} -> {text}.
class GeneratorBackend {
public:
    virtual ~GeneratorBackend() = default;
    virtual std::string generate(std::string_view prompt, SchemaId schema) = 0;
};

struct ScoredLabel {
    std::string label;
    double score = 0.0;
    std::size_t count = 1;                // occurrences merged into this entry
    std::optional<std::vector<double>> box;  // detections only
};

struct InferenceRequest {
    std::string role;
    std::string media_ref;  // path, optionally with a "#t=" media fragment
    std::optional<std::string> prompt;
};

struct InferenceReply {
    std::optional<std::string> text;
    std::optional<std::vector<ScoredLabel>> labels;
};

// Per-modality model: HTTP POST {role, media_ref | media_b64, prompt?} ->
// {text?, labels?}.
class InferenceBackend {
public:
    virtual ~InferenceBackend() = default;
    virtual InferenceReply infer(const InferenceRequest& request) = 0;
};

struct RetryPolicy {
    int max_attempts = 3;
    std::chrono::milliseconds initial_backoff{200};
    double multiplier = 2.0;
    // Replaceable so tests and desk runs do not sleep.
    std::function<void(std::chrono::milliseconds)> sleep;
};

// Calls fn until it succeeds, retrying only retryable BackendErrors with
// exponential backoff. The last error is rethrown.
template <typename Fn>
auto with_retry(const RetryPolicy& policy, Fn&& fn) -> decltype(fn()) {
    auto backoff = policy.initial_backoff;
    for (int attempt = 1;; ++attempt) {
        try {
            return fn();
        } catch (const BackendError& e) {
            if (!e.retryable() || attempt >= policy.max_attempts) throw;
        }
        if (policy.sleep) policy.sleep(backoff);
        backoff = std::chrono::milliseconds(static_cast<long long>(static_cast<double>(backoff.count()) * policy.multiplier));
    }
}

void default_sleep(std::chrono::milliseconds d);

}  // namespace audsem
