#pragma once

#include <memory>
#include <string>

#include "audsem/backends.hpp"
#include "audsem/caption_mining.hpp"
#include "audsem/embed_filter.hpp"
#include "audsem/io.hpp"

namespace audsem::http {

struct Url {
    std::string scheme_host_port;  // "http://host:port"
    std::string path;              // "/v1/complete", "/" when empty
};

// Only plain http URLs are accepted. Throws ConfigError otherwise.
Url parse_url(const std::string& url);

// JSON POST with retry. Connection failures, timeouts and 5xx replies are
// retryable BackendErrors; 4xx replies and malformed JSON are not.
class JsonClient {
public:
    JsonClient(const std::string& url, int timeout_ms, RetryPolicy retry);
    ~JsonClient();

    io::json post(const io::json& body) const;
    const std::string& url() const noexcept { return url_; }

private:
    io::json post_once(const io::json& body) const;

    std::string url_;
    Url parsed_;
    int timeout_ms_;
    RetryPolicy retry_;
};

// {prompt} -> {text}
class HttpJudge final : public JudgeBackend {
public:
    HttpJudge(const std::string& url, int timeout_ms, RetryPolicy retry) : client_(url, timeout_ms, std::move(retry)) {}
    std::string complete(std::string_view prompt) override;

private:
    JsonClient client_;
};

// {prompt, schema_id} -> {text}
class HttpGenerator final : public GeneratorBackend {
public:
    HttpGenerator(const std::string& url, int timeout_ms, RetryPolicy retry)
        : client_(url, timeout_ms, std::move(retry)) {}
    std::string generate(std::string_view prompt, SchemaId schema) override;

private:
    JsonClient client_;
};

// {role, media_ref, prompt?} -> {text?, labels?: [{label, score, box?}]}
class HttpInference final : public InferenceBackend {
public:
    HttpInference(const std::string& url, int timeout_ms, RetryPolicy retry)
        : client_(url, timeout_ms, std::move(retry)) {}
    InferenceReply infer(const InferenceRequest& request) override;

private:
    JsonClient client_;
};

// {kind, payload} -> {values}
class HttpEmbedding final : public embed::EmbeddingBackend {
public:
    HttpEmbedding(const std::string& url, int timeout_ms, RetryPolicy retry)
        : client_(url, timeout_ms, std::move(retry)) {}
    embed::EmbeddingVector embed(embed::EmbeddingKind kind, std::string_view payload) override;

private:
    JsonClient client_;
};

// Learned caption classifier: {text} -> {score}; yes when score >= 0.5.
class HttpClassifier final : public mining::ClassifierBackend {
public:
    HttpClassifier(const std::string& url, int timeout_ms, RetryPolicy retry)
        : client_(url, timeout_ms, std::move(retry)) {}
    bool is_sound_description(const mining::CaptionCandidate& candidate) override;

private:
    JsonClient client_;
};

}  // namespace audsem::http
