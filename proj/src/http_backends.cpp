#include "audsem/http_backends.hpp"

#include <regex>

#include "httplib.h"

#include "audsem/annotate.hpp"
#include "audsem/error.hpp"

namespace audsem::http {

using io::json;

Url parse_url(const std::string& url) {
    static const std::regex kUrl(R"(^(http://[^/\s]+)(/\S*)?$)");
    std::smatch m;
    if (!std::regex_match(url, m, kUrl)) throw ConfigError("unsupported endpoint URL: " + url);
    return {m[1].str(), m[2].matched ? m[2].str() : std::string("/")};
}

JsonClient::JsonClient(const std::string& url, int timeout_ms, RetryPolicy retry)
    : url_(url), parsed_(parse_url(url)), timeout_ms_(timeout_ms), retry_(std::move(retry)) {
    if (!retry_.sleep) retry_.sleep = default_sleep;
}

JsonClient::~JsonClient() = default;

json JsonClient::post_once(const json& body) const {
    httplib::Client cli(parsed_.scheme_host_port);
    const auto sec = timeout_ms_ / 1000;
    const auto usec = (timeout_ms_ % 1000) * 1000;
    cli.set_connection_timeout(sec, usec);
    cli.set_read_timeout(sec, usec);
    cli.set_write_timeout(sec, usec);
    auto res = cli.Post(parsed_.path, body.dump(), "application/json");
    if (!res) {
        throw BackendError(url_ + ": " + httplib::to_string(res.error()), true);
    }
    if (res->status >= 500) throw BackendError(url_ + ": HTTP " + std::to_string(res->status), true);
    if (res->status != 200) throw BackendError(url_ + ": HTTP " + std::to_string(res->status), false);
    try {
        return json::parse(res->body);
    } catch (const json::exception& e) {
        throw BackendError(url_ + ": malformed JSON reply: " + e.what(), false);
    }
}

json JsonClient::post(const json& body) const {
    return with_retry(retry_, [&] { return post_once(body); });
}

namespace {

std::string string_field(const json& j, const char* key, const std::string& url) {
    if (!j.is_object() || !j.contains(key) || !j[key].is_string()) {
        throw BackendError(url + ": reply lacks string \"" + key + "\"", false);
    }
    return j[key].get<std::string>();
}

}  // namespace

std::string HttpJudge::complete(std::string_view prompt) {
    return string_field(client_.post({{"prompt", prompt}}), "text", client_.url());
}

std::string HttpGenerator::generate(std::string_view prompt, SchemaId schema) {
    return string_field(client_.post({{"prompt", prompt}, {"schema_id", std::string(schema_name(schema))}}), "text",
                        client_.url());
}

InferenceReply HttpInference::infer(const InferenceRequest& request) {
    json body = {{"role", request.role}, {"media_ref", request.media_ref}};
    if (request.prompt) body["prompt"] = *request.prompt;
    const json j = client_.post(body);
    if (!j.is_object()) throw BackendError(client_.url() + ": reply is not an object", false);
    InferenceReply r;
    try {
        if (j.contains("text") && !j["text"].is_null()) r.text = j["text"].get<std::string>();
        if (j.contains("labels") && !j["labels"].is_null()) {
            std::vector<ScoredLabel> labels;
            for (const auto& l : j["labels"]) labels.push_back(annotate::label_from_json(l));
            r.labels = std::move(labels);
        }
    } catch (const std::exception& e) {
        throw BackendError(client_.url() + ": bad inference reply: " + e.what(), false);
    }
    return r;
}

embed::EmbeddingVector HttpEmbedding::embed(embed::EmbeddingKind kind, std::string_view payload) {
    const json j = client_.post({{"kind", std::string(embed::kind_name(kind))}, {"payload", payload}});
    try {
        return embed::EmbeddingVector(j.at("values").get<std::vector<double>>());
    } catch (const std::exception& e) {
        throw BackendError(client_.url() + ": bad embedding reply: " + e.what(), false);
    }
}

bool HttpClassifier::is_sound_description(const mining::CaptionCandidate& candidate) {
    const json j = client_.post({{"text", candidate.normalized_text}});
    if (!j.is_object() || !j.contains("score") || !j["score"].is_number()) {
        throw BackendError(client_.url() + ": reply lacks numeric \"score\"", false);
    }
    return j["score"].get<double>() >= 0.5;
}

}  // namespace audsem::http
