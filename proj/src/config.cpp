#include "audsem/config.hpp"

#include <cmath>
#include <set>

#include "audsem/error.hpp"

namespace audsem::harness {

using io::json;

namespace {

// Reads one table and rejects keys nobody asked for.
class Table {
public:
    Table(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(label() + " must be a table");
    }

    ~Table() noexcept(false) {
        if (std::uncaught_exceptions()) return;
        for (const auto& [k, v] : j_.items()) {
            if (!seen_.count(k)) throw ConfigError("unknown key " + path_ + (path_.empty() ? "" : ".") + k);
        }
    }

    bool has(const std::string& key) {
        seen_.insert(key);
        return j_.contains(key);
    }

    Table sub(const std::string& key) {
        seen_.insert(key);
        static const json kEmpty = json::object();
        return Table(j_.contains(key) ? j_.at(key) : kEmpty, child(key));
    }

    template <typename T>
    void read(const std::string& key, T& out) {
        if (!has(key)) return;
        try {
            out = j_.at(key).get<T>();
        } catch (const json::exception&) {
            throw ConfigError(child(key) + " has the wrong type");
        }
    }

    void read_path(const std::string& key, std::filesystem::path& out) {
        std::string s;
        if (!has(key)) return;
        read(key, s);
        out = s;
    }

    const json& raw(const std::string& key) {
        seen_.insert(key);
        return j_.at(key);
    }

    std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

private:
    std::string label() const { return path_.empty() ? "config" : path_; }

    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

std::filesystem::path resolve(const std::filesystem::path& base, const std::filesystem::path& p) {
    if (p.empty() || p.is_absolute()) return p;
    return (base / p).lexically_normal();
}

}  // namespace

Config Config::from_json(const json& j, const std::filesystem::path& base_dir) {
    Config c;
    c.base_dir = base_dir;
    {
        Table root(j, "");
        {
            auto t = root.sub("run");
            t.read("run_id", c.run_id);
            t.read_path("work_dir", c.work_dir);
            t.read("seed", c.seed);
            t.read("workers", c.workers);
            t.read("failure_ceiling", c.failure_ceiling);
        }
        {
            auto t = root.sub("input");
            t.read_path("subtitles", c.subtitles);
        }
        {
            auto t = root.sub("mining");
            t.read("min_duration_s", c.min_caption_s);
            t.read("max_duration_s", c.max_caption_s);
        }
        {
            auto t = root.sub("media");
            t.read("black_threshold", c.black_threshold);
            t.read("ffmpeg", c.ffmpeg);
            auto cmd = t.sub("commands");
            cmd.read("download", c.commands.download);
            cmd.read("video_transcode", c.commands.video_transcode);
            cmd.read("audio_transcode", c.commands.audio_transcode);
        }
        {
            auto t = root.sub("annotate");
            t.read("detection_threshold", c.detection_threshold);
            t.read("music_threshold", c.music_threshold);
            t.read("top_k", c.top_k);
        }
        {
            auto t = root.sub("filter");
            t.read("outlier_distance", c.filter.outlier_distance);
            t.read("alignment_similarity", c.filter.alignment_similarity);
            t.read("min_duration_s", c.filter.min_duration_s);
            t.read("embedding_dim", c.embedding_dim);
        }
        {
            auto t = root.sub("synthesize");
            t.read("max_attempts", c.max_attempts);
            t.read("semantic_mode", c.semantic_mode);
            t.read("min_thinking_words", c.bounds.min_thinking_words);
            t.read("max_answer_words", c.bounds.max_answer_words);
            auto s = t.sub("split");
            s.read("caption", c.split.caption);
            s.read("mcqa", c.split.mcqa);
            s.read("open_qa", c.split.open_qa);
            s.read("creative", c.split.creative);
            s.read("min_per_type", c.split.min_per_type);
            s.read("max_per_type", c.split.max_per_type);
        }
        {
            auto t = root.sub("package");
            t.read("shard_size", c.shard_size);
        }
        {
            auto t = root.sub("reward");
            t.read("alpha", c.length.alpha);
            t.read("delta", c.length.delta);
            t.read("n_gold", c.length.n_gold);
            auto w = t.sub("weights");
            w.read("accuracy", c.weights.accuracy);
            w.read("format", c.weights.format);
            w.read("length", c.weights.length);
        }
        {
            auto t = root.sub("backends");
            t.read("mode", c.backend_mode);
            t.read_path("stub_script", c.stub_script);
            t.read("timeout_ms", c.timeout_ms);
            {
                auto r = t.sub("retry");
                r.read("max_attempts", c.retry.max_attempts);
                long long backoff = c.retry.initial_backoff.count();
                r.read("initial_backoff_ms", backoff);
                c.retry.initial_backoff = std::chrono::milliseconds(backoff);
                r.read("multiplier", c.retry.multiplier);
            }
            {
                auto e = t.sub("endpoints");
                e.read("mining_judge", c.endpoints.mining_judge);
                e.read("classifier", c.endpoints.classifier);
                e.read("inference", c.endpoints.inference);
                e.read("roles", c.endpoints.roles);
                e.read("embedding", c.endpoints.embedding);
                e.read("generator", c.endpoints.generator);
                e.read("synthesis_judge", c.endpoints.synthesis_judge);
            }
        }
    }
    c.work_dir = resolve(base_dir, c.work_dir);
    c.subtitles = resolve(base_dir, c.subtitles);
    c.stub_script = resolve(base_dir, c.stub_script);
    c.validate();
    return c;
}

Config Config::load(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(io::read_file(path));
    } catch (const json::exception& e) {
        throw ConfigError("cannot parse " + path.string() + ": " + e.what());
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    return from_json(j, std::filesystem::absolute(path).parent_path());
}

void Config::validate() const {
    auto unit = [](double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; };
    if (run_id.empty() || run_id.find('/') != std::string::npos) throw ConfigError("run.run_id must be a plain name");
    if (workers == 0) throw ConfigError("run.workers must be positive");
    if (!unit(failure_ceiling)) throw ConfigError("run.failure_ceiling must be in [0, 1]");
    if (!(min_caption_s > 0.0) || !(max_caption_s >= min_caption_s)) throw ConfigError("invalid mining durations");
    if (!(black_threshold >= 0.0 && black_threshold <= 255.0)) throw ConfigError("media.black_threshold out of range");
    if (!unit(detection_threshold) || !unit(music_threshold)) throw ConfigError("annotate thresholds must be in [0, 1]");
    if (top_k == 0) throw ConfigError("annotate.top_k must be positive");
    if (!(filter.outlier_distance >= 0.0 && filter.outlier_distance <= 2.0)) {
        throw ConfigError("filter.outlier_distance must be in [0, 2]");
    }
    if (!(filter.alignment_similarity >= -1.0 && filter.alignment_similarity <= 1.0)) {
        throw ConfigError("filter.alignment_similarity must be in [-1, 1]");
    }
    if (!(filter.min_duration_s >= 0.0)) throw ConfigError("filter.min_duration_s must be non-negative");
    if (embedding_dim < 2) throw ConfigError("filter.embedding_dim must be at least 2");
    if (max_attempts < 1) throw ConfigError("synthesize.max_attempts must be positive");
    if (bounds.max_answer_words == 0) throw ConfigError("synthesize.max_answer_words must be positive");
    split.validate();
    if (shard_size == 0) throw ConfigError("package.shard_size must be positive");
    try {
        length.validate();
        weights.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("reward: ") + e.what());
    }
    if (backend_mode != "stub" && backend_mode != "http") throw ConfigError("backends.mode must be stub or http");
    if (timeout_ms <= 0) throw ConfigError("backends.timeout_ms must be positive");
    if (retry.max_attempts < 1 || retry.multiplier < 1.0 || retry.initial_backoff.count() < 0) {
        throw ConfigError("invalid backends.retry");
    }
    for (const auto& [role, url] : endpoints.roles) {
        if (!annotate::role_from_name(role)) throw ConfigError("unknown inference role " + role);
    }
}

json Config::to_json() const {
    return {
        {"run",
         {{"run_id", run_id},
          {"work_dir", work_dir.string()},
          {"seed", seed},
          {"workers", workers},
          {"failure_ceiling", failure_ceiling}}},
        {"input", {{"subtitles", subtitles.string()}}},
        {"mining", {{"min_duration_s", min_caption_s}, {"max_duration_s", max_caption_s}}},
        {"media",
         {{"black_threshold", black_threshold},
          {"ffmpeg", ffmpeg},
          {"commands",
           {{"download", commands.download},
            {"video_transcode", commands.video_transcode},
            {"audio_transcode", commands.audio_transcode}}}}},
        {"annotate",
         {{"detection_threshold", detection_threshold}, {"music_threshold", music_threshold}, {"top_k", top_k}}},
        {"filter",
         {{"outlier_distance", filter.outlier_distance},
          {"alignment_similarity", filter.alignment_similarity},
          {"min_duration_s", filter.min_duration_s},
          {"embedding_dim", embedding_dim}}},
        {"synthesize",
         {{"max_attempts", max_attempts},
          {"semantic_mode", semantic_mode},
          {"min_thinking_words", bounds.min_thinking_words},
          {"max_answer_words", bounds.max_answer_words},
          {"split",
           {{"caption", split.caption},
            {"mcqa", split.mcqa},
            {"open_qa", split.open_qa},
            {"creative", split.creative},
            {"min_per_type", split.min_per_type},
            {"max_per_type", split.max_per_type}}}}},
        {"package", {{"shard_size", shard_size}}},
        {"reward",
         {{"alpha", length.alpha},
          {"delta", length.delta},
          {"n_gold", length.n_gold},
          {"weights", {{"accuracy", weights.accuracy}, {"format", weights.format}, {"length", weights.length}}}}},
        {"backends",
         {{"mode", backend_mode},
          {"stub_script", stub_script.string()},
          {"timeout_ms", timeout_ms},
          {"retry",
           {{"max_attempts", retry.max_attempts},
            {"initial_backoff_ms", retry.initial_backoff.count()},
            {"multiplier", retry.multiplier}}},
          {"endpoints",
           {{"mining_judge", endpoints.mining_judge},
            {"classifier", endpoints.classifier},
            {"inference", endpoints.inference},
            {"roles", endpoints.roles},
            {"embedding", endpoints.embedding},
            {"generator", endpoints.generator},
            {"synthesis_judge", endpoints.synthesis_judge}}}}},
    };
}

}  // namespace audsem::harness
