#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "audsem/annotate.hpp"
#include "audsem/embed_filter.hpp"
#include "audsem/io.hpp"
#include "audsem/media_acquire.hpp"
#include "audsem/reward.hpp"
#include "audsem/synthesize.hpp"

namespace audsem::harness {

// Endpoint URLs per backend. "inference" is the default for every annotation
// role; "roles" overrides single roles.
struct Endpoints {
    std::string mining_judge;
    std::string classifier;
    std::string inference;
    std::map<std::string, std::string> roles;
    std::string embedding;
    std::string generator;
    std::string synthesis_judge;
};

struct Config {
    std::filesystem::path base_dir;  // directory of the config file

    // run
    std::string run_id = "default";
    std::filesystem::path work_dir = "runs";
    std::uint64_t seed = 0;
    std::size_t workers = 1;
    double failure_ceiling = 0.10;
    bool dry_run = false;

    // input
    std::filesystem::path subtitles;  // JSONL file, or a directory of <video_id>.srt files

    // mining
    double min_caption_s = 1.0;
    double max_caption_s = 10.0;

    // media
    media::CommandTemplates commands = media::CommandTemplates::defaults();
    double black_threshold = media::kDefaultBlackThreshold;
    std::string ffmpeg = "ffmpeg";

    // annotate
    double detection_threshold = 0.3;
    double music_threshold = 0.3;
    std::size_t top_k = 5;

    embed::FilterThresholds filter;
    std::size_t embedding_dim = 256;

    // synthesize
    int max_attempts = 5;
    bool semantic_mode = false;
    synth::SchemaBounds bounds;
    synth::TaskSplit split;

    std::size_t shard_size = 4096;

    reward::LengthParams length;
    reward::RewardWeights weights;

    // backends
    std::string backend_mode = "stub";  // "stub" or "http"
    std::filesystem::path stub_script;
    int timeout_ms = 30000;
    RetryPolicy retry;
    Endpoints endpoints;

    std::filesystem::path run_dir() const { return work_dir / run_id; }

    // Throws ConfigError for unknown keys, wrong types or invalid values.
    static Config from_json(const io::json& j, const std::filesystem::path& base_dir);
    static Config load(const std::filesystem::path& path);

    void validate() const;
    io::json to_json() const;
};

}  // namespace audsem::harness
