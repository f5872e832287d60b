#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace audsem::harness {

// Reproducible ustar: mtime 0, uid/gid 0, mode 0644, no compression.
struct TarMember {
    std::string name;  // at most 99 bytes
    std::string data;

    friend bool operator==(const TarMember&, const TarMember&) = default;
};

std::string tar_archive(const std::vector<TarMember>& members);
// Throws std::runtime_error on a bad header or checksum.
std::vector<TarMember> untar(const std::string& archive);

struct ShardFile {
    std::string extension;               // "mp4", "wav", "json"
    std::filesystem::path source;        // read when bytes is absent
    std::optional<std::string> bytes;
};

struct ShardEntry {
    std::string key;
    std::vector<ShardFile> files;  // written adjacently as "<key>.<extension>"
};

struct ShardInfo {
    std::size_t index = 0;
    std::filesystem::path path;
    std::vector<std::string> keys;
};

struct SkippedEntry {
    std::string key;
    std::string reason;
};

struct PackResult {
    std::vector<ShardInfo> shards;
    std::vector<SkippedEntry> skipped;
};

inline constexpr std::size_t kShardSize = 4096;

// Entry counts per shard for n records.
std::vector<std::size_t> plan_shards(std::size_t n, std::size_t shard_size = kShardSize);

std::string shard_name(std::size_t index);  // "shard-000000.tar"

// Writes shard-NNNNNN.tar files in entry order. Entries whose source files are
// missing are skipped and reported. Stale shards with higher indices from an
// earlier pack are removed. Throws std::invalid_argument on duplicate keys.
PackResult pack_shards(const std::vector<ShardEntry>& entries, const std::filesystem::path& out_dir,
                       std::size_t shard_size = kShardSize);

// One line per member of every shard-*.tar in dir, in shard then archive
// order: "<shard>\t<member>\t<size>\t<fnv1a64 hex>".
std::string shard_listing(const std::filesystem::path& dir);

}  // namespace audsem::harness
