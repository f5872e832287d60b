#pragma once

#include <map>
#include <string>
#include <vector>

#include "audsem/io.hpp"
#include "audsem/synthesize.hpp"

namespace audsem::harness {

struct StatsRecord {
    synth::TaskRecord record;
    std::vector<std::string> tags;  // sample audio tags, best first
};

// Top-level sound category of a tag label by keyword, one of "Human sounds",
// "Animal", "Music", "Natural sounds", "Sounds of things",
// "Source-ambiguous sounds", "Channel, environment and background" or "Other".
std::string top_level_category(std::string_view tag);

struct CorpusStats {
    std::size_t total_records = 0;
    std::size_t total_samples = 0;
    std::map<std::string, std::size_t> task_counts;   // all four kinds, zero-filled when non-empty
    std::map<std::string, double> task_shares;
    std::map<std::string, std::size_t> category_histogram;  // per sample, by its best tag
    std::map<std::string, std::size_t> caption_length_histogram;  // answer words of caption records, width 5
};

inline constexpr std::size_t kLengthBinWidth = 5;

// "00-04", "05-09", ... "45-49", "50+".
std::string length_bin(std::size_t words);

CorpusStats corpus_stats(const std::vector<StatsRecord>& records);

io::json to_json(const CorpusStats& s);
// "section,key,value" rows, sections in a fixed order.
std::string to_csv(const CorpusStats& s);

}  // namespace audsem::harness
