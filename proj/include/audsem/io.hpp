#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace audsem::io {

using json = nlohmann::json;

std::string read_file(const std::filesystem::path& path);

// Writes to "<path>.tmp" then renames over path, so readers never observe a
// partially written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

// One JSON document per non-empty line. A malformed final line (torn write)
// is ignored when tolerate_torn_tail is set; malformed lines elsewhere throw.
std::vector<json> read_jsonl(const std::filesystem::path& path, bool tolerate_torn_tail = false);

std::string to_jsonl(const std::vector<json>& docs);

}  // namespace audsem::io
