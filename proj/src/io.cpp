#include "audsem/io.hpp"

#include <fstream>
#include <sstream>

#include "audsem/error.hpp"

namespace audsem::io {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw Error("short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::vector<json> read_jsonl(const std::filesystem::path& path, bool tolerate_torn_tail) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        lines.push_back(std::move(line));
    }
    std::vector<json> docs;
    docs.reserve(lines.size());
    for (std::size_t i = 0; i < lines.size(); ++i) {
        try {
            docs.push_back(json::parse(lines[i]));
        } catch (const json::parse_error& e) {
            if (tolerate_torn_tail && i + 1 == lines.size()) break;
            throw Error(path.string() + ":" + std::to_string(i + 1) + ": " + e.what());
        }
    }
    return docs;
}

std::string to_jsonl(const std::vector<json>& docs) {
    std::string out;
    for (const auto& d : docs) {
        out += d.dump();
        out += '\n';
    }
    return out;
}

}  // namespace audsem::io
