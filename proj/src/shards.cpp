#include "audsem/shards.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <regex>
#include <set>
#include <stdexcept>

#include "audsem/io.hpp"
#include "audsem/text.hpp"

namespace audsem::harness {

namespace {

constexpr std::size_t kBlock = 512;

void put_octal(char* field, std::size_t width, std::uint64_t value) {
    // width includes the terminating NUL.
    std::snprintf(field, width, "%0*llo", static_cast<int>(width - 1), static_cast<unsigned long long>(value));
}

std::uint64_t read_octal(const char* field, std::size_t width) {
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < width && field[i] != '\0' && field[i] != ' '; ++i) {
        if (field[i] < '0' || field[i] > '7') throw std::runtime_error("tar: bad octal field");
        v = v * 8 + static_cast<std::uint64_t>(field[i] - '0');
    }
    return v;
}

unsigned header_checksum(const char* h) {
    unsigned sum = 0;
    for (std::size_t i = 0; i < kBlock; ++i) {
        const bool in_chksum = i >= 148 && i < 156;
        sum += in_chksum ? static_cast<unsigned>(' ') : static_cast<unsigned char>(h[i]);
    }
    return sum;
}

}  // namespace

std::string tar_archive(const std::vector<TarMember>& members) {
    std::string out;
    for (const auto& m : members) {
        if (m.name.empty() || m.name.size() > 99) throw std::invalid_argument("tar: bad member name " + m.name);
        char h[kBlock] = {};
        std::memcpy(h, m.name.data(), m.name.size());
        put_octal(h + 100, 8, 0644);
        put_octal(h + 108, 8, 0);
        put_octal(h + 116, 8, 0);
        put_octal(h + 124, 12, m.data.size());
        put_octal(h + 136, 12, 0);
        h[156] = '0';
        std::memcpy(h + 257, "ustar", 6);
        std::memcpy(h + 263, "00", 2);
        std::snprintf(h + 148, 8, "%06o", header_checksum(h));
        h[155] = ' ';
        out.append(h, kBlock);
        out += m.data;
        out.append((kBlock - m.data.size() % kBlock) % kBlock, '\0');
    }
    out.append(2 * kBlock, '\0');
    return out;
}

std::vector<TarMember> untar(const std::string& archive) {
    std::vector<TarMember> out;
    std::size_t pos = 0;
    while (pos + kBlock <= archive.size()) {
        const char* h = archive.data() + pos;
        if (std::all_of(h, h + kBlock, [](char c) { return c == '\0'; })) break;
        if (read_octal(h + 148, 8) != header_checksum(h)) throw std::runtime_error("tar: checksum mismatch");
        TarMember m;
        m.name.assign(h, strnlen(h, 100));
        const auto size = read_octal(h + 124, 12);
        pos += kBlock;
        if (pos + size > archive.size()) throw std::runtime_error("tar: truncated member " + m.name);
        m.data = archive.substr(pos, size);
        pos += (size + kBlock - 1) / kBlock * kBlock;
        out.push_back(std::move(m));
    }
    return out;
}

std::vector<std::size_t> plan_shards(std::size_t n, std::size_t shard_size) {
    if (shard_size == 0) throw std::invalid_argument("shard size must be positive");
    std::vector<std::size_t> sizes;
    for (std::size_t left = n; left > 0; left -= std::min(left, shard_size)) sizes.push_back(std::min(left, shard_size));
    return sizes;
}

std::string shard_name(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "shard-%06zu.tar", index);
    return buf;
}

PackResult pack_shards(const std::vector<ShardEntry>& entries, const std::filesystem::path& out_dir,
                       std::size_t shard_size) {
    namespace fs = std::filesystem;
    if (shard_size == 0) throw std::invalid_argument("shard size must be positive");
    std::set<std::string> keys;
    for (const auto& e : entries) {
        if (!keys.insert(e.key).second) throw std::invalid_argument("duplicate shard key " + e.key);
    }
    fs::create_directories(out_dir);

    PackResult result;
    std::vector<TarMember> members;
    std::vector<std::string> member_keys;
    auto flush = [&] {
        if (member_keys.empty()) return;
        ShardInfo info;
        info.index = result.shards.size();
        info.path = out_dir / shard_name(info.index);
        info.keys = std::move(member_keys);
        io::write_file_atomic(info.path, tar_archive(members));
        result.shards.push_back(std::move(info));
        members.clear();
        member_keys.clear();
    };

    for (const auto& e : entries) {
        std::vector<TarMember> files;
        std::string missing;
        for (const auto& f : e.files) {
            if (f.bytes) {
                files.push_back({e.key + "." + f.extension, *f.bytes});
                continue;
            }
            std::error_code ec;
            if (!fs::is_regular_file(f.source, ec)) {
                missing = "missing-" + f.extension;
                break;
            }
            files.push_back({e.key + "." + f.extension, io::read_file(f.source)});
        }
        if (!missing.empty()) {
            result.skipped.push_back({e.key, missing});
            continue;
        }
        members.insert(members.end(), std::make_move_iterator(files.begin()), std::make_move_iterator(files.end()));
        member_keys.push_back(e.key);
        if (member_keys.size() == shard_size) flush();
    }
    flush();

    static const std::regex kShardFile(R"(shard-(\d{6})\.tar)");
    for (const auto& de : fs::directory_iterator(out_dir)) {
        std::smatch m;
        const auto name = de.path().filename().string();
        if (std::regex_match(name, m, kShardFile) && std::stoul(m[1].str()) >= result.shards.size()) {
            fs::remove(de.path());
        }
    }
    return result;
}

std::string shard_listing(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    static const std::regex kShardFile(R"(shard-\d{6}\.tar)");
    std::vector<fs::path> shards;
    if (fs::is_directory(dir)) {
        for (const auto& de : fs::directory_iterator(dir)) {
            if (std::regex_match(de.path().filename().string(), kShardFile)) shards.push_back(de.path());
        }
    }
    std::sort(shards.begin(), shards.end());
    std::string out;
    for (const auto& p : shards) {
        for (const auto& m : untar(io::read_file(p))) {
            char hash[17];
            std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(text::fnv1a64(m.data)));
            out += p.filename().string() + "\t" + m.name + "\t" + std::to_string(m.data.size()) + "\t" + hash + "\n";
        }
    }
    return out;
}

}  // namespace audsem::harness
