#include "audsem/media_acquire.hpp"

#include <spawn.h>
#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <stdexcept>
#include <system_error>

#include "audsem/error.hpp"
#include "audsem/text.hpp"

extern char** environ;

namespace audsem::media {

MediaSegmentSpec::MediaSegmentSpec(std::string video_id, double start_s, double end_s)
    : video_id_(std::move(video_id)), start_s_(start_s), end_s_(end_s) {
    if (video_id_.empty()) throw std::invalid_argument("media segment: empty video id");
    if (!std::isfinite(start_s_) || !std::isfinite(end_s_) || start_s_ < 0.0)
        throw std::invalid_argument("media segment: invalid start time");
    if (!(end_s_ > start_s_)) throw std::invalid_argument("media segment: end must be after start");
}

std::string MediaSegmentSpec::section_expression() const {
    return "*" + text::format_seconds(start_s_) + "-" + text::format_seconds(end_s_);
}

CommandTemplates CommandTemplates::defaults() {
    CommandTemplates t;
    t.download = {"yt-dlp", "--quiet", "--no-playlist", "-f", "mp4", "--download-sections", "{section}",
                  "-o", "{output}", "--", "{video_id}"};
    t.video_transcode = {"ffmpeg", "-nostdin", "-y", "-loglevel", "error", "-i", "{input}",
                         "-vf", "scale=-2:{height},fps={fps}", "-c:v", "libx264", "-pix_fmt", "yuv420p",
                         "-c:a", "aac", "{output}"};
    t.audio_transcode = {"ffmpeg", "-nostdin", "-y", "-loglevel", "error", "-i", "{input}", "-vn",
                         "-ac", "{channels}", "-ar", "{sample_rate}", "-c:a", "pcm_s16le", "{output}"};
    return t;
}

std::vector<std::string> expand_template(const std::vector<std::string>& tmpl,
                                         const std::map<std::string, std::string>& values) {
    std::vector<std::string> out;
    out.reserve(tmpl.size());
    for (const auto& arg : tmpl) {
        std::string expanded;
        std::size_t i = 0;
        while (i < arg.size()) {
            if (arg[i] == '{') {
                const auto close = arg.find('}', i);
                if (close != std::string::npos) {
                    const auto it = values.find(arg.substr(i + 1, close - i - 1));
                    if (it == values.end()) throw ConfigError("unknown command placeholder in '" + arg + "'");
                    expanded += it->second;
                    i = close + 1;
                    continue;
                }
            }
            expanded.push_back(arg[i++]);
        }
        out.push_back(std::move(expanded));
    }
    return out;
}

namespace {

std::map<std::string, std::string> base_values() {
    return {{"height", std::to_string(kVideoHeight)},
            {"fps", std::to_string(kVideoFps)},
            {"sample_rate", std::to_string(kAudioSampleRate)},
            {"channels", std::to_string(kAudioChannels)}};
}

}  // namespace

std::vector<std::string> build_download_command(const MediaSegmentSpec& spec, const std::filesystem::path& output,
                                                const CommandTemplates& templates) {
    auto v = base_values();
    v["video_id"] = spec.video_id();
    v["start"] = text::format_seconds(spec.start_s());
    v["end"] = text::format_seconds(spec.end_s());
    v["section"] = spec.section_expression();
    v["output"] = output.string();
    return expand_template(templates.download, v);
}

std::vector<std::string> build_video_transcode_command(const std::filesystem::path& input,
                                                       const std::filesystem::path& output,
                                                       const CommandTemplates& templates) {
    auto v = base_values();
    v["input"] = input.string();
    v["output"] = output.string();
    return expand_template(templates.video_transcode, v);
}

std::vector<std::string> build_audio_transcode_command(const std::filesystem::path& input,
                                                       const std::filesystem::path& output,
                                                       const CommandTemplates& templates) {
    auto v = base_values();
    v["input"] = input.string();
    v["output"] = output.string();
    return expand_template(templates.audio_transcode, v);
}

// ---------------------------------------------------------------------------

namespace {

std::vector<double> midpoint_plan(double duration_s, int n) {
    std::vector<double> ts;
    ts.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) ts.push_back((i + 0.5) / n * duration_s);
    return ts;
}

void require_positive(double duration_s) {
    if (!(duration_s > 0.0) || !std::isfinite(duration_s))
        throw std::invalid_argument("frame planning needs a positive duration");
}

}  // namespace

std::vector<double> plan_image_frames(double duration_s) {
    require_positive(duration_s);
    if (duration_s < 2.0) return {duration_s / 3.0, 2.0 * duration_s / 3.0};
    return midpoint_plan(duration_s, 4);
}

std::vector<double> plan_video_frames(double duration_s) {
    require_positive(duration_s);
    return midpoint_plan(duration_s, 8);
}

bool is_black_frame(double mean_intensity, double threshold) {
    if (!(mean_intensity >= 0.0 && mean_intensity <= 255.0))
        throw std::invalid_argument("mean intensity outside [0, 255]");
    return mean_intensity < threshold;
}

double mean_intensity(std::span<const std::uint8_t> gray_pixels) {
    if (gray_pixels.empty()) throw std::invalid_argument("mean_intensity of an empty frame");
    std::uint64_t sum = 0;
    for (auto p : gray_pixels) sum += p;
    return static_cast<double>(sum) / static_cast<double>(gray_pixels.size());
}

namespace {

std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'') out += "'\\''";
        else out.push_back(c);
    }
    return out + "'";
}

}  // namespace

double FfmpegFrameProbe::mean_intensity(const std::filesystem::path& video, double timestamp_s) {
    const std::string cmd = shell_quote(ffmpeg_) + " -nostdin -v error -ss " + text::format_seconds(timestamp_s) +
                            " -i " + shell_quote(video.string()) +
                            " -frames:v 1 -f rawvideo -pix_fmt gray - 2>/dev/null";
    std::unique_ptr<FILE, int (*)(FILE*)> pipe(popen(cmd.c_str(), "r"), pclose);
    if (!pipe) throw Error("cannot start frame probe");
    std::vector<std::uint8_t> pixels;
    std::uint8_t buf[65536];
    for (std::size_t n; (n = std::fread(buf, 1, sizeof(buf), pipe.get())) > 0;) pixels.insert(pixels.end(), buf, buf + n);
    if (pixels.empty()) throw Error("frame probe produced no pixels for " + video.string());
    return media::mean_intensity(pixels);
}

std::vector<FrameSample> sample_frames(FrameProbe& probe, const std::filesystem::path& video,
                                       const std::vector<double>& timestamps, double threshold) {
    std::vector<FrameSample> out;
    out.reserve(timestamps.size());
    for (double t : timestamps) {
        const double m = probe.mean_intensity(video, t);
        out.push_back({t, m, is_black_frame(m, threshold)});
    }
    return out;
}

// ---------------------------------------------------------------------------

namespace {

std::uint32_t read_be32(const std::string& b, std::size_t at) {
    return (static_cast<std::uint32_t>(static_cast<unsigned char>(b[at])) << 24) |
           (static_cast<std::uint32_t>(static_cast<unsigned char>(b[at + 1])) << 16) |
           (static_cast<std::uint32_t>(static_cast<unsigned char>(b[at + 2])) << 8) |
           static_cast<std::uint32_t>(static_cast<unsigned char>(b[at + 3]));
}

std::uint64_t read_be64(const std::string& b, std::size_t at) {
    return (static_cast<std::uint64_t>(read_be32(b, at)) << 32) | read_be32(b, at + 4);
}

std::uint32_t read_le32(const std::string& b, std::size_t at) {
    return static_cast<std::uint32_t>(static_cast<unsigned char>(b[at])) |
           (static_cast<std::uint32_t>(static_cast<unsigned char>(b[at + 1])) << 8) |
           (static_cast<std::uint32_t>(static_cast<unsigned char>(b[at + 2])) << 16) |
           (static_cast<std::uint32_t>(static_cast<unsigned char>(b[at + 3])) << 24);
}

std::uint16_t read_le16(const std::string& b, std::size_t at) {
    return static_cast<std::uint16_t>(static_cast<unsigned char>(b[at]) |
                                      (static_cast<unsigned char>(b[at + 1]) << 8));
}

// Returns false when the box structure is inconsistent.
bool walk_boxes(const std::string& buf, std::size_t begin, std::size_t end, Mp4Info& info, int depth) {
    std::size_t pos = begin;
    while (pos + 8 <= end) {
        std::uint64_t size = read_be32(buf, pos);
        const std::string type = buf.substr(pos + 4, 4);
        std::size_t header = 8;
        if (size == 1) {
            if (pos + 16 > end) return false;
            size = read_be64(buf, pos + 8);
            header = 16;
        } else if (size == 0) {
            size = end - pos;
        }
        if (size < header || pos + size > end) return false;
        const std::size_t body = pos + header;
        const std::size_t box_end = pos + static_cast<std::size_t>(size);
        if ((type == "moov" || type == "trak" || type == "mdia") && depth < 8) {
            if (!walk_boxes(buf, body, box_end, info, depth + 1)) return false;
        } else if (type == "hdlr" && body + 12 <= box_end) {
            const std::string handler = buf.substr(body + 8, 4);
            if (handler == "vide") info.has_video = true;
            if (handler == "soun") info.has_audio = true;
        }
        pos = box_end;
    }
    return true;
}

std::string read_all(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

Mp4Info probe_mp4(const std::filesystem::path& path) {
    Mp4Info info;
    std::string buf;
    try {
        buf = read_all(path);
    } catch (const Error&) {
        return info;
    }
    if (buf.size() < 8) return info;
    info.parsed = walk_boxes(buf, 0, buf.size(), info, 0);
    if (!info.parsed) info.has_video = info.has_audio = false;
    return info;
}

double WavInfo::duration_s() const noexcept {
    if (sample_rate <= 0 || channels <= 0 || bits_per_sample <= 0) return 0.0;
    const double frame_bytes = channels * (bits_per_sample / 8.0);
    return static_cast<double>(data_bytes) / frame_bytes / sample_rate;
}

WavInfo probe_wav(const std::filesystem::path& path) {
    WavInfo info;
    std::string buf;
    try {
        buf = read_all(path);
    } catch (const Error&) {
        return info;
    }
    if (buf.size() < 12 || buf.compare(0, 4, "RIFF") != 0 || buf.compare(8, 4, "WAVE") != 0) return info;
    bool have_fmt = false;
    bool have_data = false;
    std::size_t pos = 12;
    while (pos + 8 <= buf.size()) {
        const std::string id = buf.substr(pos, 4);
        const std::uint32_t size = read_le32(buf, pos + 4);
        const std::size_t body = pos + 8;
        if (id == "fmt " && size >= 16 && body + 16 <= buf.size()) {
            info.channels = read_le16(buf, body + 2);
            info.sample_rate = static_cast<int>(read_le32(buf, body + 4));
            info.bits_per_sample = read_le16(buf, body + 14);
            have_fmt = true;
        } else if (id == "data") {
            info.data_bytes = std::min<std::uint64_t>(size, buf.size() - body);
            have_data = true;
        }
        pos = body + size + (size & 1u);
    }
    info.parsed = have_fmt && have_data;
    return info;
}

MediaValidation validate_media(const MediaAssets& assets) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (!fs::is_regular_file(assets.video, ec)) return {false, "unreadable-video"};
    if (!fs::is_regular_file(assets.audio, ec)) return {false, "unreadable-audio"};

    const auto mp4 = probe_mp4(assets.video);
    if (!mp4.parsed) return {false, fs::file_size(assets.video, ec) == 0 ? "missing-video" : "unreadable-video"};
    if (!mp4.has_video) return {false, "missing-video"};

    const auto wav = probe_wav(assets.audio);
    if (!wav.parsed) return {false, fs::file_size(assets.audio, ec) == 0 ? "missing-audio" : "unreadable-audio"};
    if (wav.data_bytes == 0) return {false, "missing-audio"};
    return {true, ""};
}

namespace {

void put_be32(std::string& out, std::uint32_t v) {
    for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<char>((v >> s) & 0xFF));
}

void put_le32(std::string& out, std::uint32_t v) {
    for (int s = 0; s < 32; s += 8) out.push_back(static_cast<char>((v >> s) & 0xFF));
}

void put_le16(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xFF));
    out.push_back(static_cast<char>(v >> 8));
}

std::string box(std::string_view type, std::string_view payload) {
    std::string out;
    put_be32(out, static_cast<std::uint32_t>(8 + payload.size()));
    out.append(type);
    out.append(payload);
    return out;
}

std::string handler_track(std::string_view handler) {
    std::string hdlr(8, '\0');  // version/flags + pre_defined
    hdlr.append(handler);
    hdlr.append(12, '\0');  // reserved
    hdlr.append("stub\0", 5);
    return box("trak", box("mdia", box("hdlr", hdlr)));
}

void write_bytes(const std::filesystem::path& path, const std::string& bytes) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

void write_minimal_mp4(const std::filesystem::path& path, bool with_video, bool with_audio) {
    std::string ftyp = "isom";
    put_be32(ftyp, 0x200);
    ftyp += "isommp41";
    std::string moov;
    if (with_video) moov += handler_track("vide");
    if (with_audio) moov += handler_track("soun");
    write_bytes(path, box("ftyp", ftyp) + box("moov", moov) + box("mdat", std::string(8, '\0')));
}

void write_wav(const std::filesystem::path& path, int sample_rate, int channels, std::span<const std::int16_t> samples) {
    const auto data_bytes = static_cast<std::uint32_t>(samples.size() * 2);
    std::string out = "RIFF";
    put_le32(out, 36 + data_bytes);
    out += "WAVEfmt ";
    put_le32(out, 16);
    put_le16(out, 1);  // PCM
    put_le16(out, static_cast<std::uint16_t>(channels));
    put_le32(out, static_cast<std::uint32_t>(sample_rate));
    put_le32(out, static_cast<std::uint32_t>(sample_rate * channels * 2));
    put_le16(out, static_cast<std::uint16_t>(channels * 2));
    put_le16(out, 16);
    out += "data";
    put_le32(out, data_bytes);
    for (auto s : samples) put_le16(out, static_cast<std::uint16_t>(s));
    write_bytes(path, out);
}

// ---------------------------------------------------------------------------

std::string_view purpose_name(CommandPurpose p) noexcept {
    switch (p) {
        case CommandPurpose::Download: return "download";
        case CommandPurpose::VideoTranscode: return "video-transcode";
        case CommandPurpose::AudioTranscode: return "audio-transcode";
    }
    return "download";
}

int ProcessRunner::run(const CommandInvocation& invocation) {
    if (invocation.args.empty()) return 127;
    std::vector<char*> argv;
    argv.reserve(invocation.args.size() + 1);
    for (const auto& a : invocation.args) argv.push_back(const_cast<char*>(a.c_str()));
    argv.push_back(nullptr);
    pid_t pid = 0;
    if (posix_spawnp(&pid, argv[0], nullptr, nullptr, argv.data(), environ) != 0) return 127;
    int status = 0;
    if (waitpid(pid, &status, 0) < 0) return 127;
    if (WIFEXITED(status)) return WEXITSTATUS(status);
    if (WIFSIGNALED(status)) return 128 + WTERMSIG(status);
    return 1;
}

FetchResult fetch_segment(const MediaSegmentSpec& spec, const std::string& sample_id,
                          const std::filesystem::path& media_dir, CommandRunner& runner,
                          const CommandTemplates& templates) {
    namespace fs = std::filesystem;
    fs::create_directories(media_dir);
    FetchResult r;
    const fs::path source = media_dir / (sample_id + ".src.mp4");
    r.assets.video = media_dir / (sample_id + ".mp4");
    r.assets.audio = media_dir / (sample_id + ".wav");

    const CommandInvocation steps[] = {
        {CommandPurpose::Download, build_download_command(spec, source, templates), source, spec.video_id()},
        {CommandPurpose::VideoTranscode, build_video_transcode_command(source, r.assets.video, templates),
         r.assets.video, spec.video_id()},
        {CommandPurpose::AudioTranscode, build_audio_transcode_command(source, r.assets.audio, templates),
         r.assets.audio, spec.video_id()},
    };
    for (const auto& step : steps) {
        r.commands.push_back(step.args);
        const int status = runner.run(step);
        if (status != 0) {
            std::error_code ec;
            fs::remove(source, ec);
            r.reason = std::string(purpose_name(step.purpose)) + "-failed:" + std::to_string(status);
            return r;
        }
    }
    std::error_code ec;
    fs::remove(source, ec);

    const auto v = validate_media(r.assets);
    r.ok = v.ok;
    r.reason = v.reason;
    return r;
}

}  // namespace audsem::media
