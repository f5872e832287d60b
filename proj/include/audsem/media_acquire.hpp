#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace audsem::media {

inline constexpr int kVideoHeight = 360;
inline constexpr int kVideoFps = 2;
inline constexpr int kAudioSampleRate = 32000;
inline constexpr int kAudioBitDepth = 16;
inline constexpr int kAudioChannels = 1;
inline constexpr double kDefaultBlackThreshold = 10.0;

// One caption's time range to fetch, with the fixed standardization targets:
// 360p / 2 fps MP4 video and 32 kHz / 16-bit / mono WAV audio.
class MediaSegmentSpec {
public:
    // Throws std::invalid_argument unless end_s > start_s >= 0 and the id is non-empty.
    MediaSegmentSpec(std::string video_id, double start_s, double end_s);

    const std::string& video_id() const noexcept { return video_id_; }
    double start_s() const noexcept { return start_s_; }
    double end_s() const noexcept { return end_s_; }
    double duration_s() const noexcept { return end_s_ - start_s_; }

    // "*<start>-<end>" as understood by the downloader's section option.
    std::string section_expression() const;

private:
    std::string video_id_;
    double start_s_;
    double end_s_;
};

// Argument-list templates. Placeholders: {video_id} {start} {end} {section}
// {input} {output} {height} {fps} {sample_rate} {channels}.
struct CommandTemplates {
    std::vector<std::string> download;
    std::vector<std::string> video_transcode;
    std::vector<std::string> audio_transcode;

    static CommandTemplates defaults();
};

std::vector<std::string> expand_template(const std::vector<std::string>& tmpl,
                                         const std::map<std::string, std::string>& values);

std::vector<std::string> build_download_command(const MediaSegmentSpec& spec, const std::filesystem::path& output,
                                                const CommandTemplates& templates = CommandTemplates::defaults());
std::vector<std::string> build_video_transcode_command(const std::filesystem::path& input,
                                                       const std::filesystem::path& output,
                                                       const CommandTemplates& templates = CommandTemplates::defaults());
std::vector<std::string> build_audio_transcode_command(const std::filesystem::path& input,
                                                       const std::filesystem::path& output,
                                                       const CommandTemplates& templates = CommandTemplates::defaults());

// Two frames at 1/3 and 2/3 below 2 s; otherwise four midpoint-rule frames
// (i + 0.5) / 4 * duration. Throws std::invalid_argument for duration <= 0.
std::vector<double> plan_image_frames(double duration_s);

// Eight midpoint-rule frames (i + 0.5) / 8 * duration.
std::vector<double> plan_video_frames(double duration_s);

// Throws std::invalid_argument outside [0, 255].
bool is_black_frame(double mean_intensity, double threshold = kDefaultBlackThreshold);

double mean_intensity(std::span<const std::uint8_t> gray_pixels);

struct FrameSample {
    double timestamp_s = 0.0;
    double mean_intensity = 0.0;
    bool is_black = false;
};

// Mean luma of the frame nearest to a timestamp.
class FrameProbe {
public:
    virtual ~FrameProbe() = default;
    virtual double mean_intensity(const std::filesystem::path& video, double timestamp_s) = 0;
};

// Decodes one grayscale frame with ffmpeg through a pipe.
class FfmpegFrameProbe final : public FrameProbe {
public:
    explicit FfmpegFrameProbe(std::string ffmpeg = "ffmpeg") : ffmpeg_(std::move(ffmpeg)) {}
    double mean_intensity(const std::filesystem::path& video, double timestamp_s) override;

private:
    std::string ffmpeg_;
};

std::vector<FrameSample> sample_frames(FrameProbe& probe, const std::filesystem::path& video,
                                       const std::vector<double>& timestamps,
                                       double threshold = kDefaultBlackThreshold);

// ---------------------------------------------------------------------------
// Container inspection.

struct Mp4Info {
    bool parsed = false;
    bool has_video = false;
    bool has_audio = false;
};

struct WavInfo {
    bool parsed = false;
    int sample_rate = 0;
    int channels = 0;
    int bits_per_sample = 0;
    std::uint64_t data_bytes = 0;

    double duration_s() const noexcept;
};

// Walks moov/trak/mdia/hdlr boxes for 'vide' and 'soun' handlers.
Mp4Info probe_mp4(const std::filesystem::path& path);
WavInfo probe_wav(const std::filesystem::path& path);

struct MediaAssets {
    std::filesystem::path video;
    std::filesystem::path audio;
};

struct MediaValidation {
    bool ok = false;
    std::string reason;  // "missing-video", "missing-audio", "unreadable-video", "unreadable-audio"
};

MediaValidation validate_media(const MediaAssets& assets);

// Minimal but well-formed containers, used by the desk-run stubs and tests.
void write_minimal_mp4(const std::filesystem::path& path, bool with_video, bool with_audio);
void write_wav(const std::filesystem::path& path, int sample_rate, int channels, std::span<const std::int16_t> samples);

// ---------------------------------------------------------------------------
// External command execution.

enum class CommandPurpose { Download, VideoTranscode, AudioTranscode };

std::string_view purpose_name(CommandPurpose p) noexcept;

struct CommandInvocation {
    CommandPurpose purpose = CommandPurpose::Download;
    std::vector<std::string> args;
    std::filesystem::path output;
    std::string video_id;
};

class CommandRunner {
public:
    virtual ~CommandRunner() = default;
    // Returns the process exit status; 0 is success.
    virtual int run(const CommandInvocation& invocation) = 0;
};

// posix_spawnp + waitpid.
class ProcessRunner final : public CommandRunner {
public:
    int run(const CommandInvocation& invocation) override;
};

struct FetchResult {
    bool ok = false;
    std::string reason;
    std::vector<std::vector<std::string>> commands;  // in execution order
    MediaAssets assets;
};

// Download, transcode both streams, drop the intermediate, then validate.
FetchResult fetch_segment(const MediaSegmentSpec& spec, const std::string& sample_id,
                          const std::filesystem::path& media_dir, CommandRunner& runner,
                          const CommandTemplates& templates = CommandTemplates::defaults());

}  // namespace audsem::media
