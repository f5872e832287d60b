#include <doctest.h>

#include <algorithm>
#include <fstream>

#include "audsem/media_acquire.hpp"
#include "audsem/stub_backends.hpp"
#include "support.hpp"

using namespace audsem;
using namespace audsem::media;

namespace {

struct RecordingRunner : CommandRunner {
    std::vector<CommandInvocation> seen;
    int fail_at = -1;
    bool with_video = true;
    std::size_t audio_samples = 64;
    int run(const CommandInvocation& inv) override {
        seen.push_back(inv);
        if (static_cast<int>(seen.size()) - 1 == fail_at) return 7;
        switch (inv.purpose) {
            case CommandPurpose::Download: io::write_file_atomic(inv.output, "src"); break;
            case CommandPurpose::VideoTranscode: write_minimal_mp4(inv.output, with_video, true); break;
            case CommandPurpose::AudioTranscode: {
                std::vector<std::int16_t> pcm(audio_samples, 100);
                write_wav(inv.output, kAudioSampleRate, kAudioChannels, pcm);
                break;
            }
        }
        return 0;
    }
};

struct TableProbe : FrameProbe {
    std::function<double(double)> f;
    double mean_intensity(const std::filesystem::path&, double t) override { return f(t); }
};

}  // namespace

TEST_CASE("media: target constants") {
    CHECK(kVideoHeight == 360);
    CHECK(kVideoFps == 2);
    CHECK(kAudioSampleRate == 32000);
    CHECK(kAudioBitDepth == 16);
    CHECK(kAudioChannels == 1);
}

TEST_CASE("media: download command") {
    const MediaSegmentSpec spec("abc", 3.0, 7.5);
    const auto cmd = build_download_command(spec, "out.mp4");
    const auto sec = std::find(cmd.begin(), cmd.end(), "--download-sections");
    REQUIRE(sec != cmd.end());
    REQUIRE(sec + 1 != cmd.end());
    CHECK(*(sec + 1) == "*3.0-7.5");
    const auto vid = std::find(cmd.begin(), cmd.end(), "abc");
    REQUIRE(vid != cmd.end());
    CHECK(sec < vid);
    CHECK(cmd == build_download_command(spec, "out.mp4"));
    CHECK_THROWS(MediaSegmentSpec("abc", 7.5, 7.5));
    CHECK_THROWS(MediaSegmentSpec("abc", 8.0, 7.5));
    CHECK_THROWS(MediaSegmentSpec("", 1.0, 2.0));
    CHECK(MediaSegmentSpec("x", 0.125, 10.0).section_expression() == "*0.125-10.0");
}

TEST_CASE("media: transcode commands carry the standard formats") {
    const auto v = build_video_transcode_command("in.mp4", "out.mp4");
    CHECK(std::find(v.begin(), v.end(), "scale=-2:360,fps=2") != v.end());
    const auto a = build_audio_transcode_command("in.mp4", "out.wav");
    auto after = [&](const char* flag) { return *(std::find(a.begin(), a.end(), flag) + 1); };
    CHECK(after("-ar") == "32000");
    CHECK(after("-ac") == "1");
    CHECK(after("-c:a") == "pcm_s16le");
    CHECK(a.back() == "out.wav");
}

TEST_CASE("media: template expansion") {
    CHECK(expand_template({"a{x}b", "{y}", "{"}, {{"x", "1"}, {"y", "two"}}) ==
          std::vector<std::string>{"a1b", "two", "{"});
    CHECK_THROWS(expand_template({"{missing}"}, {{"x", "1"}}));
}

TEST_CASE("media: frame plans") {
    CHECK(plan_image_frames(1.5) == std::vector<double>{0.5, 1.0});
    CHECK(plan_image_frames(8.0) == std::vector<double>{1.0, 3.0, 5.0, 7.0});
    CHECK(plan_image_frames(2.0).size() == 4);
    CHECK_THROWS(plan_image_frames(0.0));
    CHECK_THROWS(plan_image_frames(-1.0));
    const auto v = plan_video_frames(8.0);
    REQUIRE(v.size() == 8);
    for (int i = 0; i < 8; ++i) CHECK(v[static_cast<std::size_t>(i)] == doctest::Approx(0.5 + i));
    CHECK(plan_video_frames(4.0).front() == doctest::Approx(0.25));
    CHECK_THROWS(plan_video_frames(0.0));
}

TEST_CASE("media: frame plan properties") {
    testsupport::Gen g(41);
    for (int i = 0; i < 2000; ++i) {
        const double d = g.coin() ? g.uniform(1e-3, 2.0) : g.uniform(1.9, 60.0);
        const auto img = plan_image_frames(d);
        CHECK(img.size() == (d < 2.0 ? 2u : 4u));
        for (const auto& plan : {img, plan_video_frames(d)}) {
            CHECK(std::is_sorted(plan.begin(), plan.end()));
            CHECK(std::adjacent_find(plan.begin(), plan.end()) == plan.end());
            CHECK(plan.front() > 0.0);
            CHECK(plan.back() < d);
        }
    }
}

TEST_CASE("media: black frames") {
    CHECK(is_black_frame(0.0));
    CHECK_FALSE(is_black_frame(128.0));
    CHECK(is_black_frame(9.9));
    CHECK_FALSE(is_black_frame(10.0));
    CHECK_THROWS(is_black_frame(-1.0));
    CHECK_THROWS(is_black_frame(256.0));
    testsupport::Gen g(42);
    for (int i = 0; i < 1000; ++i) {
        double a = g.uniform(0, 255), b = g.uniform(0, 255);
        if (a > b) std::swap(a, b);
        if (is_black_frame(b)) CHECK(is_black_frame(a));
    }
    const std::vector<std::uint8_t> px{0, 10, 20};
    CHECK(mean_intensity(px) == doctest::Approx(10.0));
}

TEST_CASE("media: sample_frames marks black frames") {
    TableProbe probe;
    probe.f = [](double t) { return t < 2.0 ? 3.0 : 120.0; };
    const auto frames = sample_frames(probe, "x.mp4", plan_image_frames(8.0));
    REQUIRE(frames.size() == 4);
    CHECK(frames[0].is_black);
    CHECK_FALSE(frames[1].is_black);
    CHECK(frames[1].mean_intensity == 120.0);
}

TEST_CASE("media: container probes and validation") {
    const auto dir = testsupport::scratch_dir("media");
    write_minimal_mp4(dir / "av.mp4", true, true);
    write_minimal_mp4(dir / "a.mp4", false, true);
    const std::vector<std::int16_t> pcm(32000, 1);
    write_wav(dir / "one.wav", kAudioSampleRate, 1, pcm);
    write_wav(dir / "empty.wav", kAudioSampleRate, 1, {});
    io::write_file_atomic(dir / "junk.mp4", "not a container");

    const auto av = probe_mp4(dir / "av.mp4");
    CHECK(av.parsed);
    CHECK(av.has_video);
    CHECK(av.has_audio);
    CHECK_FALSE(probe_mp4(dir / "a.mp4").has_video);
    CHECK_FALSE(probe_mp4(dir / "junk.mp4").parsed);

    const auto w = probe_wav(dir / "one.wav");
    CHECK(w.parsed);
    CHECK(w.sample_rate == 32000);
    CHECK(w.bits_per_sample == 16);
    CHECK(w.channels == 1);
    CHECK(w.duration_s() == doctest::Approx(1.0));

    CHECK(validate_media({dir / "av.mp4", dir / "one.wav"}).ok);
    CHECK(validate_media({dir / "a.mp4", dir / "one.wav"}).reason == "missing-video");
    CHECK(validate_media({dir / "av.mp4", dir / "empty.wav"}).reason == "missing-audio");
    CHECK(validate_media({dir / "junk.mp4", dir / "one.wav"}).reason == "unreadable-video");
    CHECK(validate_media({dir / "av.mp4", dir / "nope.wav"}).ok == false);
}

TEST_CASE("media: fetch_segment") {
    const auto dir = testsupport::scratch_dir("fetch");
    const MediaSegmentSpec spec("vid", 1.0, 4.0);
    {
        RecordingRunner r;
        const auto res = fetch_segment(spec, "s1", dir, r);
        CHECK(res.ok);
        CHECK(res.commands.size() == 3);
        CHECK(r.seen[0].purpose == CommandPurpose::Download);
        CHECK(r.seen[2].purpose == CommandPurpose::AudioTranscode);
        CHECK(std::filesystem::exists(dir / "s1.mp4"));
        CHECK(std::filesystem::exists(dir / "s1.wav"));
        CHECK_FALSE(std::filesystem::exists(dir / "s1.src.mp4"));
    }
    {
        RecordingRunner r;
        r.fail_at = 0;
        const auto res = fetch_segment(spec, "s2", dir, r);
        CHECK_FALSE(res.ok);
        CHECK(res.reason == "download-failed:7");
        CHECK(res.commands.size() == 1);
    }
    {
        RecordingRunner r;
        r.with_video = false;
        CHECK(fetch_segment(spec, "s3", dir, r).reason == "missing-video");
    }
    {
        RecordingRunner r;
        r.audio_samples = 0;
        CHECK(fetch_segment(spec, "s4", dir, r).reason == "missing-audio");
    }
}
