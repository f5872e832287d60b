#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <string>

#include "audsem/annotate.hpp"
#include "audsem/backends.hpp"
#include "audsem/caption_mining.hpp"
#include "audsem/embed_filter.hpp"
#include "audsem/io.hpp"
#include "audsem/media_acquire.hpp"

namespace audsem::stub {

// Video ids that get scripted behaviour in desk runs.
struct StubScript {
    std::set<std::string> unavailable;          // download fails
    std::set<std::string> audio_only;           // transcoded MP4 has no video track
    std::set<std::string> no_audio;             // WAV has no samples
    std::set<std::string> black_video;          // every frame black
    std::set<std::string> leading_black;        // first half of the clip black
    std::set<std::string> music;                // tags include Music
    std::set<std::string> annotate_error;       // audio captioner fails
    std::set<std::string> embedding_error;      // audio embedding fails
    std::set<std::string> audio_outlier;        // audio embedding far from the rest
    std::set<std::string> misaligned;           // audio caption unrelated to the closed caption
    std::set<std::string> schema_fail_once;     // first generator reply breaks the schema
    std::set<std::string> judge_reject_always;  // every reply breaks a judge rule
    std::set<std::string> generator_down;       // generator errors on every call

    static StubScript from_json(const io::json& j);
    static StubScript load(const std::filesystem::path& path);
};

// Sample id encoded in a media reference "<dir>/<sample_id>.<ext>[#t=...]".
std::string sample_id_from_ref(std::string_view media_ref);

// Deterministic backends for desk runs. Every reply is a pure function of the
// request, the registered candidates and the script, except the generator's
// per-video attempt counter.
class StubWorld {
public:
    explicit StubWorld(StubScript script, std::size_t embedding_dim = 256);
    ~StubWorld();

    void register_candidates(const std::vector<mining::CaptionCandidate>& candidates);
    std::optional<mining::CaptionCandidate> candidate(const std::string& sample_id) const;

    const StubScript& script() const noexcept { return script_; }

    // The caption the stub audio captioner returns for a sample.
    std::string audio_caption_for(const std::string& sample_id) const;

    mining::ClassifierBackend& classifier();
    JudgeBackend& mining_judge();
    media::CommandRunner& runner();
    media::FrameProbe& probe();
    InferenceBackend& inference();
    embed::EmbeddingBackend& embedding();
    GeneratorBackend& generator();
    JudgeBackend& synthesis_judge();

    // Words of a candidate's content without stopwords; never empty.
    std::vector<std::string> content_terms(const std::string& sample_id) const;
    bool scripted(const std::set<std::string>& list, const std::string& sample_id) const;

private:
    struct Impl;

    StubScript script_;
    std::size_t embedding_dim_;
    mutable std::mutex mu_;
    std::map<std::string, mining::CaptionCandidate> candidates_;
    std::unique_ptr<Impl> impl_;
};

// Generator reply the stub produces for a closed caption.
io::json stub_generation(std::string_view content, bool semantic_mode, bool break_judge_rule);

// Mining judge reply for a filter prompt: "Yes" or "No".
std::string stub_mining_verdict(std::string_view prompt);

// Synthesis judge reply for a judge prompt.
std::string stub_synthesis_verdict(std::string_view prompt);

}  // namespace audsem::stub
