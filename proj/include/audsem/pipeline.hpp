#pragma once

#include <functional>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "audsem/annotate.hpp"
#include "audsem/caption_mining.hpp"
#include "audsem/config.hpp"
#include "audsem/corpus_stats.hpp"
#include "audsem/embed_filter.hpp"
#include "audsem/manifest.hpp"
#include "audsem/media_acquire.hpp"
#include "audsem/stub_backends.hpp"

namespace audsem::harness {

// Non-owning view of every backend the stages use.
struct Backends {
    mining::ClassifierBackend* classifier = nullptr;
    JudgeBackend* mining_judge = nullptr;
    media::CommandRunner* runner = nullptr;
    media::FrameProbe* probe = nullptr;
    annotate::InferenceClients inference;
    embed::EmbeddingBackend* embedding = nullptr;
    GeneratorBackend* generator = nullptr;
    JudgeBackend* synthesis_judge = nullptr;
    // Told about the mined candidates before any per-sample stage runs.
    std::function<void(const std::vector<mining::CaptionCandidate>&)> on_candidates;
};

// Owns the backends selected by a config: the stub world in stub mode, HTTP
// clients and process runners in http mode.
class BackendSet {
public:
    static std::unique_ptr<BackendSet> from_config(const Config& config);
    ~BackendSet();

    Backends& view() noexcept { return view_; }
    stub::StubWorld* world() noexcept { return world_.get(); }

private:
    BackendSet() = default;

    Backends view_;
    std::unique_ptr<stub::StubWorld> world_;
    std::vector<std::shared_ptr<void>> owned_;
};

struct StageReport {
    Stage stage = Stage::Mine;
    std::size_t eligible = 0;   // samples ready for the stage
    std::size_t processed = 0;  // events appended in this invocation
    std::size_t succeeded = 0;
    std::size_t dropped = 0;  // policy drops
    std::size_t errors = 0;   // backend or I/O failures
    bool skipped = false;     // nothing to do
    io::json details = io::json::object();
};

io::json to_json(const StageReport& r);

// The error share of a stage exceeded the configured ceiling. Events are
// already recorded when this is thrown.
class StageAborted : public Error {
public:
    explicit StageAborted(StageReport report);
    const StageReport& report() const noexcept { return report_; }

private:
    StageReport report_;
};

// Fixed locations inside the run directory.
struct RunLayout {
    std::filesystem::path root;

    std::filesystem::path manifest() const { return root / "manifest.jsonl"; }
    std::filesystem::path candidates() const { return root / "mined" / "candidates.jsonl"; }
    std::filesystem::path rejects() const { return root / "mined" / "rejects.jsonl"; }
    std::filesystem::path mining_report() const { return root / "mined" / "report.json"; }
    std::filesystem::path media_dir() const { return root / "media"; }
    std::filesystem::path fetch_log(const std::string& id) const { return root / "fetch" / (id + ".json"); }
    std::filesystem::path annotation(const std::string& id) const { return root / "annotations" / (id + ".json"); }
    std::filesystem::path filter_report() const { return root / "filter" / "report.json"; }
    std::filesystem::path filter_verdicts() const { return root / "filter" / "verdicts.jsonl"; }
    std::filesystem::path synthesis(const std::string& id) const { return root / "synth" / (id + ".json"); }
    std::filesystem::path records() const { return root / "records.jsonl"; }
    std::filesystem::path shards_dir() const { return root / "shards"; }
    std::filesystem::path stats_json() const { return root / "stats" / "stats.json"; }
    std::filesystem::path stats_csv() const { return root / "stats" / "stats.csv"; }
    std::filesystem::path summary() const { return root / "summary.json"; }
};

class Pipeline {
public:
    Pipeline(Config config, Backends& backends, RunManifest& manifest, std::ostream* log = nullptr);

    // Runs one stage over the samples ready for it. Re-running a finished
    // stage appends nothing. Throws StageAborted past the failure ceiling.
    StageReport run_stage(Stage stage);

    // mine through package, then stats and summary.
    std::vector<StageReport> run_all();

    CorpusStats write_stats();
    io::json summary() const;
    void write_summary() const;

    const RunLayout& layout() const noexcept { return layout_; }

private:
    StageReport mine();
    StageReport fetch();
    StageReport annotate();
    StageReport filter();
    StageReport synthesize();
    StageReport package();

    const std::map<std::string, mining::CaptionCandidate>& candidates();
    std::vector<std::string> ready_for(Stage stage) const;
    void record(StageReport& report, const std::string& id, Stage stage, bool ok, const std::string& reason,
                bool error);
    void check_ceiling(const StageReport& report) const;
    void say(const std::string& line) const;

    Config config_;
    Backends& backends_;
    RunManifest& manifest_;
    std::ostream* log_;
    RunLayout layout_;
    std::optional<std::map<std::string, mining::CaptionCandidate>> candidates_;
};

// Reads subtitle input: a JSONL file, or a directory of <video_id>.srt files.
std::vector<mining::SubtitleLine> read_subtitles(const std::filesystem::path& input);

}  // namespace audsem::harness
