#include "audsem/pipeline.hpp"

#include <algorithm>
#include <fstream>

#include "audsem/http_backends.hpp"
#include "audsem/parallel.hpp"
#include "audsem/shards.hpp"
#include "audsem/synthesize.hpp"
#include "audsem/text.hpp"

namespace audsem::harness {

using io::json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Backends.

BackendSet::~BackendSet() = default;

std::unique_ptr<BackendSet> BackendSet::from_config(const Config& config) {
    std::unique_ptr<BackendSet> set(new BackendSet());
    auto& v = set->view_;
    if (config.backend_mode == "stub") {
        auto script = config.stub_script.empty() ? stub::StubScript{} : stub::StubScript::load(config.stub_script);
        set->world_ = std::make_unique<stub::StubWorld>(std::move(script), config.embedding_dim);
        auto* w = set->world_.get();
        v.classifier = &w->classifier();
        v.mining_judge = &w->mining_judge();
        v.runner = &w->runner();
        v.probe = &w->probe();
        v.inference.set_all(w->inference());
        v.embedding = &w->embedding();
        v.generator = &w->generator();
        v.synthesis_judge = &w->synthesis_judge();
        v.on_candidates = [w](const std::vector<mining::CaptionCandidate>& c) { w->register_candidates(c); };
        return set;
    }

    const auto& ep = config.endpoints;
    auto own = [&](auto ptr) {
        auto* raw = ptr.get();
        set->owned_.push_back(std::shared_ptr<void>(std::move(ptr)));
        return raw;
    };
    const int t = config.timeout_ms;
    const auto& r = config.retry;
    if (!ep.mining_judge.empty()) v.mining_judge = own(std::make_shared<http::HttpJudge>(ep.mining_judge, t, r));
    if (!ep.classifier.empty()) v.classifier = own(std::make_shared<http::HttpClassifier>(ep.classifier, t, r));
    if (!ep.embedding.empty()) v.embedding = own(std::make_shared<http::HttpEmbedding>(ep.embedding, t, r));
    if (!ep.generator.empty()) v.generator = own(std::make_shared<http::HttpGenerator>(ep.generator, t, r));
    if (!ep.synthesis_judge.empty()) {
        v.synthesis_judge = own(std::make_shared<http::HttpJudge>(ep.synthesis_judge, t, r));
    }
    if (!ep.inference.empty()) v.inference.set_all(*own(std::make_shared<http::HttpInference>(ep.inference, t, r)));
    for (const auto& [role, url] : ep.roles) {
        v.inference.set(*annotate::role_from_name(role), *own(std::make_shared<http::HttpInference>(url, t, r)));
    }
    v.runner = own(std::make_shared<media::ProcessRunner>());
    v.probe = own(std::make_shared<media::FfmpegFrameProbe>(config.ffmpeg));
    return set;
}

// ---------------------------------------------------------------------------

json to_json(const StageReport& r) {
    return {{"stage", std::string(stage_name(r.stage))},
            {"eligible", r.eligible},
            {"processed", r.processed},
            {"succeeded", r.succeeded},
            {"dropped", r.dropped},
            {"errors", r.errors},
            {"skipped", r.skipped},
            {"details", r.details}};
}

StageAborted::StageAborted(StageReport report)
    : Error("stage " + std::string(stage_name(report.stage)) + " aborted: " + std::to_string(report.errors) +
            " errors out of " + std::to_string(report.succeeded + report.dropped + report.errors) +
            " exceed the failure ceiling"),
      report_(std::move(report)) {}

std::vector<mining::SubtitleLine> read_subtitles(const fs::path& input) {
    if (input.empty()) throw ConfigError("input.subtitles is not set");
    if (fs::is_directory(input)) {
        std::vector<fs::path> files;
        for (const auto& de : fs::directory_iterator(input)) {
            if (de.path().extension() == ".srt") files.push_back(de.path());
        }
        std::sort(files.begin(), files.end());
        std::vector<mining::SubtitleLine> lines;
        for (const auto& f : files) {
            auto part = mining::parse_srt(io::read_file(f), f.stem().string());
            lines.insert(lines.end(), part.begin(), part.end());
        }
        return lines;
    }
    if (!fs::is_regular_file(input)) throw ConfigError("subtitle input not found: " + input.string());
    return mining::read_subtitle_jsonl(input);
}

namespace {

struct Outcome {
    bool ok = true;
    std::string reason;
    bool error = false;
};

template <typename T>
T& require(T* backend, const char* name) {
    if (!backend) throw ConfigError(std::string("no backend configured for ") + name);
    return *backend;
}

void write_json(const fs::path& path, const json& j) { io::write_file_atomic(path, j.dump(2) + "\n"); }

json read_json(const fs::path& path) { return json::parse(io::read_file(path)); }

}  // namespace

Pipeline::Pipeline(Config config, Backends& backends, RunManifest& manifest, std::ostream* log)
    : config_(std::move(config)), backends_(backends), manifest_(manifest), log_(log), layout_{config_.run_dir()} {}

void Pipeline::say(const std::string& line) const {
    if (log_) *log_ << line << '\n';
}

const std::map<std::string, mining::CaptionCandidate>& Pipeline::candidates() {
    if (!candidates_) {
        candidates_.emplace();
        std::vector<mining::CaptionCandidate> list;
        if (fs::exists(layout_.candidates())) {
            for (const auto& j : io::read_jsonl(layout_.candidates())) {
                auto c = mining::candidate_from_json(j);
                candidates_->emplace(c.sample_id(), c);
                list.push_back(std::move(c));
            }
        }
        if (backends_.on_candidates) backends_.on_candidates(list);
    }
    return *candidates_;
}

std::vector<std::string> Pipeline::ready_for(Stage stage) const {
    std::vector<std::string> ids;
    if (stage == Stage::Mine) return ids;
    const auto prev = static_cast<Stage>(static_cast<int>(stage) - 1);
    for (const auto& [id, st] : manifest_.samples()) {
        if (!st.failed() && st.completed && *st.completed == prev) ids.push_back(id);
    }
    return ids;
}

void Pipeline::record(StageReport& rep, const std::string& id, Stage stage, bool ok, const std::string& reason,
                      bool error) {
    ManifestEvent e;
    e.sample_id = id;
    e.stage = stage;
    e.ok = ok;
    e.reason = ok ? std::string() : reason;
    e.error = !ok && error;
    manifest_.append(e);
    ++rep.processed;
    if (ok) ++rep.succeeded;
    else if (e.error) ++rep.errors;
    else ++rep.dropped;
}

void Pipeline::check_ceiling(const StageReport& rep) const {
    const auto total = rep.succeeded + rep.dropped + rep.errors;
    if (total == 0) return;
    if (static_cast<double>(rep.errors) / static_cast<double>(total) > config_.failure_ceiling) {
        throw StageAborted(rep);
    }
}

StageReport Pipeline::run_stage(Stage stage) {
    StageReport rep;
    switch (stage) {
        case Stage::Mine: rep = mine(); break;
        case Stage::Fetch: rep = fetch(); break;
        case Stage::Annotate: rep = annotate(); break;
        case Stage::Filter: rep = filter(); break;
        case Stage::Synthesize: rep = synthesize(); break;
        case Stage::Package: rep = package(); break;
    }
    say(std::string(stage_name(stage)) + ": eligible " + std::to_string(rep.eligible) + ", ok " +
        std::to_string(rep.succeeded) + ", dropped " + std::to_string(rep.dropped) + ", errors " +
        std::to_string(rep.errors) + (rep.skipped ? " (nothing to do)" : ""));
    if (!config_.dry_run) check_ceiling(rep);
    return rep;
}

std::vector<StageReport> Pipeline::run_all() {
    std::vector<StageReport> reports;
    for (auto s : kAllStages) reports.push_back(run_stage(s));
    if (!config_.dry_run) {
        write_stats();
        write_summary();
    }
    return reports;
}

namespace {

// Runs fn over ids in batches on the worker pool, then hands each outcome to
// sink in id order so the event log does not depend on scheduling.
template <typename Fn, typename Sink>
void in_batches(const std::vector<std::string>& ids, std::size_t workers, Fn&& fn, Sink&& sink) {
    const std::size_t batch = std::max<std::size_t>(1, workers) * 4;
    for (std::size_t start = 0; start < ids.size(); start += batch) {
        const std::size_t n = std::min(batch, ids.size() - start);
        std::vector<Outcome> out(n);
        parallel_for(n, workers, [&](std::size_t i) {
            try {
                out[i] = fn(ids[start + i]);
            } catch (const std::exception& e) {
                out[i] = {false, std::string("exception: ") + e.what(), true};
            }
        });
        for (std::size_t i = 0; i < n; ++i) sink(ids[start + i], out[i]);
    }
}

}  // namespace

StageReport Pipeline::mine() {
    StageReport rep;
    rep.stage = Stage::Mine;
    std::vector<mining::CaptionCandidate> kept;
    if (fs::exists(layout_.candidates())) {
        for (const auto& j : io::read_jsonl(layout_.candidates())) kept.push_back(mining::candidate_from_json(j));
        if (fs::exists(layout_.mining_report())) rep.details = read_json(layout_.mining_report());
        rep.details["reused"] = true;
    } else {
        const auto lines = read_subtitles(config_.subtitles);
        if (config_.dry_run) {
            say("mine: would classify " + std::to_string(lines.size()) + " subtitle lines");
            rep.details["dry_run"] = true;
            return rep;
        }
        mining::MiningOptions opt;
        opt.min_duration_s = config_.min_caption_s;
        opt.max_duration_s = config_.max_caption_s;
        opt.workers = config_.workers;
        opt.retry = config_.retry;
        opt.retry.sleep = config_.backend_mode == "stub" ? nullptr : std::function(default_sleep);
        auto res = mining::mine(lines, require(backends_.classifier, "classifier"),
                                require(backends_.mining_judge, "mining_judge"), opt);
        std::vector<json> rejects;
        for (const auto& r : res.rejects) rejects.push_back(mining::to_json(r));
        io::write_file_atomic(layout_.rejects(), io::to_jsonl(rejects));
        write_json(layout_.mining_report(), mining::to_json(res.report));
        std::vector<json> cands;
        for (const auto& c : res.kept) cands.push_back(mining::to_json(c));
        io::write_file_atomic(layout_.candidates(), io::to_jsonl(cands));
        rep.details = mining::to_json(res.report);
        rep.dropped = res.report.rejected_learned + res.report.rejected_judge;
        rep.errors = res.report.judge_failed;
        kept = std::move(res.kept);
    }
    candidates_.reset();
    candidates();

    std::sort(kept.begin(), kept.end(),
              [](const auto& a, const auto& b) { return a.sample_id() < b.sample_id(); });
    rep.eligible = kept.size();
    for (const auto& c : kept) {
        if (!manifest_.find(c.sample_id())) record(rep, c.sample_id(), Stage::Mine, true, "", false);
    }
    rep.skipped = rep.processed == 0;
    return rep;
}

StageReport Pipeline::fetch() {
    StageReport rep;
    rep.stage = Stage::Fetch;
    const auto& cands = candidates();
    const auto ids = ready_for(Stage::Fetch);
    rep.eligible = ids.size();
    rep.skipped = ids.empty();
    if (config_.dry_run) {
        for (const auto& id : ids) {
            const auto& c = cands.at(id);
            media::MediaSegmentSpec spec(c.video_id, c.start_s, c.end_s);
            const auto src = layout_.media_dir() / (id + ".src.mp4");
            for (const auto& cmd :
                 {media::build_download_command(spec, src, config_.commands),
                  media::build_video_transcode_command(src, layout_.media_dir() / (id + ".mp4"), config_.commands),
                  media::build_audio_transcode_command(src, layout_.media_dir() / (id + ".wav"), config_.commands)}) {
                say(text::join(cmd, " "));
            }
        }
        rep.details["dry_run"] = true;
        return rep;
    }
    auto& runner = require(backends_.runner, "command runner");
    in_batches(
        ids, config_.workers,
        [&](const std::string& id) {
            const auto& c = cands.at(id);
            media::MediaSegmentSpec spec(c.video_id, c.start_s, c.end_s);
            const auto r = media::fetch_segment(spec, id, layout_.media_dir(), runner, config_.commands);
            write_json(layout_.fetch_log(id), {{"sample_id", id}, {"commands", r.commands}, {"ok", r.ok},
                                               {"reason", r.reason}});
            if (r.ok) return Outcome{};
            return Outcome{false, r.reason, r.reason.find("-failed:") != std::string::npos};
        },
        [&](const std::string& id, const Outcome& o) { record(rep, id, Stage::Fetch, o.ok, o.reason, o.error); });
    return rep;
}

StageReport Pipeline::annotate() {
    StageReport rep;
    rep.stage = Stage::Annotate;
    const auto& cands = candidates();
    const auto ids = ready_for(Stage::Annotate);
    rep.eligible = ids.size();
    rep.skipped = ids.empty();
    if (config_.dry_run) {
        rep.details["dry_run"] = true;
        return rep;
    }
    annotate::AnnotateOptions opt;
    opt.detection_threshold = config_.detection_threshold;
    opt.music_threshold = config_.music_threshold;
    opt.top_k = config_.top_k;
    opt.retry.max_attempts = 1;  // HTTP clients retry on their own
    in_batches(
        ids, config_.workers,
        [&](const std::string& id) {
            const auto& c = cands.at(id);
            media::MediaAssets assets{layout_.media_dir() / (id + ".mp4"), layout_.media_dir() / (id + ".wav")};
            const auto plan = annotate::make_frame_plan(require(backends_.probe, "frame probe"), assets.video,
                                                        c.duration_s, config_.black_threshold);
            try {
                const auto bundle = annotate::annotate_segment(assets, c.duration_s, backends_.inference, plan, opt);
                write_json(layout_.annotation(id), annotate::to_json(bundle));
            } catch (const annotate::AnnotationError& e) {
                return Outcome{false, "annotation-error", true};
            }
            return Outcome{};
        },
        [&](const std::string& id, const Outcome& o) {
            record(rep, id, Stage::Annotate, o.ok, o.reason, o.error);
        });
    return rep;
}

StageReport Pipeline::filter() {
    StageReport rep;
    rep.stage = Stage::Filter;
    const auto& cands = candidates();
    const auto pending = ready_for(Stage::Filter);
    rep.eligible = pending.size();
    if (pending.empty() || config_.dry_run) {
        rep.skipped = pending.empty();
        if (config_.dry_run) rep.details["dry_run"] = true;
        return rep;
    }
    // The input set is every annotated sample, including ones a previous
    // partial run already decided, so the modality means are reproducible.
    const auto ids = manifest_.completed(Stage::Annotate);
    auto& embedder = require(backends_.embedding, "embedding");
    std::vector<embed::FilterInput> inputs(ids.size());
    parallel_for(ids.size(), config_.workers, [&](std::size_t i) {
        const auto& id = ids[i];
        const auto& c = cands.at(id);
        const auto bundle = annotate::bundle_from_json(read_json(layout_.annotation(id)));
        auto& in = inputs[i];
        in.sample_id = id;
        in.duration_s = c.duration_s;
        auto get = [&](embed::EmbeddingKind kind, const std::string& payload) -> std::optional<embed::EmbeddingVector> {
            try {
                return embedder.embed(kind, payload);
            } catch (const std::exception&) {
                return std::nullopt;
            }
        };
        in.audio = get(embed::EmbeddingKind::Audio, (layout_.media_dir() / (id + ".wav")).string());
        in.text = get(embed::EmbeddingKind::Text, c.content());
        in.generated_caption = get(embed::EmbeddingKind::Text, bundle.audio.general_caption);
    });
    const auto outcome = embed::run_filters(inputs, config_.filter);

    std::vector<json> verdicts;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const auto& v = outcome.verdicts[i];
        verdicts.push_back({{"sample_id", ids[i]},
                            {"kept", v.kept},
                            {"reason", v.reason},
                            {"audio_distance", v.audio_distance},
                            {"text_distance", v.text_distance},
                            {"alignment", outcome.alignment[i]}});
    }
    io::write_file_atomic(layout_.filter_verdicts(), io::to_jsonl(verdicts));
    write_json(layout_.filter_report(), embed::to_json(outcome.report));
    rep.details = embed::to_json(outcome.report);

    for (const auto& id : pending) {
        const auto i = static_cast<std::size_t>(std::lower_bound(ids.begin(), ids.end(), id) - ids.begin());
        const auto& v = outcome.verdicts[i];
        record(rep, id, Stage::Filter, v.kept, v.reason, v.reason == "missing-embedding");
    }
    return rep;
}

StageReport Pipeline::synthesize() {
    StageReport rep;
    rep.stage = Stage::Synthesize;
    const auto& cands = candidates();
    const auto ids = ready_for(Stage::Synthesize);
    rep.eligible = ids.size();
    rep.skipped = ids.empty();
    if (config_.dry_run) {
        rep.details["dry_run"] = true;
        return rep;
    }
    synth::SynthesisOptions opt;
    opt.max_attempts = config_.max_attempts;
    opt.semantic_mode = config_.semantic_mode;
    opt.bounds = config_.bounds;
    std::size_t calls = 0;
    std::mutex calls_mu;
    in_batches(
        ids, config_.workers,
        [&](const std::string& id) {
            const auto& c = cands.at(id);
            const auto bundle = annotate::bundle_from_json(read_json(layout_.annotation(id)));
            const auto prompt = synth::build_prompt(bundle, c);
            const auto out = synth::judge_and_retry(require(backends_.generator, "generator"),
                                                    require(backends_.synthesis_judge, "synthesis_judge"), prompt, opt);
            {
                std::lock_guard lock(calls_mu);
                calls += static_cast<std::size_t>(out.generator_calls);
            }
            json attempts = json::array();
            for (const auto& a : out.attempts) attempts.push_back({{"attempt", a.attempt}, {"outcome", a.outcome}});
            json doc = {{"sample_id", id}, {"generator_calls", out.generator_calls}, {"attempts", attempts}};
            json records = json::array();
            if (out.reply) {
                doc["reply"] = synth::to_json(*out.reply);
                for (const auto& r :
                     synth::expand_tasks(id, *out.reply, config_.seed, config_.semantic_mode, config_.split)) {
                    records.push_back(synth::to_json(r));
                }
            } else {
                doc["reply"] = nullptr;
            }
            doc["records"] = records;
            write_json(layout_.synthesis(id), doc);
            if (out.reply) return Outcome{};
            const bool all_backend = std::all_of(out.attempts.begin(), out.attempts.end(), [](const auto& a) {
                return text::starts_with(a.outcome, "backend:");
            });
            return Outcome{false, "synthesis-skipped", all_backend};
        },
        [&](const std::string& id, const Outcome& o) {
            record(rep, id, Stage::Synthesize, o.ok, o.reason, o.error);
        });
    rep.details["generator_calls"] = calls;
    return rep;
}

StageReport Pipeline::package() {
    StageReport rep;
    rep.stage = Stage::Package;
    const auto& cands = candidates();
    const auto pending = ready_for(Stage::Package);
    rep.eligible = pending.size();
    if (pending.empty() || config_.dry_run) {
        rep.skipped = pending.empty();
        if (config_.dry_run) rep.details["dry_run"] = true;
        return rep;
    }
    // Every synthesized sample is repacked so shard boundaries do not depend
    // on how earlier runs were interrupted.
    std::vector<std::string> ids;
    for (const auto& id : manifest_.completed(Stage::Synthesize)) {
        if (!manifest_.find(id)->failed()) ids.push_back(id);
    }
    std::vector<harness::ShardEntry> entries;
    std::map<std::string, json> records_by_id;
    for (const auto& id : ids) {
        const auto synth_doc = read_json(layout_.synthesis(id));
        records_by_id[id] = synth_doc.at("records");
        json meta = {{"sample_id", id},
                     {"caption", mining::to_json(cands.at(id))},
                     {"annotation", read_json(layout_.annotation(id))},
                     {"records", synth_doc.at("records")}};
        entries.push_back({id,
                           {{"mp4", layout_.media_dir() / (id + ".mp4"), std::nullopt},
                            {"wav", layout_.media_dir() / (id + ".wav"), std::nullopt},
                            {"json", {}, meta.dump(2) + "\n"}}});
    }
    const auto packed = pack_shards(entries, layout_.shards_dir(), config_.shard_size);

    std::map<std::string, std::string> skipped;
    for (const auto& s : packed.skipped) skipped[s.key] = s.reason;
    std::vector<json> records;
    for (const auto& id : ids) {
        if (skipped.count(id)) continue;
        for (const auto& r : records_by_id[id]) records.push_back(r);
    }
    io::write_file_atomic(layout_.records(), io::to_jsonl(records));
    rep.details = {{"shards", packed.shards.size()}, {"records", records.size()}, {"skipped", skipped}};

    for (const auto& id : pending) {
        auto it = skipped.find(id);
        if (it == skipped.end()) record(rep, id, Stage::Package, true, "", false);
        else record(rep, id, Stage::Package, false, it->second, true);
    }
    return rep;
}

CorpusStats Pipeline::write_stats() {
    std::vector<StatsRecord> recs;
    std::map<std::string, std::vector<std::string>> tags;
    if (fs::exists(layout_.records())) {
        for (const auto& j : io::read_jsonl(layout_.records())) {
            auto r = synth::record_from_json(j);
            auto it = tags.find(r.sample_id);
            if (it == tags.end()) {
                std::vector<std::string> labels;
                const auto bundle = annotate::bundle_from_json(read_json(layout_.annotation(r.sample_id)));
                for (const auto& l : bundle.audio.tags) labels.push_back(l.label);
                it = tags.emplace(r.sample_id, std::move(labels)).first;
            }
            recs.push_back({std::move(r), it->second});
        }
    }
    const auto stats = corpus_stats(recs);
    write_json(layout_.stats_json(), to_json(stats));
    io::write_file_atomic(layout_.stats_csv(), to_csv(stats));
    return stats;
}

json Pipeline::summary() const {
    json counts = json::object();
    for (auto s : kAllStages) counts[std::string(stage_status(s))] = manifest_.completed(s).size();
    std::map<std::string, std::size_t> failures;
    for (const auto& [id, st] : manifest_.samples()) {
        if (st.failed()) ++failures[std::string(stage_name(*st.failed_at)) + ":" + st.reason];
    }
    std::size_t records = 0;
    if (fs::exists(layout_.records())) records = io::read_jsonl(layout_.records()).size();
    std::size_t shards = 0;
    if (fs::is_directory(layout_.shards_dir())) {
        for (const auto& de : fs::directory_iterator(layout_.shards_dir())) {
            if (de.path().extension() == ".tar") ++shards;
        }
    }
    return {{"run_id", config_.run_id},
            {"samples", manifest_.samples().size()},
            {"completed", counts},
            {"failures", failures},
            {"task_records", records},
            {"shards", shards}};
}

void Pipeline::write_summary() const { write_json(layout_.summary(), summary()); }

}  // namespace audsem::harness
