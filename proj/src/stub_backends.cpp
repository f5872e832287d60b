#include "audsem/stub_backends.hpp"

#include <cmath>

#include "audsem/synthesize.hpp"
#include "audsem/text.hpp"

namespace audsem::stub {

using io::json;

StubScript StubScript::from_json(const json& j) {
    StubScript s;
    const std::pair<const char*, std::set<std::string>*> lists[] = {
        {"unavailable", &s.unavailable},
        {"audio_only", &s.audio_only},
        {"no_audio", &s.no_audio},
        {"black_video", &s.black_video},
        {"leading_black", &s.leading_black},
        {"music", &s.music},
        {"annotate_error", &s.annotate_error},
        {"embedding_error", &s.embedding_error},
        {"audio_outlier", &s.audio_outlier},
        {"misaligned", &s.misaligned},
        {"schema_fail_once", &s.schema_fail_once},
        {"judge_reject_always", &s.judge_reject_always},
        {"generator_down", &s.generator_down},
    };
    if (!j.is_object()) throw ConfigError("stub script must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        bool known = false;
        for (const auto& [name, set] : lists) {
            if (key != name) continue;
            known = true;
            try {
                for (const auto& id : value.get<std::vector<std::string>>()) set->insert(id);
            } catch (const json::exception&) {
                throw ConfigError("stub script: " + key + " must be a list of video ids");
            }
        }
        if (!known) throw ConfigError("stub script: unknown key " + key);
    }
    return s;
}

StubScript StubScript::load(const std::filesystem::path& path) {
    try {
        return from_json(json::parse(io::read_file(path)));
    } catch (const json::exception& e) {
        throw ConfigError("cannot parse stub script " + path.string() + ": " + e.what());
    }
}

std::string sample_id_from_ref(std::string_view media_ref) {
    auto ref = media_ref.substr(0, media_ref.find('#'));
    return std::filesystem::path(std::string(ref)).stem().string();
}

namespace {

bool is_filler(std::string_view w) {
    static constexpr std::string_view kFiller[] = {"a",  "an", "the", "and", "of", "in", "on",
                                                   "at", "to", "with", "is", "from", "into"};
    return std::find(std::begin(kFiller), std::end(kFiller), w) != std::end(kFiller);
}

std::string title(std::string w) {
    if (!w.empty() && w[0] >= 'a' && w[0] <= 'z') w[0] = static_cast<char>(w[0] - 'a' + 'A');
    return w;
}

ScoredLabel lab(std::string label, double score) { return {std::move(label), score, 1, std::nullopt}; }

std::string line_value(std::string_view text, std::string_view prefix) {
    const auto at = text.find(prefix);
    if (at == std::string_view::npos) return {};
    const auto start = at + prefix.size();
    const auto end = text.find('\n', start);
    return std::string(text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start));
}

std::string strip_brackets(std::string_view s) {
    s = text::trim_view(s);
    if (s.size() >= 2 && std::string_view("([{").find(s.front()) != std::string_view::npos) {
        s = s.substr(1, s.size() - 2);
    }
    return text::trim(s);
}

std::optional<std::pair<double, double>> fragment_range(std::string_view ref) {
    const auto at = ref.find("#t=");
    if (at == std::string_view::npos) return std::nullopt;
    const std::string frag(ref.substr(at + 3));
    const auto comma = frag.find(',');
    try {
        const double a = std::stod(frag.substr(0, comma));
        const double b = comma == std::string::npos ? a : std::stod(frag.substr(comma + 1));
        return std::make_pair(a, b);
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// Backend implementations.

namespace {

class MiningJudge final : public JudgeBackend {
public:
    std::string complete(std::string_view prompt) override { return stub_mining_verdict(prompt); }
};

class Runner final : public media::CommandRunner {
public:
    explicit Runner(const StubWorld& w) : w_(w) {}

    int run(const media::CommandInvocation& inv) override {
        const auto& s = w_.script();
        switch (inv.purpose) {
            case media::CommandPurpose::Download:
                if (s.unavailable.count(inv.video_id)) return 1;
                io::write_file_atomic(inv.output, "stub source " + inv.video_id);
                return 0;
            case media::CommandPurpose::VideoTranscode:
                media::write_minimal_mp4(inv.output, !s.audio_only.count(inv.video_id), true);
                return 0;
            case media::CommandPurpose::AudioTranscode: {
                std::vector<std::int16_t> pcm;
                if (!s.no_audio.count(inv.video_id)) {
                    const auto seed = text::fnv1a64(inv.video_id);
                    for (int i = 0; i < 320; ++i) {
                        pcm.push_back(static_cast<std::int16_t>(((seed >> (i % 48)) & 0x3FF) - 512));
                    }
                }
                media::write_wav(inv.output, media::kAudioSampleRate, media::kAudioChannels, pcm);
                return 0;
            }
        }
        return 1;
    }

private:
    const StubWorld& w_;
};

class Probe final : public media::FrameProbe {
public:
    explicit Probe(const StubWorld& w) : w_(w) {}

    double mean_intensity(const std::filesystem::path& video, double timestamp_s) override {
        const auto id = video.stem().string();
        const auto c = w_.candidate(id);
        const double duration = c ? c->duration_s : 0.0;
        if (w_.scripted(w_.script().black_video, id)) return 2.0;
        if (w_.scripted(w_.script().leading_black, id) && timestamp_s < duration / 2.0) return 3.0;
        return 96.0 + std::fmod(timestamp_s * 7.0, 20.0);
    }

private:
    const StubWorld& w_;
};

class Inference final : public InferenceBackend {
public:
    explicit Inference(const StubWorld& w) : w_(w) {}

    InferenceReply infer(const InferenceRequest& req) override {
        const auto id = sample_id_from_ref(req.media_ref);
        const auto c = w_.candidate(id);
        if (!c) throw BackendError("stub inference: unknown sample " + id, false);
        const auto terms = w_.content_terms(id);
        const auto content = text::join(terms, " ");
        const auto role = annotate::role_from_name(req.role);
        if (!role) throw BackendError("stub inference: unknown role " + req.role, false);

        InferenceReply r;
        switch (*role) {
            case annotate::Role::AudioCaption:
                if (w_.scripted(w_.script().annotate_error, id)) {
                    throw BackendError("stub audio captioner failed", false);
                }
                r.text = w_.audio_caption_for(id);
                break;
            case annotate::Role::AudioTags: {
                std::vector<ScoredLabel> tags;
                for (std::size_t i = 0; i < terms.size() && i < 7; ++i) {
                    tags.push_back(lab(title(terms[i]), 0.90 - 0.08 * static_cast<double>(i)));
                }
                if (w_.scripted(w_.script().music, id)) tags.push_back(lab("Music", 0.88));
                r.labels = std::move(tags);
                break;
            }
            case annotate::Role::AudioEvents: {
                const auto range = fragment_range(req.media_ref);
                const auto s = static_cast<std::size_t>(range ? range->first : 0.0);
                r.labels = std::vector<ScoredLabel>{
                    lab(title(terms[s % terms.size()]), 0.55 + 0.05 * static_cast<double>(s % 3)),
                };
                break;
            }
            case annotate::Role::AudioContext: r.text = "Short clip of " + content; break;
            case annotate::Role::MusicCaption:
                r.text = "A mellow instrumental track with soft piano and light percussion.";
                break;
            case annotate::Role::ImageCaption: r.text = "A still frame of an indoor room with a person"; break;
            case annotate::Role::ImageClassify: r.labels = std::vector<ScoredLabel>{lab("indoor", 0.62)}; break;
            case annotate::Role::ObjectDetect:
                r.labels = std::vector<ScoredLabel>{
                    {"person", 0.81, 1, std::vector<double>{0.10, 0.20, 0.50, 0.90}},
                    {"chair", 0.22, 1, std::vector<double>{0.60, 0.50, 0.90, 0.95}},
                };
                break;
            case annotate::Role::SceneClassify:
                r.labels = std::vector<ScoredLabel>{lab("living_room", 0.55), lab("office", 0.31)};
                break;
            case annotate::Role::VideoCaption: r.text = "A short video of an indoor scene."; break;
        }
        return r;
    }

private:
    const StubWorld& w_;
};

class Embedding final : public embed::EmbeddingBackend {
public:
    Embedding(const StubWorld& w, std::size_t dim) : w_(w), words_(dim, 1.0), no_bias_(dim, 0.0) {}

    embed::EmbeddingVector embed(embed::EmbeddingKind kind, std::string_view payload) override {
        if (kind == embed::EmbeddingKind::Text) return words_.embed_text(payload);
        const auto id = sample_id_from_ref(payload);
        if (w_.scripted(w_.script().embedding_error, id)) throw BackendError("stub embedding failed", false);
        if (w_.scripted(w_.script().audio_outlier, id)) {
            return no_bias_.embed_text("zzyzx warble glitch crackle burst");
        }
        return words_.embed_text(w_.audio_caption_for(id));
    }

private:
    const StubWorld& w_;
    embed::HashedBagOfWordsEmbedder words_;
    embed::HashedBagOfWordsEmbedder no_bias_;
};

class Generator final : public GeneratorBackend {
public:
    explicit Generator(const StubWorld& w) : w_(w) {}

    std::string generate(std::string_view prompt, SchemaId schema) override {
        const auto video_id = text::trim(line_value(prompt, "- Video ID: "));
        auto cc = line_value(prompt, "- Original Closed Caption: ");
        cc = cc.substr(0, cc.find(" (This is the most important"));
        const auto& s = w_.script();
        int attempt;
        {
            std::lock_guard lock(mu_);
            attempt = ++attempts_[video_id];
        }
        if (s.generator_down.count(video_id)) throw BackendError("stub generator unavailable", false);
        if (s.schema_fail_once.count(video_id) && attempt == 1) {
            return R"({"thinking": "Too short to count.", "answer": "A sound."})";
        }
        return stub_generation(strip_brackets(cc), schema == SchemaId::ThreePhase,
                               s.judge_reject_always.count(video_id) > 0)
            .dump();
    }

private:
    const StubWorld& w_;
    std::mutex mu_;
    std::map<std::string, int> attempts_;
};

class SynthesisJudge final : public JudgeBackend {
public:
    std::string complete(std::string_view prompt) override { return stub_synthesis_verdict(prompt); }
};

}  // namespace

struct StubWorld::Impl {
    explicit Impl(const StubWorld& w, std::size_t dim)
        : runner(w), probe(w), inference(w), embedding(w, dim), generator(w) {}

    mining::RuleReferenceClassifier classifier;
    MiningJudge mining_judge;
    Runner runner;
    Probe probe;
    Inference inference;
    Embedding embedding;
    Generator generator;
    SynthesisJudge synthesis_judge;
};

StubWorld::StubWorld(StubScript script, std::size_t embedding_dim)
    : script_(std::move(script)), embedding_dim_(embedding_dim), impl_(std::make_unique<Impl>(*this, embedding_dim)) {}

StubWorld::~StubWorld() = default;

void StubWorld::register_candidates(const std::vector<mining::CaptionCandidate>& candidates) {
    std::lock_guard lock(mu_);
    for (const auto& c : candidates) candidates_[c.sample_id()] = c;
}

std::optional<mining::CaptionCandidate> StubWorld::candidate(const std::string& sample_id) const {
    std::lock_guard lock(mu_);
    auto it = candidates_.find(sample_id);
    if (it == candidates_.end()) return std::nullopt;
    return it->second;
}

bool StubWorld::scripted(const std::set<std::string>& list, const std::string& sample_id) const {
    const auto c = candidate(sample_id);
    return c && list.count(c->video_id) > 0;
}

std::vector<std::string> StubWorld::content_terms(const std::string& sample_id) const {
    std::vector<std::string> terms;
    if (const auto c = candidate(sample_id)) {
        for (auto& t : text::alnum_tokens(c->content())) {
            if (!is_filler(t)) terms.push_back(std::move(t));
        }
    }
    if (terms.empty()) terms.push_back("sound");
    return terms;
}

std::string StubWorld::audio_caption_for(const std::string& sample_id) const {
    if (scripted(script_.misaligned, sample_id)) return "Quiet keyboard typing in an office with a humming computer fan.";
    return "The sound of " + text::join(content_terms(sample_id), " ") + ".";
}

mining::ClassifierBackend& StubWorld::classifier() { return impl_->classifier; }
JudgeBackend& StubWorld::mining_judge() { return impl_->mining_judge; }
media::CommandRunner& StubWorld::runner() { return impl_->runner; }
media::FrameProbe& StubWorld::probe() { return impl_->probe; }
InferenceBackend& StubWorld::inference() { return impl_->inference; }
embed::EmbeddingBackend& StubWorld::embedding() { return impl_->embedding; }
GeneratorBackend& StubWorld::generator() { return impl_->generator; }
JudgeBackend& StubWorld::synthesis_judge() { return impl_->synthesis_judge; }

// ---------------------------------------------------------------------------

json stub_generation(std::string_view content_in, bool semantic_mode, bool break_judge_rule) {
    const std::string content = content_in.empty() ? std::string("a sound") : text::to_lower(content_in);
    std::string thinking =
        "Okay, let me think about what is going on here. I can hear " + content +
        " quite clearly, and it seems to be the main event in this short clip. Hmm, the sound appears fairly "
        "close to the listener, and there is not much else competing with it. So the most likely explanation "
        "is that " + content +
        " happens in a fairly ordinary setting, maybe indoors. I would describe it plainly and keep the caption "
        "focused on what is audible.";
    if (break_judge_rule) thinking += " Based on the predictions per second, this order seems right.";
    std::string answer = content + " can be heard clearly in a quiet setting.";
    answer[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(answer[0])));

    json j = {{"thinking", thinking}, {"answer", answer}};
    if (semantic_mode) {
        j["semantic_elements"] = {
            {"agents_who", ""},
            {"sources_what", content},
            {"mechanisms_how", "producing " + content},
            {"temporal_when", "a brief single event"},
            {"spatial_where", "close to the listener, probably indoors"},
            {"acoustic_surfaces", "hard indoor surfaces"},
            {"signal_descriptors", "clear, mid-level"},
            {"auditory_attributes", "distinct and close"},
            {"non_auditory_sensation", "calm, ordinary"},
        };
    }

    static const std::vector<std::string> kPool = {
        "a car engine revving", "birds chirping outdoors", "a crowd applauding", "rain falling on a roof",
        "a telephone ringing",  "a dog barking",           "waves on a beach",   "a door slamming shut",
    };
    const auto h = text::fnv1a64(content);
    std::vector<std::string> distractors;
    for (std::size_t i = 0; distractors.size() < 3; ++i) {
        const auto& d = kPool[(h + i) % kPool.size()];
        // skip pool entries that share a word stem with the true answer
        bool close = false;
        for (const auto& w : text::split_words(d)) {
            if (w.size() >= 4 && text::to_lower(content).find(w.substr(0, 4)) != std::string::npos) close = true;
        }
        if ((!close || i >= kPool.size()) && d != content) distractors.push_back(d);
    }
    const char* questions[] = {"What sound is most prominent in the clip?",
                               "Which of these best describes the audio?", "What can be heard in this recording?"};
    json mcqa = json::array();
    for (std::size_t q = 0; q < 3; ++q) {
        const auto correct = static_cast<int>((h + q) % 4);
        std::vector<std::string> choices;
        std::size_t d = 0;
        for (int i = 0; i < 4; ++i) choices.push_back(i == correct ? content : distractors[(d++ + q) % 3]);
        mcqa.push_back({{"question", questions[q]}, {"choices", choices}, {"correct_index", correct}});
    }
    j["mcqa"] = mcqa;
    j["open_qa"] = json::array({
        {{"question", "What is the main sound in the clip?"}, {"answer", "The main sound is " + content + "."}},
        {{"question", "Where might this sound take place?"}, {"answer", "Probably in an ordinary indoor setting."}},
        {{"question", "Is the sound continuous or brief?"}, {"answer", "It is a brief event."}},
    });
    j["creative"] = json::array({
        {{"instruction", "Write a one-sentence story inspired by the audio."},
         {"answer", "In the quiet room, " + content + " broke the silence for a moment."}},
        {{"instruction", "Describe the mood this audio creates."}, {"answer", "Calm and ordinary, with a hint of "
                                                                              "curiosity."}},
        {{"instruction", "Suggest a title for this sound clip."}, {"answer", "A Moment of " + title(content)}},
    });
    return j;
}

std::string stub_mining_verdict(std::string_view prompt) {
    const auto caption = mining::caption_from_filter_prompt(prompt);
    if (!caption) return "No";
    static const mining::RuleReferenceClassifier kRules;
    return kRules.vote(strip_brackets(*caption)) ? "Yes" : "No";
}

std::string stub_synthesis_verdict(std::string_view prompt) {
    constexpr std::string_view kStart = "--- Generated Output Start ---\n";
    constexpr std::string_view kEnd = "\n--- Generated Output End ---";
    const auto a = prompt.find(kStart);
    const auto b = prompt.rfind(kEnd);
    if (a == std::string_view::npos || b == std::string_view::npos || b < a + kStart.size()) {
        return R"({"valid": false, "reason": "no generated output found"})";
    }
    json out;
    try {
        out = json::parse(prompt.substr(a + kStart.size(), b - a - kStart.size()));
    } catch (const json::exception&) {
        return R"({"valid": false, "reason": "output is not JSON"})";
    }
    const auto thinking = text::to_lower(out.value("thinking", ""));
    if (thinking.find("predictions per second") != std::string::npos) {
        return R"({"valid": false, "reason": "rule 2: thinking mentions predictions per second"})";
    }
    for (const char* field : {"audio caption", "audio tags", "closed caption", "detected objects"}) {
        if (thinking.find(field) != std::string::npos) {
            return json{{"valid", false}, {"reason", std::string("rule 3: thinking names ") + field}}.dump();
        }
    }
    return R"({"valid": true, "reason": ""})";
}

}  // namespace audsem::stub
