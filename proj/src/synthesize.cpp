#include "audsem/synthesize.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <stdexcept>

#include "audsem/prompts.hpp"
#include "audsem/tagparse.hpp"
#include "audsem/text.hpp"

namespace audsem::synth {

using io::json;

bool SemanticDescriptors::any() const noexcept {
    return std::any_of(fields.begin(), fields.end(), [](const std::string& f) { return !f.empty(); });
}

namespace {

constexpr std::string_view kAllTags[] = {
    tagparse::kThinkOpen,    tagparse::kThinkClose,    tagparse::kThinkingOpen, tagparse::kThinkingClose,
    tagparse::kSemanticOpen, tagparse::kSemanticClose, tagparse::kAnswerOpen,   tagparse::kAnswerClose,
};

bool has_tag(std::string_view s) {
    return std::any_of(std::begin(kAllTags), std::end(kAllTags),
                       [&](std::string_view t) { return s.find(t) != std::string_view::npos; });
}

std::string single_line(std::string_view s) {
    std::string out;
    for (auto w : text::split_words(s)) {
        if (!out.empty()) out += ' ';
        out += w;
    }
    return out;
}

const json& require(const json& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) throw ValidationError("missing-key", std::string("no \"") + key + "\"");
    return *it;
}

std::string require_string(const json& obj, const char* key) {
    const auto& v = require(obj, key);
    if (!v.is_string()) throw ValidationError("wrong-type", std::string("\"") + key + "\" must be a string");
    auto s = text::trim(v.get<std::string>());
    if (has_tag(s)) throw ValidationError("tag-in-content", std::string("\"") + key + "\" contains a response tag");
    return s;
}

json parse_object(std::string_view raw) {
    json j;
    try {
        j = json::parse(raw);
    } catch (const json::exception& e) {
        throw ValidationError("malformed-json", e.what());
    }
    if (!j.is_object()) throw ValidationError("wrong-type", "reply is not a JSON object");
    return j;
}

StructuredTriplet triplet_from(const json& j, bool semantic_mode, bool caption_task, const SchemaBounds& bounds) {
    StructuredTriplet t;
    t.thinking = require_string(j, "thinking");
    t.answer = require_string(j, "answer");
    const auto think_words = text::word_count(t.thinking);
    if (think_words < bounds.min_thinking_words) {
        throw ValidationError("thinking-too-short", std::to_string(think_words) + " words");
    }
    if (t.answer.empty()) throw ValidationError("empty-answer", "answer is empty");
    const auto answer_words = text::word_count(t.answer);
    if (caption_task && answer_words >= bounds.max_answer_words) {
        throw ValidationError("answer-too-long", std::to_string(answer_words) + " words");
    }
    if (semantic_mode) {
        const auto& s = require(j, "semantic_elements");
        if (!s.is_object()) throw ValidationError("wrong-type", "\"semantic_elements\" must be an object");
        SemanticDescriptors d;
        for (std::size_t i = 0; i < kSemanticFieldCount; ++i) {
            auto it = s.find(std::string(kSemanticKeys[i]));
            if (it == s.end() || it->is_null()) continue;
            if (!it->is_string()) {
                throw ValidationError("wrong-type", "semantic field " + std::string(kSemanticKeys[i]));
            }
            d.fields[i] = single_line(it->get<std::string>());
            if (has_tag(d.fields[i])) throw ValidationError("tag-in-content", std::string(kSemanticKeys[i]));
        }
        if (!d.any()) throw ValidationError("semantic-empty", "no semantic descriptor is filled");
        t.semantic = std::move(d);
    }
    return t;
}

}  // namespace

StructuredTriplet validate_triplet(std::string_view raw_json, bool semantic_mode, bool caption_task,
                                   const SchemaBounds& bounds) {
    return triplet_from(parse_object(raw_json), semantic_mode, caption_task, bounds);
}

GeneratorReply validate_reply(std::string_view raw_json, bool semantic_mode, const SchemaBounds& bounds) {
    const json j = parse_object(raw_json);
    GeneratorReply r;
    r.triplet = triplet_from(j, semantic_mode, true, bounds);

    auto array_of = [&](const char* key) -> const json* {
        auto it = j.find(key);
        if (it == j.end() || it->is_null()) return nullptr;
        if (!it->is_array()) throw ValidationError("wrong-type", std::string("\"") + key + "\" must be an array");
        return &*it;
    };
    auto nonempty = [](const json& o, const char* key, const char* category) {
        if (!o.is_object()) throw ValidationError(category, "task item is not an object");
        auto it = o.find(key);
        if (it == o.end() || !it->is_string()) throw ValidationError(category, std::string("missing ") + key);
        auto s = text::trim(it->get<std::string>());
        if (s.empty()) throw ValidationError(category, std::string("empty ") + key);
        if (has_tag(s)) throw ValidationError("tag-in-content", key);
        return s;
    };

    if (const json* a = array_of("mcqa")) {
        for (const auto& item : *a) {
            McqaItem m;
            m.question = nonempty(item, "question", "invalid-mcqa");
            const auto ch = item.find("choices");
            if (ch == item.end() || !ch->is_array() || ch->size() != 4) {
                throw ValidationError("invalid-mcqa", "choices must be an array of 4");
            }
            std::set<std::string> seen;
            for (std::size_t i = 0; i < 4; ++i) {
                const auto& c = (*ch)[i];
                if (!c.is_string()) throw ValidationError("invalid-mcqa", "choice is not a string");
                m.choices[i] = text::trim(c.get<std::string>());
                if (m.choices[i].empty()) throw ValidationError("invalid-mcqa", "empty choice");
                if (has_tag(m.choices[i])) throw ValidationError("tag-in-content", "choice");
                seen.insert(text::to_lower(m.choices[i]));
            }
            if (seen.size() != 4) throw ValidationError("invalid-mcqa", "choices are not distinct");
            const auto ci = item.find("correct_index");
            if (ci == item.end() || !ci->is_number_integer() || ci->get<int>() < 0 || ci->get<int>() > 3) {
                throw ValidationError("invalid-mcqa", "correct_index must be 0..3");
            }
            m.correct_index = ci->get<int>();
            r.mcqa.push_back(std::move(m));
        }
    }
    if (const json* a = array_of("open_qa")) {
        for (const auto& item : *a) {
            r.open_qa.push_back({nonempty(item, "question", "invalid-task"), nonempty(item, "answer", "invalid-task")});
        }
    }
    if (const json* a = array_of("creative")) {
        for (const auto& item : *a) {
            r.creative.push_back(
                {nonempty(item, "instruction", "invalid-task"), nonempty(item, "answer", "invalid-task")});
        }
    }
    return r;
}

namespace {

std::string or_none(std::string s) { return s.empty() ? std::string("none") : s; }

std::string labels_joined(const std::vector<ScoredLabel>& labels) {
    std::vector<std::string> parts;
    for (const auto& l : labels) parts.push_back(l.label);
    return text::join(parts, ", ");
}

std::string tags_with_scores(const std::vector<ScoredLabel>& labels) {
    std::vector<std::string> parts;
    for (const auto& l : labels) parts.push_back(l.label + " (" + text::format_fixed(l.score, 3) + ")");
    return text::join(parts, ", ");
}

std::string per_second(const std::map<int, std::vector<ScoredLabel>>& events) {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& [sec, labels] : events) {
        nlohmann::ordered_json inner = nlohmann::ordered_json::object();
        for (const auto& l : labels) inner[l.label] = std::round(l.score * 1000.0) / 1000.0;
        j[std::to_string(sec)] = std::move(inner);
    }
    return j.dump();
}

// Single-pass {name} substitution; substituted text is never rescanned.
std::string fill(std::string_view tmpl, const std::map<std::string, std::string, std::less<>>& values) {
    std::string out;
    out.reserve(tmpl.size() * 2);
    std::size_t i = 0;
    while (i < tmpl.size()) {
        if (tmpl[i] == '{') {
            const auto close = tmpl.find('}', i);
            if (close != std::string_view::npos) {
                auto it = values.find(tmpl.substr(i + 1, close - i - 1));
                if (it != values.end()) {
                    out += it->second;
                    i = close + 1;
                    continue;
                }
            }
        }
        out += tmpl[i++];
    }
    return out;
}

}  // namespace

std::string build_prompt(const annotate::AnnotationBundle& bundle, const mining::CaptionCandidate& cc) {
    if (cc.video_id.empty()) throw std::invalid_argument("build_prompt: empty video id");
    if (text::trim_view(cc.normalized_text).empty()) throw std::invalid_argument("build_prompt: empty closed caption");
    if (text::trim_view(bundle.audio.general_caption).empty()) {
        throw std::invalid_argument("build_prompt: missing audio caption");
    }
    if (bundle.audio.tags.empty()) throw std::invalid_argument("build_prompt: missing audio tags");

    std::string tmpl(prompts::kGenerationTemplate);
    const bool music = bundle.audio.music_caption && !text::trim_view(*bundle.audio.music_caption).empty();
    if (!music) {
        const auto at = tmpl.find("{music_caption_section}");
        const auto line_start = tmpl.rfind('\n', at);
        tmpl.erase(line_start, at + std::string_view("{music_caption_section}").size() - line_start);
    }

    std::vector<std::string> scene;
    if (!bundle.video_caption.empty()) scene.push_back(bundle.video_caption);
    for (const auto& c : bundle.visual.frame_captions) scene.push_back(c);

    std::map<std::string, std::string, std::less<>> v = {
        {"video_id", cc.video_id},
        {"start", text::format_seconds(cc.start_s)},
        {"end", text::format_seconds(cc.end_s)},
        {"text", cc.normalized_text},
        {"audio_caption", bundle.audio.general_caption},
        {"audio_tags", tags_with_scores(bundle.audio.tags)},
        {"conette_candidates", or_none(bundle.audio.contextual_caption)},
        {"sat_predictions", per_second(bundle.per_second_events)},
        {"music_caption_section", music ? "- Music Caption: " + *bundle.audio.music_caption : std::string()},
        {"caption", or_none(text::join(scene, " "))},
        {"objects", or_none(labels_joined(bundle.visual.detections))},
        {"places", or_none(labels_joined(bundle.visual.scene_classes))},
    };
    return fill(tmpl, v);
}

std::string judge_prompt(std::string_view generated_output) {
    return fill(prompts::kJudgeTemplate, {{"generated_output", std::string(generated_output)}});
}

std::string_view prepended_prompt(bool semantic_mode) noexcept {
    return semantic_mode ? prompts::kPrependSemantic : prompts::kPrependPlain;
}

JudgeVerdict parse_verdict(std::string_view reply) {
    const auto open = reply.find('{');
    const auto close = reply.rfind('}');
    if (open == std::string_view::npos || close == std::string_view::npos || close < open) {
        throw ValidationError("malformed-verdict", "no JSON object in judge reply");
    }
    json j;
    try {
        j = json::parse(reply.substr(open, close - open + 1));
    } catch (const json::exception& e) {
        throw ValidationError("malformed-verdict", e.what());
    }
    if (!j.is_object() || !j.contains("valid") || !j["valid"].is_boolean()) {
        throw ValidationError("malformed-verdict", "\"valid\" must be a boolean");
    }
    JudgeVerdict v;
    v.valid = j["valid"].get<bool>();
    if (j.contains("reason")) {
        if (!j["reason"].is_string()) throw ValidationError("malformed-verdict", "\"reason\" must be a string");
        v.reason = text::trim(j["reason"].get<std::string>());
    } else if (!v.valid) {
        throw ValidationError("malformed-verdict", "missing \"reason\"");
    }
    if (!v.valid && v.reason.empty()) v.reason = "unspecified";
    return v;
}

SynthesisOutcome judge_and_retry(GeneratorBackend& generator, JudgeBackend& judge, std::string_view prompt,
                                 const SynthesisOptions& options) {
    if (options.max_attempts < 1) throw std::invalid_argument("max_attempts must be at least 1");
    const auto schema = options.semantic_mode ? SchemaId::ThreePhase : SchemaId::TwoPhase;
    SynthesisOutcome out;
    for (int attempt = 1; attempt <= options.max_attempts; ++attempt) {
        ++out.generator_calls;
        std::string raw;
        try {
            raw = generator.generate(prompt, schema);
        } catch (const std::exception& e) {
            out.attempts.push_back({attempt, std::string("backend:") + e.what()});
            continue;
        }
        GeneratorReply reply;
        try {
            reply = validate_reply(raw, options.semantic_mode, options.bounds);
        } catch (const ValidationError& e) {
            out.attempts.push_back({attempt, "schema:" + e.category()});
            continue;
        }
        JudgeVerdict verdict;
        try {
            verdict = parse_verdict(judge.complete(judge_prompt(raw)));
        } catch (const ValidationError& e) {
            out.attempts.push_back({attempt, "judge:" + e.category()});
            continue;
        } catch (const std::exception& e) {
            out.attempts.push_back({attempt, std::string("backend:") + e.what()});
            continue;
        }
        if (!verdict.valid) {
            out.attempts.push_back({attempt, "judge:" + verdict.reason});
            continue;
        }
        out.attempts.push_back({attempt, "ok"});
        out.reply = std::move(reply);
        break;
    }
    return out;
}

std::string encode_semantic(const SemanticDescriptors& s) {
    std::string out;
    for (std::size_t i = 0; i < kSemanticFieldCount; ++i) {
        if (i) out += '\n';
        out += kSemanticHeaders[i];
        if (!s.fields[i].empty()) {
            out += "\n- ";
            out += s.fields[i];
        }
    }
    return out;
}

SemanticDescriptors decode_semantic(std::string_view span) {
    SemanticDescriptors d;
    std::optional<std::size_t> current;
    std::size_t pos = 0;
    while (pos <= span.size()) {
        auto nl = span.find('\n', pos);
        if (nl == std::string_view::npos) nl = span.size();
        const auto line = text::trim_view(span.substr(pos, nl - pos));
        pos = nl + 1;
        const auto header = std::find(kSemanticHeaders.begin(), kSemanticHeaders.end(), line);
        if (header != kSemanticHeaders.end()) {
            current = static_cast<std::size_t>(header - kSemanticHeaders.begin());
            continue;
        }
        if (!current || line.empty() || line.front() != '-') continue;
        auto item = text::trim_view(line.substr(1));
        if (item.empty()) continue;
        auto& f = d.fields[*current];
        if (!f.empty()) f += "; ";
        f += item;
    }
    return d;
}

std::string serialize_tagged(const StructuredTriplet& t, bool semantic_mode) {
    std::string out;
    out += tagparse::kThinkOpen;
    out += '\n' + t.thinking + '\n';
    out += tagparse::kThinkClose;
    out += '\n';
    if (semantic_mode && t.semantic) {
        out += tagparse::kSemanticOpen;
        out += '\n' + encode_semantic(*t.semantic) + '\n';
        out += tagparse::kSemanticClose;
        out += '\n';
    }
    out += tagparse::kAnswerOpen;
    out += '\n' + t.answer + '\n';
    out += tagparse::kAnswerClose;
    return out;
}

std::optional<StructuredTriplet> parse_serialized(std::string_view s, bool semantic_mode) {
    const auto p = tagparse::parse_tagged(s, semantic_mode);
    if (!p.well_formed) return std::nullopt;
    StructuredTriplet t;
    t.thinking = p.think_span;
    t.answer = p.answer_span;
    if (p.semantic_span) t.semantic = decode_semantic(*p.semantic_span);
    return t;
}

std::string_view task_kind_name(TaskKind k) noexcept {
    switch (k) {
        case TaskKind::Caption: return "caption";
        case TaskKind::Mcqa: return "mcqa";
        case TaskKind::OpenQa: return "open_qa";
        case TaskKind::Creative: return "creative";
    }
    return "caption";
}

std::optional<TaskKind> task_kind_from_name(std::string_view name) noexcept {
    for (auto k : kAllTaskKinds) {
        if (task_kind_name(k) == name) return k;
    }
    return std::nullopt;
}

std::string check_record(const TaskRecord& r) {
    if (r.sample_id.empty()) return "empty sample_id";
    if (r.instruction.empty()) return "empty instruction";
    if (r.kind == TaskKind::Caption && r.instruction != kCaptionInstruction) return "caption instruction mismatch";
    const bool mcqa = r.kind == TaskKind::Mcqa;
    if (mcqa != r.choices.has_value() || mcqa != r.correct_index.has_value()) {
        return "choices must be present exactly for mcqa";
    }
    if (mcqa) {
        std::set<std::string> distinct;
        for (const auto& c : *r.choices) {
            if (c.empty()) return "empty choice";
            distinct.insert(text::to_lower(c));
        }
        if (distinct.size() != 4) return "choices are not distinct";
        if (*r.correct_index < 0 || *r.correct_index > 3) return "correct_index out of range";
    }
    if (!tagparse::parse_tagged(r.target, false).well_formed) return "target does not parse";
    return {};
}

void TaskSplit::validate() const {
    for (double s : {caption, mcqa, open_qa, creative}) {
        if (!(s >= 0.0) || !std::isfinite(s)) throw ConfigError("task shares must be finite and non-negative");
    }
    if (!(caption > 0.0)) throw ConfigError("caption share must be positive");
    if (std::abs(caption + mcqa + open_qa + creative - 1.0) > 1e-9) throw ConfigError("task shares must sum to 1");
    if (min_per_type < 1 || max_per_type < min_per_type) throw ConfigError("invalid records-per-type range");
    for (auto k : {TaskKind::Mcqa, TaskKind::OpenQa, TaskKind::Creative}) {
        if (selection_probability(k) > 1.0 + 1e-12) {
            throw ConfigError("task share for " + std::string(task_kind_name(k)) + " is unreachable");
        }
    }
}

double TaskSplit::selection_probability(TaskKind k) const {
    const double mean_count = (static_cast<double>(min_per_type) + static_cast<double>(max_per_type)) / 2.0;
    switch (k) {
        case TaskKind::Caption: return 1.0;
        case TaskKind::Mcqa: return mcqa / caption / mean_count;
        case TaskKind::OpenQa: return open_qa / caption / mean_count;
        case TaskKind::Creative: return creative / caption / mean_count;
    }
    return 0.0;
}

std::uint64_t sample_seed(std::string_view sample_id, std::uint64_t run_seed) noexcept {
    std::uint64_t z = text::fnv1a64(sample_id) ^ (run_seed * 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::vector<TaskRecord> expand_tasks(std::string_view sample_id, const GeneratorReply& reply, std::uint64_t seed,
                                     bool semantic_mode, const TaskSplit& split) {
    split.validate();
    std::mt19937_64 g(sample_seed(sample_id, seed));
    auto uniform = [&g] { return static_cast<double>(g() >> 11) * 0x1.0p-53; };

    std::vector<TaskRecord> out;
    auto target_with = [&](const std::string& answer) {
        StructuredTriplet t = reply.triplet;
        t.answer = answer;
        return serialize_tagged(t, semantic_mode);
    };
    out.push_back({std::string(sample_id), TaskKind::Caption, std::string(kCaptionInstruction), std::nullopt,
                   std::nullopt, serialize_tagged(reply.triplet, semantic_mode)});

    const std::size_t span = split.max_per_type - split.min_per_type + 1;
    for (auto kind : {TaskKind::Mcqa, TaskKind::OpenQa, TaskKind::Creative}) {
        const double u = uniform();
        const double v = uniform();
        if (!(u < split.selection_probability(kind))) continue;
        const std::size_t count =
            split.min_per_type + std::min(span - 1, static_cast<std::size_t>(v * static_cast<double>(span)));
        if (kind == TaskKind::Mcqa) {
            for (std::size_t i = 0; i < std::min(count, reply.mcqa.size()); ++i) {
                const auto& m = reply.mcqa[i];
                out.push_back({std::string(sample_id), kind, m.question, m.choices, m.correct_index,
                               target_with(m.choices[static_cast<std::size_t>(m.correct_index)])});
            }
        } else if (kind == TaskKind::OpenQa) {
            for (std::size_t i = 0; i < std::min(count, reply.open_qa.size()); ++i) {
                const auto& q = reply.open_qa[i];
                out.push_back({std::string(sample_id), kind, q.question, std::nullopt, std::nullopt,
                               target_with(q.answer)});
            }
        } else {
            for (std::size_t i = 0; i < std::min(count, reply.creative.size()); ++i) {
                const auto& c = reply.creative[i];
                out.push_back({std::string(sample_id), kind, c.instruction, std::nullopt, std::nullopt,
                               target_with(c.answer)});
            }
        }
    }
    return out;
}

json to_json(const TaskRecord& r) {
    json j = {{"sample_id", r.sample_id},
              {"kind", std::string(task_kind_name(r.kind))},
              {"instruction", r.instruction},
              {"target", r.target}};
    if (r.choices) j["choices"] = std::vector<std::string>(r.choices->begin(), r.choices->end());
    if (r.correct_index) j["correct_index"] = *r.correct_index;
    return j;
}

TaskRecord record_from_json(const json& j) {
    TaskRecord r;
    r.sample_id = j.at("sample_id").get<std::string>();
    const auto kind = task_kind_from_name(j.at("kind").get<std::string>());
    if (!kind) throw std::invalid_argument("unknown task kind");
    r.kind = *kind;
    r.instruction = j.at("instruction").get<std::string>();
    r.target = j.at("target").get<std::string>();
    if (j.contains("choices")) {
        const auto v = j["choices"].get<std::vector<std::string>>();
        if (v.size() != 4) throw std::invalid_argument("choices must have 4 entries");
        r.choices = std::array<std::string, 4>{v[0], v[1], v[2], v[3]};
    }
    if (j.contains("correct_index")) r.correct_index = j["correct_index"].get<int>();
    return r;
}

json to_json(const GeneratorReply& r) {
    json j = {{"thinking", r.triplet.thinking}, {"answer", r.triplet.answer}};
    if (r.triplet.semantic) {
        json s = json::object();
        for (std::size_t i = 0; i < kSemanticFieldCount; ++i) {
            if (!r.triplet.semantic->fields[i].empty()) s[std::string(kSemanticKeys[i])] = r.triplet.semantic->fields[i];
        }
        j["semantic_elements"] = s;
    }
    json mcqa = json::array();
    for (const auto& m : r.mcqa) {
        mcqa.push_back({{"question", m.question},
                        {"choices", std::vector<std::string>(m.choices.begin(), m.choices.end())},
                        {"correct_index", m.correct_index}});
    }
    json oq = json::array();
    for (const auto& q : r.open_qa) oq.push_back({{"question", q.question}, {"answer", q.answer}});
    json cr = json::array();
    for (const auto& c : r.creative) cr.push_back({{"instruction", c.instruction}, {"answer", c.answer}});
    j["mcqa"] = mcqa;
    j["open_qa"] = oq;
    j["creative"] = cr;
    return j;
}

}  // namespace audsem::synth
