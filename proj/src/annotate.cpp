#include "audsem/annotate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "audsem/text.hpp"

namespace audsem::annotate {

std::string_view role_name(Role r) noexcept {
    switch (r) {
        case Role::AudioCaption: return "audio_caption";
        case Role::AudioTags: return "audio_tags";
        case Role::AudioEvents: return "audio_events";
        case Role::AudioContext: return "audio_context";
        case Role::MusicCaption: return "music_caption";
        case Role::ImageCaption: return "image_caption";
        case Role::ImageClassify: return "image_classify";
        case Role::ObjectDetect: return "object_detect";
        case Role::SceneClassify: return "scene_classify";
        case Role::VideoCaption: return "video_caption";
    }
    return "audio_caption";
}

std::optional<Role> role_from_name(std::string_view name) noexcept {
    for (auto r : kAllRoles) {
        if (role_name(r) == name) return r;
    }
    return std::nullopt;
}

std::vector<ScoredLabel> dedup_average(const std::vector<ScoredLabel>& predictions) {
    struct Acc {
        std::vector<std::pair<double, std::size_t>> scores;
        double best = -1.0;
        std::optional<std::vector<double>> box;
    };
    std::unordered_map<std::string, Acc> acc;
    for (const auto& p : predictions) {
        if (!(p.score >= 0.0 && p.score <= 1.0)) throw std::invalid_argument("score outside [0, 1] for " + p.label);
        auto& a = acc[p.label];
        a.scores.emplace_back(p.score, std::max<std::size_t>(1, p.count));
        if (p.box && (p.score > a.best || (p.score == a.best && a.box && *p.box < *a.box))) {
            a.best = p.score;
            a.box = p.box;
        }
    }
    std::vector<ScoredLabel> out;
    out.reserve(acc.size());
    for (auto& [label, a] : acc) {
        // Summed in sorted order so the mean does not depend on input order.
        std::sort(a.scores.begin(), a.scores.end());
        double sum = 0.0;
        std::size_t count = 0;
        for (auto [score, n] : a.scores) {
            sum += score * static_cast<double>(n);
            count += n;
        }
        out.push_back({label, sum / static_cast<double>(count), count, std::move(a.box)});
    }
    std::sort(out.begin(), out.end(), [](const ScoredLabel& x, const ScoredLabel& y) {
        if (x.score != y.score) return x.score > y.score;
        return x.label < y.label;
    });
    return out;
}

std::vector<ScoredLabel> top_k(const std::vector<ScoredLabel>& tags, std::size_t k) {
    auto out = dedup_average(tags);
    if (out.size() > k) out.resize(k);
    return out;
}

void InferenceClients::set_all(InferenceBackend& backend) {
    for (auto r : kAllRoles) slots[r] = &backend;
}

InferenceBackend* InferenceClients::get(Role role) const {
    auto it = slots.find(role);
    return it == slots.end() ? nullptr : it->second;
}

FramePlan make_frame_plan(media::FrameProbe& probe, const std::filesystem::path& video, double duration_s,
                          double black_threshold) {
    FramePlan plan;
    plan.image_frames = media::sample_frames(probe, video, media::plan_image_frames(duration_s), black_threshold);
    plan.video_frames = media::sample_frames(probe, video, media::plan_video_frames(duration_s), black_threshold);
    return plan;
}

std::string audio_caption_prompt() {
    return "Describe the audio in detail, including the sound events, their order and the acoustic environment.";
}

std::string video_caption_prompt(double duration_s, const std::vector<double>& timestamps) {
    std::vector<std::string> ts;
    ts.reserve(timestamps.size());
    for (double t : timestamps) ts.push_back(text::format_fixed(t, 2) + "s");
    return "The video lasts for " + text::format_fixed(duration_s, 2) + " seconds, and " +
           std::to_string(timestamps.size()) + " frames are uniformly sampled from it. These frames are located at " +
           text::join(ts, ", ") + ". Please describe this video in detail.";
}

namespace {

std::string fragment(const std::filesystem::path& path, double t) {
    return path.string() + "#t=" + text::format_seconds(t);
}

std::string fragment(const std::filesystem::path& path, double from, double to) {
    return path.string() + "#t=" + text::format_seconds(from) + "," + text::format_seconds(to);
}

bool contains_music(const std::vector<ScoredLabel>& tags, double threshold) {
    return std::any_of(tags.begin(), tags.end(), [&](const ScoredLabel& l) {
        return l.score >= threshold && text::to_lower(l.label).find("music") != std::string::npos;
    });
}

class RoleCaller {
public:
    RoleCaller(const InferenceClients& clients, const AnnotateOptions& options, AnnotationBundle& bundle)
        : clients_(clients), options_(options), bundle_(bundle) {}

    // nullopt when the role is unconfigured or an optional role failed.
    std::optional<InferenceReply> call(Role role, const std::string& media_ref,
                                       std::optional<std::string> prompt = std::nullopt) {
        InferenceBackend* backend = clients_.get(role);
        const bool mandatory = options_.mandatory.count(role) > 0;
        if (!backend) {
            if (mandatory) throw AnnotationError(std::string(role_name(role)) + ": no backend configured");
            return std::nullopt;
        }
        InferenceRequest req{std::string(role_name(role)), media_ref, std::move(prompt)};
        try {
            return with_retry(options_.retry, [&] { return backend->infer(req); });
        } catch (const BackendError& e) {
            if (mandatory) throw AnnotationError(std::string(role_name(role)) + ": " + e.what());
            bundle_.warnings.push_back(std::string(role_name(role)) + ": " + e.what());
            return std::nullopt;
        }
    }

    std::string text_of(Role role, const std::optional<InferenceReply>& reply) {
        if (reply && reply->text) return *reply->text;
        if (reply && options_.mandatory.count(role)) {
            throw AnnotationError(std::string(role_name(role)) + ": reply has no text");
        }
        return {};
    }

    std::vector<ScoredLabel> labels_of(Role role, const std::optional<InferenceReply>& reply) {
        if (reply && reply->labels) return *reply->labels;
        if (reply && options_.mandatory.count(role)) {
            throw AnnotationError(std::string(role_name(role)) + ": reply has no labels");
        }
        return {};
    }

private:
    const InferenceClients& clients_;
    const AnnotateOptions& options_;
    AnnotationBundle& bundle_;
};

std::vector<double> non_black(const std::vector<media::FrameSample>& frames) {
    std::vector<double> out;
    for (const auto& f : frames) {
        if (!f.is_black) out.push_back(f.timestamp_s);
    }
    return out;
}

std::vector<ScoredLabel> clamp_scores(std::vector<ScoredLabel> labels) {
    for (auto& l : labels) {
        if (!std::isfinite(l.score)) l.score = 0.0;
        l.score = std::clamp(l.score, 0.0, 1.0);
    }
    return labels;
}

}  // namespace

AnnotationBundle annotate_segment(const media::MediaAssets& assets, double duration_s,
                                  const InferenceClients& clients, const FramePlan& plan,
                                  const AnnotateOptions& options) {
    if (!(duration_s > 0.0)) throw std::invalid_argument("annotate_segment: non-positive duration");
    AnnotationBundle b;
    b.duration_s = duration_s;
    RoleCaller caller(clients, options, b);
    const auto audio = assets.audio.string();

    // Audio roles.
    b.audio.general_caption =
        caller.text_of(Role::AudioCaption, caller.call(Role::AudioCaption, audio, audio_caption_prompt()));
    b.audio.tags = top_k(clamp_scores(caller.labels_of(Role::AudioTags, caller.call(Role::AudioTags, audio))),
                         options.top_k);
    b.audio.contextual_caption = caller.text_of(Role::AudioContext, caller.call(Role::AudioContext, audio));

    if (clients.get(Role::AudioEvents)) {
        std::vector<ScoredLabel> all_events;
        const int windows = static_cast<int>(std::ceil(duration_s));
        for (int s = 0; s < windows; ++s) {
            const double to = std::min(duration_s, s + 1.0);
            auto labels = clamp_scores(caller.labels_of(
                Role::AudioEvents, caller.call(Role::AudioEvents, fragment(assets.audio, s, to))));
            if (labels.empty()) continue;
            all_events.insert(all_events.end(), labels.begin(), labels.end());
            b.per_second_events[s] = top_k(labels, options.top_k);
        }
        b.audio.event_classes = dedup_average(all_events);
    }

    if (contains_music(b.audio.tags, options.music_threshold)) {
        auto reply = caller.call(Role::MusicCaption, audio);
        if (reply && reply->text) b.audio.music_caption = *reply->text;
    }

    // Image roles over non-black frames.
    b.image_frames = non_black(plan.image_frames);
    std::vector<ScoredLabel> classes, detections, scenes;
    for (double t : b.image_frames) {
        const auto ref = fragment(assets.video, t);
        if (auto r = caller.call(Role::ImageCaption, ref); r && r->text && !r->text->empty()) {
            if (std::find(b.visual.frame_captions.begin(), b.visual.frame_captions.end(), *r->text) ==
                b.visual.frame_captions.end()) {
                b.visual.frame_captions.push_back(*r->text);
            }
        }
        for (auto& l : clamp_scores(caller.labels_of(Role::ImageClassify, caller.call(Role::ImageClassify, ref))))
            classes.push_back(std::move(l));
        for (auto& l : clamp_scores(caller.labels_of(Role::ObjectDetect, caller.call(Role::ObjectDetect, ref)))) {
            if (l.score >= options.detection_threshold) detections.push_back(std::move(l));
        }
        for (auto& l : clamp_scores(caller.labels_of(Role::SceneClassify, caller.call(Role::SceneClassify, ref))))
            scenes.push_back(std::move(l));
    }
    b.visual.image_classes = top_k(classes, options.top_k);
    b.visual.detections = dedup_average(detections);
    b.visual.scene_classes = top_k(scenes, options.top_k);

    // Video role over non-black frames.
    b.video_frames = non_black(plan.video_frames);
    if (!b.video_frames.empty()) {
        b.video_caption = caller.text_of(
            Role::VideoCaption,
            caller.call(Role::VideoCaption, assets.video.string(), video_caption_prompt(duration_s, b.video_frames)));
    }
    return b;
}

// ---------------------------------------------------------------------------

io::json to_json(const ScoredLabel& l) {
    io::json j = {{"label", l.label}, {"score", l.score}};
    if (l.count != 1) j["count"] = l.count;
    if (l.box) j["box"] = *l.box;
    return j;
}

ScoredLabel label_from_json(const io::json& j) {
    ScoredLabel l;
    l.label = j.at("label").get<std::string>();
    l.score = j.at("score").get<double>();
    l.count = j.value("count", std::size_t{1});
    if (j.contains("box") && j["box"].is_array()) l.box = j["box"].get<std::vector<double>>();
    return l;
}

namespace {

io::json labels_json(const std::vector<ScoredLabel>& ls) {
    io::json arr = io::json::array();
    for (const auto& l : ls) arr.push_back(to_json(l));
    return arr;
}

std::vector<ScoredLabel> labels_from(const io::json& j) {
    std::vector<ScoredLabel> out;
    for (const auto& e : j) out.push_back(label_from_json(e));
    return out;
}

}  // namespace

io::json to_json(const AnnotationBundle& b) {
    io::json per_second = io::json::object();
    for (const auto& [s, ls] : b.per_second_events) per_second[std::to_string(s)] = labels_json(ls);
    io::json audio = {{"general_caption", b.audio.general_caption},
                      {"tags", labels_json(b.audio.tags)},
                      {"event_classes", labels_json(b.audio.event_classes)},
                      {"contextual_caption", b.audio.contextual_caption}};
    if (b.audio.music_caption) audio["music_caption"] = *b.audio.music_caption;
    return {{"duration_s", b.duration_s},
            {"audio", audio},
            {"visual",
             {{"frame_captions", b.visual.frame_captions},
              {"detections", labels_json(b.visual.detections)},
              {"scene_classes", labels_json(b.visual.scene_classes)},
              {"image_classes", labels_json(b.visual.image_classes)}}},
            {"video_caption", b.video_caption},
            {"per_second_events", per_second},
            {"image_frames", b.image_frames},
            {"video_frames", b.video_frames},
            {"warnings", b.warnings}};
}

AnnotationBundle bundle_from_json(const io::json& j) {
    AnnotationBundle b;
    b.duration_s = j.at("duration_s").get<double>();
    const auto& a = j.at("audio");
    b.audio.general_caption = a.at("general_caption").get<std::string>();
    b.audio.tags = labels_from(a.at("tags"));
    b.audio.event_classes = labels_from(a.at("event_classes"));
    b.audio.contextual_caption = a.at("contextual_caption").get<std::string>();
    if (a.contains("music_caption")) b.audio.music_caption = a["music_caption"].get<std::string>();
    const auto& v = j.at("visual");
    b.visual.frame_captions = v.at("frame_captions").get<std::vector<std::string>>();
    b.visual.detections = labels_from(v.at("detections"));
    b.visual.scene_classes = labels_from(v.at("scene_classes"));
    b.visual.image_classes = labels_from(v.at("image_classes"));
    b.video_caption = j.at("video_caption").get<std::string>();
    for (const auto& [k, ls] : j.at("per_second_events").items()) b.per_second_events[std::stoi(k)] = labels_from(ls);
    b.image_frames = j.at("image_frames").get<std::vector<double>>();
    b.video_frames = j.at("video_frames").get<std::vector<double>>();
    b.warnings = j.value("warnings", std::vector<std::string>{});
    return b;
}

}  // namespace audsem::annotate
