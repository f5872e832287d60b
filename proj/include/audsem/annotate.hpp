#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "audsem/backends.hpp"
#include "audsem/io.hpp"
#include "audsem/media_acquire.hpp"

namespace audsem::annotate {

enum class Role {
    AudioCaption,
    AudioTags,
    AudioEvents,
    AudioContext,
    MusicCaption,
    ImageCaption,
    ImageClassify,
    ObjectDetect,
    SceneClassify,
    VideoCaption,
};

inline constexpr std::array<Role, 10> kAllRoles = {
    Role::AudioCaption,  Role::AudioTags,     Role::AudioEvents,  Role::AudioContext,  Role::MusicCaption,
    Role::ImageCaption,  Role::ImageClassify, Role::ObjectDetect, Role::SceneClassify, Role::VideoCaption,
};

std::string_view role_name(Role r) noexcept;
std::optional<Role> role_from_name(std::string_view name) noexcept;

struct AudioAnnotation {
    std::string general_caption;
    std::vector<ScoredLabel> tags;  // at most top_k, descending score
    std::vector<ScoredLabel> event_classes;
    std::string contextual_caption;
    std::optional<std::string> music_caption;  // only when a music tag is present
};

struct VisualAnnotation {
    std::vector<std::string> frame_captions;
    std::vector<ScoredLabel> detections;  // every score >= detection threshold
    std::vector<ScoredLabel> scene_classes;
    std::vector<ScoredLabel> image_classes;
};

struct AnnotationBundle {
    double duration_s = 0.0;
    AudioAnnotation audio;
    VisualAnnotation visual;
    std::string video_caption;
    std::map<int, std::vector<ScoredLabel>> per_second_events;  // keys in [0, duration)
    std::vector<double> image_frames;  // non-black timestamps actually annotated
    std::vector<double> video_frames;
    std::vector<std::string> warnings;  // optional roles that failed
};

// One entry per label with the arithmetic mean of its scores, sorted by
// descending score then ascending label. count accumulates occurrences; for
// detections the box of the highest-scoring occurrence is kept. Throws
// std::invalid_argument for scores outside [0, 1].
std::vector<ScoredLabel> dedup_average(const std::vector<ScoredLabel>& predictions);

// The k best entries of dedup_average(tags).
std::vector<ScoredLabel> top_k(const std::vector<ScoredLabel>& tags, std::size_t k = 5);

// Role slots; a null slot means the role is not configured.
struct InferenceClients {
    std::map<Role, InferenceBackend*> slots;

    void set(Role role, InferenceBackend& backend) { slots[role] = &backend; }
    void set_all(InferenceBackend& backend);
    InferenceBackend* get(Role role) const;
};

struct AnnotateOptions {
    double detection_threshold = 0.3;
    double music_threshold = 0.3;
    std::size_t top_k = 5;
    std::set<Role> mandatory = {Role::AudioCaption, Role::AudioTags};
    RetryPolicy retry;
};

struct FramePlan {
    std::vector<media::FrameSample> image_frames;
    std::vector<media::FrameSample> video_frames;
};

FramePlan make_frame_plan(media::FrameProbe& probe, const std::filesystem::path& video, double duration_s,
                          double black_threshold = media::kDefaultBlackThreshold);

// A mandatory role failed after retries.
class AnnotationError : public Error {
public:
    using Error::Error;
};

std::string audio_caption_prompt();
std::string video_caption_prompt(double duration_s, const std::vector<double>& timestamps);

// Queries every configured role and merges the replies. Black frames in the
// plan are skipped; if every frame is black the visual fields stay empty.
AnnotationBundle annotate_segment(const media::MediaAssets& assets, double duration_s,
                                  const InferenceClients& clients, const FramePlan& plan,
                                  const AnnotateOptions& options = {});

io::json to_json(const ScoredLabel& l);
ScoredLabel label_from_json(const io::json& j);
io::json to_json(const AnnotationBundle& b);
AnnotationBundle bundle_from_json(const io::json& j);

}  // namespace audsem::annotate
