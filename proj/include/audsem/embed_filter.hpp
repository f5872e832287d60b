#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "audsem/io.hpp"

namespace audsem::embed {

// Fixed-dimension real vector. Construction rejects empty or non-finite input.
class EmbeddingVector {
public:
    EmbeddingVector() = default;
    explicit EmbeddingVector(std::vector<double> values);

    std::size_t dim() const noexcept { return values_.size(); }
    const std::vector<double>& values() const noexcept { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }
    double norm() const noexcept;
    bool is_zero() const noexcept;

    friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;

private:
    std::vector<double> values_;
};

// Throws std::invalid_argument on dimension mismatch or a zero vector.
double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);
double cosine_distance(const EmbeddingVector& a, const EmbeddingVector& b);

// Coordinate-wise mean. Throws std::invalid_argument when empty or mixed dims.
EmbeddingVector mean_embedding(std::span<const EmbeddingVector> set);

// Strictly greater than `threshold` from the modality mean is an outlier.
inline constexpr double kOutlierDistance = 0.9;
// Similarity at least `threshold` is aligned.
inline constexpr double kAlignmentSimilarity = 0.5;
inline constexpr double kMinDurationS = 3.0;

bool alignment_filter(const EmbeddingVector& generated_caption, const EmbeddingVector& closed_caption,
                      double threshold = kAlignmentSimilarity);

bool duration_filter(double duration_s, double min_s = kMinDurationS);

struct FilterReport {
    std::size_t input_count = 0;
    std::size_t dropped_outlier_audio = 0;
    std::size_t dropped_outlier_text = 0;
    std::size_t dropped_alignment = 0;
    std::size_t dropped_duration = 0;
    std::size_t dropped_error = 0;  // missing or zero embeddings
    std::size_t kept = 0;

    bool reconciles() const noexcept;
};

io::json to_json(const FilterReport& r);

struct OutlierInput {
    std::optional<EmbeddingVector> audio;
    std::optional<EmbeddingVector> text;
};

struct SampleVerdict {
    bool kept = false;
    std::string reason;  // empty when kept
    double audio_distance = 0.0;
    double text_distance = 0.0;
};

struct OutlierResult {
    std::vector<std::size_t> kept;  // input indices, ascending
    std::vector<SampleVerdict> verdicts;
    FilterReport report;
};

// Single pass: both modality means are computed once over every present
// embedding, then each sample is dropped if either distance exceeds the
// threshold. Samples with missing or zero embeddings are dropped as errors.
OutlierResult outlier_filter(const std::vector<OutlierInput>& samples, double threshold = kOutlierDistance);

struct FilterInput {
    std::string sample_id;
    double duration_s = 0.0;
    std::optional<EmbeddingVector> audio;              // audio modality
    std::optional<EmbeddingVector> text;               // closed caption, text modality
    std::optional<EmbeddingVector> generated_caption;  // generated audio caption, text modality
};

struct FilterThresholds {
    double outlier_distance = kOutlierDistance;
    double alignment_similarity = kAlignmentSimilarity;
    double min_duration_s = kMinDurationS;
};

struct FilterOutcome {
    std::vector<SampleVerdict> verdicts;  // parallel to the input
    std::vector<double> alignment;        // similarity per sample, NaN if unavailable
    FilterReport report;
};

// Outlier removal, then minimum duration, then caption alignment. Each drop
// is attributed to the first filter that rejects the sample.
FilterOutcome run_filters(const std::vector<FilterInput>& samples, const FilterThresholds& thresholds = {});

enum class EmbeddingKind { Audio, Text };

std::string_view kind_name(EmbeddingKind k) noexcept;

// HTTP POST {kind, payload} -> {values}.
class EmbeddingBackend {
public:
    virtual ~EmbeddingBackend() = default;
    virtual EmbeddingVector embed(EmbeddingKind kind, std::string_view payload) = 0;
};

// Deterministic signed feature hashing of lowercase alphanumeric tokens, with
// a constant bias coordinate shared by every non-empty text. Stopword-only
// input embeds to the zero vector.
class HashedBagOfWordsEmbedder final : public EmbeddingBackend {
public:
    explicit HashedBagOfWordsEmbedder(std::size_t dim = 256, double bias = 1.0);

    EmbeddingVector embed_text(std::string_view text) const;
    EmbeddingVector embed(EmbeddingKind kind, std::string_view payload) override;

    // Coordinate a token hashes to and its sign.
    std::pair<std::size_t, double> slot(std::string_view token) const;
    static bool is_stopword(std::string_view token);

private:
    std::size_t dim_;
    double bias_;
};

}  // namespace audsem::embed
