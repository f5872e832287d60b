#include "audsem/embed_filter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "audsem/text.hpp"

namespace audsem::embed {

EmbeddingVector::EmbeddingVector(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) throw std::invalid_argument("embedding must have a positive dimension");
    for (double v : values_) {
        if (!std::isfinite(v)) throw std::invalid_argument("embedding has a non-finite value");
    }
}

double EmbeddingVector::norm() const noexcept {
    double s = 0.0;
    for (double v : values_) s += v * v;
    return std::sqrt(s);
}

bool EmbeddingVector::is_zero() const noexcept {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return v == 0.0; });
}

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("cosine_similarity: dimension mismatch");
    if (a.dim() == 0 || a.is_zero() || b.is_zero()) throw std::invalid_argument("cosine_similarity: zero vector");
    double dot = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) dot += a[i] * b[i];
    return std::clamp(dot / (a.norm() * b.norm()), -1.0, 1.0);
}

double cosine_distance(const EmbeddingVector& a, const EmbeddingVector& b) { return 1.0 - cosine_similarity(a, b); }

EmbeddingVector mean_embedding(std::span<const EmbeddingVector> set) {
    if (set.empty()) throw std::invalid_argument("mean_embedding of an empty set");
    const std::size_t dim = set.front().dim();
    std::vector<double> sum(dim, 0.0);
    for (const auto& v : set) {
        if (v.dim() != dim) throw std::invalid_argument("mean_embedding: dimension mismatch");
        for (std::size_t i = 0; i < dim; ++i) sum[i] += v[i];
    }
    for (double& s : sum) s /= static_cast<double>(set.size());
    return EmbeddingVector(std::move(sum));
}

bool alignment_filter(const EmbeddingVector& generated_caption, const EmbeddingVector& closed_caption,
                      double threshold) {
    return cosine_similarity(generated_caption, closed_caption) >= threshold;
}

bool duration_filter(double duration_s, double min_s) { return duration_s >= min_s; }

bool FilterReport::reconciles() const noexcept {
    return kept + dropped_outlier_audio + dropped_outlier_text + dropped_alignment + dropped_duration +
               dropped_error ==
           input_count;
}

io::json to_json(const FilterReport& r) {
    return {{"input_count", r.input_count},
            {"dropped_outlier_audio", r.dropped_outlier_audio},
            {"dropped_outlier_text", r.dropped_outlier_text},
            {"dropped_alignment", r.dropped_alignment},
            {"dropped_duration", r.dropped_duration},
            {"dropped_error", r.dropped_error},
            {"kept", r.kept}};
}

namespace {

std::optional<EmbeddingVector> mean_of_present(const std::vector<OutlierInput>& samples, bool audio) {
    std::vector<EmbeddingVector> present;
    for (const auto& s : samples) {
        const auto& e = audio ? s.audio : s.text;
        if (e) present.push_back(*e);
    }
    if (present.empty()) return std::nullopt;
    return mean_embedding(present);
}

std::optional<double> distance_to(const std::optional<EmbeddingVector>& v, const std::optional<EmbeddingVector>& mean) {
    if (!v || !mean || v->is_zero() || mean->is_zero() || v->dim() != mean->dim()) return std::nullopt;
    return cosine_distance(*v, *mean);
}

}  // namespace

OutlierResult outlier_filter(const std::vector<OutlierInput>& samples, double threshold) {
    OutlierResult r;
    r.report.input_count = samples.size();
    const auto audio_mean = mean_of_present(samples, true);
    const auto text_mean = mean_of_present(samples, false);
    r.verdicts.resize(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        auto& v = r.verdicts[i];
        const auto da = distance_to(samples[i].audio, audio_mean);
        const auto dt = distance_to(samples[i].text, text_mean);
        v.audio_distance = da.value_or(std::numeric_limits<double>::quiet_NaN());
        v.text_distance = dt.value_or(std::numeric_limits<double>::quiet_NaN());
        if (!da || !dt) {
            v.reason = !samples[i].audio || !samples[i].text ? "missing-embedding" : "zero-embedding";
            ++r.report.dropped_error;
        } else if (*da > threshold) {
            v.reason = "outlier-audio";
            ++r.report.dropped_outlier_audio;
        } else if (*dt > threshold) {
            v.reason = "outlier-text";
            ++r.report.dropped_outlier_text;
        } else {
            v.kept = true;
            r.kept.push_back(i);
        }
    }
    r.report.kept = r.kept.size();
    return r;
}

FilterOutcome run_filters(const std::vector<FilterInput>& samples, const FilterThresholds& thresholds) {
    std::vector<OutlierInput> oi;
    oi.reserve(samples.size());
    for (const auto& s : samples) oi.push_back({s.audio, s.text});
    auto outliers = outlier_filter(oi, thresholds.outlier_distance);

    FilterOutcome out;
    out.report = outliers.report;
    out.report.kept = 0;
    out.verdicts = std::move(outliers.verdicts);
    out.alignment.assign(samples.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        auto& v = out.verdicts[i];
        const auto& s = samples[i];
        if (s.generated_caption && s.text && !s.generated_caption->is_zero() && !s.text->is_zero() &&
            s.generated_caption->dim() == s.text->dim()) {
            out.alignment[i] = cosine_similarity(*s.generated_caption, *s.text);
        }
        if (!v.kept) continue;
        if (!duration_filter(s.duration_s, thresholds.min_duration_s)) {
            v.kept = false;
            v.reason = "too-short";
            ++out.report.dropped_duration;
        } else if (std::isnan(out.alignment[i])) {
            v.kept = false;
            v.reason = s.generated_caption ? "zero-embedding" : "missing-embedding";
            ++out.report.dropped_error;
        } else if (!(out.alignment[i] >= thresholds.alignment_similarity)) {
            v.kept = false;
            v.reason = "misaligned";
            ++out.report.dropped_alignment;
        } else {
            ++out.report.kept;
        }
    }
    return out;
}

std::string_view kind_name(EmbeddingKind k) noexcept { return k == EmbeddingKind::Audio ? "audio" : "text"; }

HashedBagOfWordsEmbedder::HashedBagOfWordsEmbedder(std::size_t dim, double bias) : dim_(dim), bias_(bias) {
    if (dim_ < 2) throw std::invalid_argument("hashed embedding needs dim >= 2");
}

bool HashedBagOfWordsEmbedder::is_stopword(std::string_view token) {
    static constexpr std::string_view kStop[] = {
        "a",   "an",   "the",  "and",  "or",   "of",  "in",   "on",   "at",  "to",   "with", "is",
        "are", "was",  "be",   "by",   "for",  "as",  "it",   "its",  "this", "that", "there", "from",
        "some", "into", "onto", "while", "then", "can", "be",  "been", "has",  "have", "s",
    };
    return std::find(std::begin(kStop), std::end(kStop), token) != std::end(kStop);
}

std::pair<std::size_t, double> HashedBagOfWordsEmbedder::slot(std::string_view token) const {
    const auto h = text::fnv1a64(token);
    // The last coordinate is reserved for the bias.
    return {static_cast<std::size_t>(h % (dim_ - 1)), (h >> 63) ? -1.0 : 1.0};
}

EmbeddingVector HashedBagOfWordsEmbedder::embed_text(std::string_view input) const {
    std::vector<double> v(dim_, 0.0);
    bool any = false;
    for (const auto& tok : text::alnum_tokens(input)) {
        if (is_stopword(tok)) continue;
        auto [idx, sign] = slot(tok);
        v[idx] += sign;
        any = true;
    }
    if (any) v[dim_ - 1] = bias_;
    return EmbeddingVector(std::move(v));
}

EmbeddingVector HashedBagOfWordsEmbedder::embed(EmbeddingKind, std::string_view payload) {
    return embed_text(payload);
}

}  // namespace audsem::embed
