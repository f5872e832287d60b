#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "audsem/embed_filter.hpp"
#include "support.hpp"

using namespace audsem;
using namespace audsem::embed;

namespace {

EmbeddingVector ev(std::vector<double> v) { return EmbeddingVector(std::move(v)); }

// Independent cosine on raw vectors.
double ref_cos(const std::vector<double>& a, const std::vector<double>& b) {
    long double dot = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += static_cast<long double>(a[i]) * b[i];
        na += static_cast<long double>(a[i]) * a[i];
        nb += static_cast<long double>(b[i]) * b[i];
    }
    return static_cast<double>(dot / std::sqrt(na * nb));
}

std::vector<double> random_vec(testsupport::Gen& g, std::size_t dim) {
    std::vector<double> v(dim);
    for (auto& x : v) x = g.normal();
    return v;
}

}  // namespace

TEST_CASE("embed: vector construction") {
    CHECK_THROWS(ev({}));
    CHECK_THROWS(ev({1.0, NAN}));
    CHECK_THROWS(ev({INFINITY}));
    CHECK(ev({0, 0}).is_zero());
    CHECK(ev({3, 4}).norm() == doctest::Approx(5.0));
}

TEST_CASE("embed: cosine examples") {
    CHECK(cosine_similarity(ev({1, 0}), ev({1, 0})) == doctest::Approx(1.0));
    CHECK(cosine_similarity(ev({1, 0}), ev({0, 1})) == doctest::Approx(0.0));
    CHECK(cosine_similarity(ev({1, 1}), ev({1, 0})) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
    CHECK(cosine_distance(ev({1, 0}), ev({-1, 0})) == doctest::Approx(2.0));
    CHECK_THROWS_AS(cosine_similarity(ev({0, 0}), ev({1, 0})), std::invalid_argument);
    CHECK_THROWS_AS(cosine_similarity(ev({1, 0, 0}), ev({1, 0})), std::invalid_argument);
}

TEST_CASE("embed: cosine properties") {
    testsupport::Gen g(61);
    for (int i = 0; i < 2000; ++i) {
        const auto dim = static_cast<std::size_t>(g.range(1, 16));
        const auto a = random_vec(g, dim), b = random_vec(g, dim);
        const double s = cosine_similarity(ev(a), ev(b));
        CHECK(s == doctest::Approx(ref_cos(a, b)).epsilon(1e-9));
        CHECK(s == doctest::Approx(cosine_similarity(ev(b), ev(a))).epsilon(1e-12));
        CHECK(s >= -1.0);
        CHECK(s <= 1.0);
        CHECK(cosine_similarity(ev(a), ev(a)) == doctest::Approx(1.0).epsilon(1e-12));
        auto scaled = a;
        const double c = g.uniform(0.01, 100.0);
        for (auto& x : scaled) x *= c;
        CHECK(cosine_similarity(ev(scaled), ev(b)) == doctest::Approx(s).epsilon(1e-9));
    }
}

TEST_CASE("embed: mean embedding") {
    const std::vector<EmbeddingVector> two{ev({0, 2}), ev({2, 0})};
    CHECK(mean_embedding(two) == ev({1, 1}));
    const std::vector<EmbeddingVector> one{ev({0.3, -2})};
    CHECK(mean_embedding(one) == ev({0.3, -2}));
    const std::vector<EmbeddingVector> three{ev({1, 0}), ev({0, 1}), ev({1, 1})};
    const auto m = mean_embedding(three);
    CHECK(m[0] == doctest::Approx(2.0 / 3.0));
    CHECK(m[1] == doctest::Approx(2.0 / 3.0));
    CHECK_THROWS_AS(mean_embedding(std::vector<EmbeddingVector>{}), std::invalid_argument);
    const std::vector<EmbeddingVector> mixed{ev({1}), ev({1, 2})};
    CHECK_THROWS_AS(mean_embedding(mixed), std::invalid_argument);
}

TEST_CASE("embed: alignment and duration filters") {
    CHECK(alignment_filter(ev({1, 0}), ev({1, 0})));
    CHECK_FALSE(alignment_filter(ev({1, 0}), ev({-1, 0})));
    // cos 60 degrees is 0.5 up to rounding; the boundary must be kept.
    CHECK(alignment_filter(ev({1, 0}), ev({1, std::sqrt(3.0)}), 0.5 - 1e-15));
    CHECK(alignment_filter(ev({1, 0}), ev({1, 0}), 1.0));
    CHECK_FALSE(duration_filter(2.9));
    CHECK(duration_filter(3.0));
    CHECK(duration_filter(10.0));
}

TEST_CASE("embed: outlier filter examples") {
    // Sample 0 sits at distance above 0.9 from the audio mean.
    std::vector<OutlierInput> in;
    for (int i = 0; i < 9; ++i) in.push_back({ev({1, 0.01 * i}), ev({1, 1})});
    in.push_back({ev({-1, 1}), ev({1, 1})});
    const auto r = outlier_filter(in);
    CHECK(r.kept.size() == 9);
    CHECK(r.verdicts[9].reason == "outlier-audio");
    CHECK(r.report.dropped_outlier_audio == 1);
    CHECK(r.report.reconciles());

    std::vector<OutlierInput> same(5, {ev({1, 2}), ev({3, 4})});
    const auto s = outlier_filter(same);
    CHECK(s.kept.size() == 5);
    for (const auto& v : s.verdicts) CHECK(v.audio_distance == doctest::Approx(0.0).epsilon(1e-12));

    std::vector<OutlierInput> broken{{ev({1, 0}), ev({1, 0})}, {std::nullopt, ev({1, 0})}, {ev({0, 0}), ev({1, 0})}};
    const auto b = outlier_filter(broken);
    CHECK(b.kept == std::vector<std::size_t>{0});
    CHECK(b.verdicts[1].reason == "missing-embedding");
    CHECK(b.verdicts[2].reason == "zero-embedding");
    CHECK(b.report.dropped_error == 2);
    CHECK(b.report.reconciles());
}

TEST_CASE("embed: outlier filter matches a brute-force scan on planted clouds") {
    testsupport::Gen g(62);
    for (int round = 0; round < 20; ++round) {
        const std::size_t dim = 8, n = 100;
        std::vector<std::vector<double>> audio, textv;
        std::vector<double> center(dim, 0.0);
        center[0] = 3.0;
        for (std::size_t i = 0; i < n; ++i) {
            auto a = center, t = center;
            for (auto& x : a) x += 0.5 * g.normal();
            for (auto& x : t) x += 0.5 * g.normal();
            audio.push_back(a);
            textv.push_back(t);
        }
        const auto planted = g.index(n);
        for (auto& x : audio[planted]) x = -x;
        std::vector<OutlierInput> in;
        for (std::size_t i = 0; i < n; ++i) in.push_back({ev(audio[i]), ev(textv[i])});

        // Oracle: means over everything, then a direct scan.
        auto mean = [&](const std::vector<std::vector<double>>& vs) {
            std::vector<double> m(dim, 0.0);
            for (const auto& v : vs)
                for (std::size_t d = 0; d < dim; ++d) m[d] += v[d] / static_cast<double>(n);
            return m;
        };
        const auto ma = mean(audio), mt = mean(textv);
        std::vector<std::size_t> expect;
        for (std::size_t i = 0; i < n; ++i) {
            if (1.0 - ref_cos(audio[i], ma) > 0.9 || 1.0 - ref_cos(textv[i], mt) > 0.9) continue;
            expect.push_back(i);
        }
        const auto r = outlier_filter(in);
        CHECK(r.kept == expect);
        CHECK(std::find(r.kept.begin(), r.kept.end(), planted) == r.kept.end());
        CHECK(r.kept.size() == n - 1);

        auto perm = in;
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), g.engine());
        for (std::size_t i = 0; i < n; ++i) perm[i] = in[order[i]];
        const auto rp = outlier_filter(perm);
        std::vector<std::size_t> mapped;
        for (auto k : rp.kept) mapped.push_back(order[k]);
        std::sort(mapped.begin(), mapped.end());
        CHECK(mapped == r.kept);
    }
}

TEST_CASE("embed: run_filters order and attribution") {
    const auto a = ev({1, 0.1}), t = ev({1, 0.2});
    std::vector<FilterInput> in;
    in.push_back({"keep", 5.0, a, t, t});
    in.push_back({"short", 2.0, a, t, t});
    in.push_back({"misaligned", 5.0, a, t, ev({-1, 0})});
    in.push_back({"outlier", 2.0, ev({-1, -0.1}), t, ev({-1, 0})});
    in.push_back({"nogen", 5.0, a, t, std::nullopt});
    for (int i = 0; i < 6; ++i) in.push_back({"pad" + std::to_string(i), 4.0, a, t, t});
    const auto out = run_filters(in);
    CHECK(out.verdicts[0].kept);
    CHECK(out.verdicts[1].reason == "too-short");
    CHECK(out.verdicts[2].reason == "misaligned");
    CHECK(out.verdicts[3].reason == "outlier-audio");
    CHECK(out.verdicts[4].reason == "missing-embedding");
    CHECK(std::isnan(out.alignment[4]));
    CHECK(out.report.dropped_outlier_audio == 1);
    CHECK(out.report.dropped_duration == 1);
    CHECK(out.report.dropped_alignment == 1);
    CHECK(out.report.dropped_error == 1);
    CHECK(out.report.kept == 7);
    CHECK(out.report.reconciles());
}

TEST_CASE("embed: filter report always reconciles") {
    testsupport::Gen g(63);
    for (int round = 0; round < 200; ++round) {
        std::vector<FilterInput> in;
        const auto n = g.range(1, 30);
        for (int i = 0; i < n; ++i) {
            FilterInput f;
            f.sample_id = std::to_string(i);
            f.duration_s = g.uniform(1.0, 10.0);
            if (!g.coin(0.05)) f.audio = ev(random_vec(g, 4));
            if (!g.coin(0.05)) f.text = ev(random_vec(g, 4));
            if (!g.coin(0.05)) f.generated_caption = ev(random_vec(g, 4));
            in.push_back(f);
        }
        const auto out = run_filters(in);
        CHECK(out.report.input_count == static_cast<std::size_t>(n));
        CHECK(out.report.reconciles());
        std::size_t kept = 0;
        for (std::size_t i = 0; i < in.size(); ++i) {
            const auto& v = out.verdicts[i];
            kept += v.kept;
            CHECK(v.kept == v.reason.empty());
            if (v.kept) {
                CHECK(in[i].duration_s >= 3.0);
                CHECK(out.alignment[i] >= 0.5);
            }
        }
        CHECK(kept == out.report.kept);
    }
}

TEST_CASE("embed: hashed bag of words") {
    HashedBagOfWordsEmbedder e(64);
    const auto a = e.embed_text("A dog barks loudly");
    CHECK(a.dim() == 64);
    CHECK(a == e.embed_text("dog BARKS, loudly!"));
    CHECK(e.embed_text("the of and").is_zero());
    CHECK(cosine_similarity(a, e.embed_text("dog barks")) > cosine_similarity(a, e.embed_text("piano music")));
    CHECK(e.embed(EmbeddingKind::Text, "dog") == e.embed_text("dog"));
    CHECK(kind_name(EmbeddingKind::Audio) == "audio");
    CHECK(HashedBagOfWordsEmbedder::is_stopword("the"));
    CHECK_FALSE(HashedBagOfWordsEmbedder::is_stopword("dog"));
}
