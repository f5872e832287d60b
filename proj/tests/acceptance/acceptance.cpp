// Acceptance checks: one PASS/FAIL line per criterion, with tolerances and
// time limits pinned here. Exit status is non-zero when any line fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numeric>
#include <set>

#include "audsem/caption_mining.hpp"
#include "audsem/corpus_stats.hpp"
#include "audsem/embed_filter.hpp"
#include "audsem/reward.hpp"
#include "audsem/shards.hpp"
#include "audsem/stub_backends.hpp"
#include "audsem/synthesize.hpp"
#include "audsem/tagparse.hpp"
#include "desk_support.hpp"
#include "support.hpp"

using namespace audsem;
namespace fs = std::filesystem;
using io::json;

namespace {

constexpr double kLengthTol = 1e-12;
constexpr double kAdvantageSumTol = 1e-9;
constexpr double kShareTol = 0.02;

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void criterion(int id, const char* name, double limit_s, const std::function<Outcome()>& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = fn();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool pass = o.pass && secs < limit_s;
    if (!pass) ++failures;
    if (o.pass && !pass) o.detail += "; over time limit";
    std::printf("[%s] %2d %-30s %.3fs (limit %gs) %s\n", pass ? "PASS" : "FAIL", id, name, secs, limit_s,
                o.detail.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

// 1
Outcome length_pinning() {
    double worst = 0.0;
    for (long n_gold = 20; n_gold <= 200; ++n_gold) {
        const reward::LengthParams p{0.1, 0.5, n_gold};
        worst = std::max(worst, std::abs(reward::length_reward(n_gold - 15, p) - 0.0));
        worst = std::max(worst, std::abs(reward::length_reward(n_gold + 5, p) - 0.0));
        worst = std::max(worst, std::abs(reward::length_reward(n_gold, p) - 1.0));
        worst = std::max(worst, std::abs(reward::length_reward(n_gold - 5, p) - 1.0));
    }
    return {worst <= kLengthTol, "max abs error " + fmt("%.3g", worst) + " over n_gold 20..200"};
}

// 2
Outcome length_support() {
    testsupport::Gen g(1001);
    int bad_support = 0, bad_mono = 0;
    for (int i = 0; i < 1000; ++i) {
        const long n_gold = g.range(1, 400);
        const long n_y = g.range(0, n_gold + 40);
        const reward::LengthParams p{0.1, 0.5, n_gold};
        const double r = reward::length_reward(n_y, p);
        const bool inside = n_gold - 15 < n_y && n_y < n_gold + 5;
        if ((r > 0.0) != inside) ++bad_support;
        const double next = reward::length_reward(n_y + 1, p);
        if (n_y + 1 <= n_gold && next < r) ++bad_mono;
        if (n_y >= n_gold && next > r) ++bad_mono;
    }
    return {bad_support == 0 && bad_mono == 0, "1000 pairs, support violations " + std::to_string(bad_support) +
                                                    ", monotonicity violations " + std::to_string(bad_mono)};
}

// 3
Outcome advantages() {
    testsupport::Gen g(1002);
    int bad_sum = 0, bad_argmax = 0, bad_zero = 0, flat = 0;
    double worst_sum = 0.0;
    for (int i = 0; i < 10000; ++i) {
        std::vector<double> totals(6);
        if (g.coin(0.1)) {
            std::fill(totals.begin(), totals.end(), g.uniform(0.0, 3.0));
        } else {
            for (auto& t : totals) t = (g.coin() ? 1.0 : 0.0) + (g.coin(0.8) ? 1.0 : 0.0) + g.uniform(0.0, 1.0);
        }
        for (bool normalize : {false, true}) {
            const auto a = reward::group_advantages(totals, normalize);
            const double sum = std::accumulate(a.advantages.begin(), a.advantages.end(), 0.0);
            worst_sum = std::max(worst_sum, std::abs(sum));
            if (std::abs(sum) > kAdvantageSumTol) ++bad_sum;
            const bool constant = std::all_of(totals.begin(), totals.end(), [&](double t) { return t == totals[0]; });
            if (constant) {
                if (normalize) ++flat;
                if (std::any_of(a.advantages.begin(), a.advantages.end(), [](double x) { return x != 0.0; })) {
                    ++bad_zero;
                }
                continue;
            }
            if (normalize) {
                const double tmax = *std::max_element(totals.begin(), totals.end());
                const double amax = *std::max_element(a.advantages.begin(), a.advantages.end());
                for (std::size_t k = 0; k < 6; ++k) {
                    if ((totals[k] == tmax) != (a.advantages[k] == amax)) {
                        ++bad_argmax;
                        break;
                    }
                }
            }
        }
    }
    return {bad_sum == 0 && bad_argmax == 0 && bad_zero == 0 && flat > 0,
            "10000 groups of 6, max |sum| " + fmt("%.3g", worst_sum) + ", argmax breaks " +
                std::to_string(bad_argmax) + ", flat groups " + std::to_string(flat) + " (non-zero " +
                std::to_string(bad_zero) + ")"};
}

// 4
Outcome tag_grammar() {
    using namespace tagparse;
    const auto cases = io::read_jsonl(fs::path(AUDSEM_FIXTURES) / "tagparse_cases.jsonl");
    int fixture_bad = 0;
    std::set<std::string> codes_seen;
    bool alias_seen = false;
    for (const auto& c : cases) {
        const auto text = c.at("text").get<std::string>();
        const auto p = parse_tagged(text, c.at("require_semantic").get<bool>());
        std::vector<std::string> codes;
        for (auto v : p.violations) codes.emplace_back(violation_code(v));
        for (const auto& v : c.at("violations")) codes_seen.insert(v.get<std::string>());
        if (c.at("well_formed").get<bool>() && text.find("<thinking>") != std::string::npos) alias_seen = true;
        const bool sem_ok = c.at("semantic").is_null() ? !p.semantic_span.has_value()
                                                       : p.semantic_span == c.at("semantic").get<std::string>();
        if (codes != c.at("violations").get<std::vector<std::string>>() || p.well_formed != c.at("well_formed") ||
            p.think_span != c.at("think").get<std::string>() || p.answer_span != c.at("answer").get<std::string>() ||
            !sem_ok) {
            ++fixture_bad;
        }
    }
    const bool coverage = cases.size() == 100 && codes_seen.size() == 5 && alias_seen;

    testsupport::Gen g(1004);
    int fuzz_bad = 0;
    for (int i = 0; i < 100000; ++i) {
        const auto s = g.noisy_text(160);
        const auto p = parse_tagged(s, g.coin());
        if (p.well_formed != p.violations.empty()) ++fuzz_bad;
        (void)extract_answer(s);
    }

    int trip_bad = 0;
    for (int i = 0; i < 1000; ++i) {
        const bool semantic = g.coin();
        const auto t = g.triplet(semantic);
        const auto back = synth::parse_serialized(synth::serialize_tagged(t, semantic), semantic);
        if (!back || !(*back == t)) ++trip_bad;
    }
    return {fixture_bad == 0 && coverage && fuzz_bad == 0 && trip_bad == 0,
            std::to_string(cases.size()) + " fixtures (" + std::to_string(fixture_bad) + " wrong, " +
                std::to_string(codes_seen.size()) + " violation codes, alias " + (alias_seen ? "yes" : "no") +
                "), 100000 fuzz inputs (" + std::to_string(fuzz_bad) + " inconsistent), 1000 round-trips (" +
                std::to_string(trip_bad) + " lossy)"};
}

double ref_cos(const std::vector<double>& a, const std::vector<double>& b) {
    double ab = 0, aa = 0, bb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ab += a[i] * b[i];
        aa += a[i] * a[i];
        bb += b[i] * b[i];
    }
    return ab / std::sqrt(aa * bb);
}

// 5
Outcome filter_oracle() {
    testsupport::Gen g(1005);
    const std::size_t n = 1000, dim = 16, planted = 25;
    std::vector<std::vector<double>> audio(n), text(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (auto* v : {&audio[i], &text[i]}) {
            v->assign(dim, 0.0);
            (*v)[0] = 4.0;
            for (auto& x : *v) x += 0.6 * g.normal();
        }
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), g.engine());
    std::set<std::size_t> planted_ids(order.begin(), order.begin() + planted);
    for (auto i : planted_ids) {
        auto& v = (i % 2) ? audio[i] : text[i];
        for (auto& x : v) x = -x;
    }
    auto mean = [&](const std::vector<std::vector<double>>& vs) {
        std::vector<double> m(dim, 0.0);
        for (const auto& v : vs)
            for (std::size_t d = 0; d < dim; ++d) m[d] += v[d];
        for (auto& x : m) x /= static_cast<double>(n);
        return m;
    };
    const auto ma = mean(audio), mt = mean(text);
    std::vector<std::size_t> oracle;
    double min_planted = 2.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double da = 1.0 - ref_cos(audio[i], ma), dt = 1.0 - ref_cos(text[i], mt);
        if (planted_ids.count(i)) min_planted = std::min(min_planted, std::max(da, dt));
        if (da > 0.9 || dt > 0.9) continue;
        oracle.push_back(i);
    }
    std::vector<embed::OutlierInput> in;
    for (std::size_t i = 0; i < n; ++i) in.push_back({embed::EmbeddingVector(audio[i]), embed::EmbeddingVector(text[i])});
    const auto r = embed::outlier_filter(in);
    const bool outlier_ok = r.kept == oracle && oracle.size() == n - planted && min_planted > 0.9;

    int align_bad = 0, dur_bad = 0;
    for (int i = 0; i < 10000; ++i) {
        std::vector<double> a(dim), b(dim);
        for (auto& x : a) x = g.normal();
        for (std::size_t d = 0; d < dim; ++d) b[d] = g.uniform(-1.0, 1.0) * a[d] + 0.5 * g.normal();
        const double thr = g.uniform(-0.5, 0.9);
        if (embed::alignment_filter(embed::EmbeddingVector(a), embed::EmbeddingVector(b), thr) !=
            (ref_cos(a, b) >= thr)) {
            ++align_bad;
        }
        const double dur = std::round(g.uniform(0.0, 6.0) * 10.0) / 10.0;
        if (embed::duration_filter(dur) != (dur >= 3.0)) ++dur_bad;
    }
    return {outlier_ok && align_bad == 0 && dur_bad == 0,
            "kept " + std::to_string(r.kept.size()) + "/" + std::to_string(n) + " equals oracle: " +
                (r.kept == oracle ? "yes" : "no") + ", closest planted distance " + fmt("%.3f", min_planted) +
                ", alignment mismatches " + std::to_string(align_bad) + ", duration mismatches " +
                std::to_string(dur_bad)};
}

// 6
Outcome mining_examples() {
    stub::StubWorld world({});
    mining::RuleReferenceClassifier rules;
    const std::vector<std::string> good = {"(laughs)", "(laughter)", "[XBOX SOUND]", "[chicken bocking imitation]",
                                           "(cereal grains smacking onto wood)", "(collision)"};
    const std::vector<std::string> bad = {
        "[ transport ]", "(Wishes are left to wither by time.)",
        "(look, I like my nightmareless sleep; I'll play some scary games when I feel too peaceful)",
        "[A calm navy color] [TinyTAN character detail]", "[Haotian Sword Tower]"};
    int wrong = 0;
    for (const auto& t : good) {
        auto c = mining::extract_bracketed({"v", 0.0, 2.0, t});
        if (!c || !mining::classify(*c, rules, world.mining_judge()).kept) ++wrong;
    }
    for (const auto& t : bad) {
        auto c = mining::extract_bracketed({"v", 0.0, 2.0, t});
        if (c && mining::classify(*c, rules, world.mining_judge()).kept) ++wrong;
    }
    return {wrong == 0, std::to_string(good.size()) + " correct and " + std::to_string(bad.size()) +
                            " incorrect examples, misclassified " + std::to_string(wrong)};
}

// 7
Outcome desk_run() {
    const auto work = testsupport::scratch_dir("acceptance-desk");
    const auto c = testsupport::desk_config(work);
    testsupport::run_desk(c);
    int golden_bad = 0;
    for (const auto& [name, bytes] : testsupport::desk_outputs(c.run_dir())) {
        if (bytes != io::read_file(testsupport::golden_dir() / name)) ++golden_bad;
    }
    const auto summary = json::parse(io::read_file(c.run_dir() / "summary.json"));

    auto portable = [](std::map<std::string, std::string> files) {
        std::erase_if(files, [](const auto& kv) { return kv.first.rfind("fetch/", 0) == 0; });
        return files;
    };
    const auto reference = portable(testsupport::snapshot(c.run_dir()));
    int resume_bad = 0;
    for (std::size_t kill : {std::size_t{60}, std::size_t{180}}) {
        fs::remove_all(c.run_dir());
        try {
            testsupport::run_desk(c, kill);
            ++resume_bad;
        } catch (const testsupport::SimulatedKill&) {
        }
        {
            std::ofstream torn(c.run_dir() / "manifest.jsonl", std::ios::app | std::ios::binary);
            torn << R"({"seq": 1, "sample_id": ")";
        }
        testsupport::run_desk(c);
        if (portable(testsupport::snapshot(c.run_dir())) != reference) ++resume_bad;
    }
    fs::remove_all(work);
    return {golden_bad == 0 && resume_bad == 0,
            "packaged " + summary["completed"]["packaged"].dump() + "/50, " + summary["shards"].dump() +
                " shards, golden mismatches " + std::to_string(golden_bad) + ", resumed runs differing " +
                std::to_string(resume_bad)};
}

// 8
Outcome task_split() {
    stub::StubWorld world({});
    testsupport::Gen g(1008);
    std::vector<harness::StatsRecord> records;
    std::size_t skipped = 0;
    for (int i = 0; i < 10000; ++i) {
        char id[16];
        std::snprintf(id, sizeof id, "acc%05d", i);
        mining::CaptionCandidate cc;
        cc.video_id = id;
        cc.start_s = 1.0;
        cc.end_s = 5.0;
        cc.duration_s = 4.0;
        cc.normalized_text = cc.raw_text = "[" + g.words(3) + "]";
        annotate::AnnotationBundle b;
        b.duration_s = 4.0;
        b.audio.general_caption = g.words(6);
        ScoredLabel tag;
        tag.label = "Sound";
        tag.score = 0.5;
        b.audio.tags = {tag};
        const auto out = synth::judge_and_retry(world.generator(), world.synthesis_judge(), synth::build_prompt(b, cc));
        if (!out.reply) {
            ++skipped;
            continue;
        }
        for (auto& r : synth::expand_tasks(id, *out.reply, 2024)) records.push_back({std::move(r), {"Sound"}});
    }
    const auto s = harness::corpus_stats(records);
    const std::map<std::string, double> target = {{"caption", 0.20}, {"mcqa", 0.25}, {"open_qa", 0.50},
                                                  {"creative", 0.05}};
    double worst = 0.0;
    std::string shares;
    for (const auto& [k, t] : target) {
        const double v = s.task_shares.count(k) ? s.task_shares.at(k) : 0.0;
        worst = std::max(worst, std::abs(v - t));
        shares += (shares.empty() ? "" : "/") + fmt("%.1f", 100.0 * v);
    }
    return {worst <= kShareTol && skipped == 0,
            "caption/creative/mcqa/open_qa % = " + shares + " over " + std::to_string(s.total_records) +
                " records, max deviation " + fmt("%.2f", 100.0 * worst) + " pp"};
}

// 9
Outcome shard_arithmetic() {
    const auto dir = testsupport::scratch_dir("acceptance-shards");
    std::vector<harness::ShardEntry> entries;
    for (int i = 0; i < 10000; ++i) {
        const auto key = "rec" + std::to_string(i);
        entries.push_back({key,
                           {{"mp4", {}, "mp4:" + key},
                            {"wav", {}, "wav:" + key},
                            {"json", {}, json{{"sample_id", key}, {"i", i}}.dump()}}});
    }
    const auto r = harness::pack_shards(entries, dir);
    std::vector<std::size_t> sizes;
    std::size_t lossy = 0, k = 0;
    for (const auto& s : r.shards) {
        sizes.push_back(s.keys.size());
        const auto members = harness::untar(io::read_file(s.path));
        for (std::size_t m = 0; m < members.size(); ++m, k += (m % 3 == 0)) {
            const auto& e = entries[k];
            const auto& f = e.files[m % 3];
            if (members[m].name != e.key + "." + f.extension || members[m].data != *f.bytes) ++lossy;
        }
    }
    fs::remove_all(dir);
    const bool ok = sizes == std::vector<std::size_t>{4096, 4096, 1808} && lossy == 0 && k == 10000 &&
                    harness::plan_shards(10000) == sizes;
    std::string listed;
    for (auto s : sizes) listed += (listed.empty() ? "" : "/") + std::to_string(s);
    return {ok, "shard sizes " + listed + ", members differing after unpack " + std::to_string(lossy)};
}

}  // namespace

int main() {
    criterion(1, "length-reward pinning", 1, length_pinning);
    criterion(2, "length-reward support", 5, length_support);
    criterion(3, "advantage properties", 10, advantages);
    criterion(4, "tag-grammar suite", 30, tag_grammar);
    criterion(5, "filter oracle equivalence", 10, filter_oracle);
    criterion(6, "mining prompt examples", 1, mining_examples);
    criterion(7, "end-to-end desk run", 120, desk_run);
    criterion(8, "task-split statistics", 60, task_split);
    criterion(9, "shard arithmetic", 30, shard_arithmetic);
    std::printf("[N/A ] 10 %-30s not reproducible at desk scale: corpus size, benchmark scores, thinking-budget "
                "table and human agreement need the original models and data\n",
                "paper-scale results");
    std::printf("%s: %d failing\n", failures ? "FAIL" : "PASS", failures);
    return failures ? 1 : 0;
}
