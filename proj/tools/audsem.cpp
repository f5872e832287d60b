// audsem: command line front end for the curation pipeline, reward scoring and
// MCQ evaluation.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

#include "audsem/config.hpp"
#include "audsem/evaluate.hpp"
#include "audsem/pipeline.hpp"
#include "audsem/reward.hpp"

using namespace audsem;
using harness::Config;
using harness::Stage;
using io::json;

namespace {

struct Globals {
    std::string config;
    std::optional<std::string> run_id;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> workers;
    bool dry_run = false;
};

Config load_config(const Globals& g) {
    if (g.config.empty()) throw ConfigError("--config is required");
    auto c = Config::load(g.config);
    if (g.run_id) c.run_id = *g.run_id;
    if (g.seed) c.seed = *g.seed;
    if (g.workers) c.workers = *g.workers;
    c.dry_run = c.dry_run || g.dry_run;
    c.validate();
    return c;
}

int run_stages(const Globals& g, const std::vector<Stage>& stages, bool finish) {
    const auto config = load_config(g);
    auto backends = harness::BackendSet::from_config(config);
    std::filesystem::create_directories(config.run_dir());
    harness::RunManifest manifest(config.run_dir() / "manifest.jsonl");
    harness::Pipeline pipeline(config, backends->view(), manifest, &std::cerr);
    try {
        for (auto s : stages) pipeline.run_stage(s);
    } catch (const harness::StageAborted& e) {
        std::cerr << "audsem: " << e.what() << '\n';
        if (!config.dry_run) pipeline.write_summary();
        std::cout << pipeline.summary().dump(2) << '\n';
        return 3;
    }
    if (finish && !config.dry_run) {
        pipeline.write_stats();
        pipeline.write_summary();
    }
    if (!config.dry_run) std::cout << pipeline.summary().dump(2) << '\n';
    return 0;
}

int run_stats(const Globals& g) {
    const auto config = load_config(g);
    auto backends = harness::BackendSet::from_config(config);
    harness::RunManifest manifest(config.run_dir() / "manifest.jsonl");
    harness::Pipeline pipeline(config, backends->view(), manifest, &std::cerr);
    const auto stats = pipeline.write_stats();
    std::cout << harness::to_json(stats).dump(2) << '\n';
    return 0;
}

json breakdown_json(const reward::RewardBreakdown& b) {
    return {{"accuracy", b.accuracy},
            {"format", b.format},
            {"length", b.length},
            {"n_y", b.n_y},
            {"total", b.total},
            {"weights", {{"accuracy", b.weights.accuracy}, {"format", b.weights.format}, {"length", b.weights.length}}}};
}

std::pair<reward::LengthParams, reward::RewardWeights> reward_params(const Globals& g) {
    if (g.config.empty()) return {};
    const auto c = load_config(g);
    return {c.length, c.weights};
}

int reward_score(const Globals& g, const std::string& input) {
    auto [length, weights] = reward_params(g);
    std::ifstream file;
    std::istream* in = &std::cin;
    if (!input.empty() && input != "-") {
        file.open(input);
        if (!file) throw ConfigError("cannot open " + input);
        in = &file;
    }
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(*in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json j;
        try {
            j = json::parse(line);
            auto p = length;
            if (j.contains("n_gold")) p.n_gold = j.at("n_gold").get<long>();
            p.validate();
            const bool semantic = j.value("semantic_mode", false);
            const auto b = reward::score_response(j.at("response").get<std::string>(), j.at("gold").get<std::string>(),
                                                  semantic, p, weights);
            std::cout << breakdown_json(b).dump() << '\n';
        } catch (const std::exception& e) {
            throw std::runtime_error("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return 0;
}

int reward_curve(const Globals& g, long from, long to, std::optional<long> n_gold) {
    auto [length, weights] = reward_params(g);
    if (n_gold) length.n_gold = *n_gold;
    length.validate();
    if (from > to) throw std::invalid_argument("--from must not exceed --to");
    std::cout << "n_y,length_reward\n";
    for (long n = from; n <= to; ++n) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%ld,%.6f\n", n, reward::length_reward(n, length));
        std::cout << buf;
    }
    return 0;
}

int run_eval(const std::string& input, const std::string& output) {
    const auto report = harness::evaluate_mcq(harness::read_eval_items(input));
    const auto text = harness::to_json(report).dump(2) + "\n";
    if (output.empty()) std::cout << text;
    else io::write_file_atomic(output, text);
    for (const auto& [cat, acc] : report.per_category) {
        std::cerr << cat << ": " << acc.correct << "/" << acc.total << '\n';
    }
    std::cerr << "overall: " << report.overall.correct << "/" << report.overall.total << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"audio caption curation pipeline"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--config", g.config, "config file (JSON)");
    app.add_option("--run-id", g.run_id, "override run.run_id");
    app.add_option("--seed", g.seed, "override run.seed");
    app.add_option("--workers", g.workers, "override run.workers")->check(CLI::PositiveNumber);
    app.add_flag("--dry-run", g.dry_run, "print planned work without side effects");

    std::function<int()> action;
    const std::vector<std::pair<const char*, Stage>> stage_cmds = {
        {"mine", Stage::Mine},           {"fetch", Stage::Fetch},           {"annotate", Stage::Annotate},
        {"filter", Stage::Filter},       {"synthesize", Stage::Synthesize}, {"package", Stage::Package}};
    for (const auto& [name, stage] : stage_cmds) {
        auto* sub = app.add_subcommand(name, std::string("run the ") + name + " stage");
        sub->fallthrough();
        sub->callback([&, stage = stage] { action = [&, stage] { return run_stages(g, {stage}, false); }; });
    }
    auto* run = app.add_subcommand("run", "run every stage, then stats and summary");
    run->fallthrough();
    run->callback([&] {
        action = [&] {
            return run_stages(g, {std::begin(harness::kAllStages), std::end(harness::kAllStages)}, true);
        };
    });
    auto* stats = app.add_subcommand("stats", "write corpus statistics for a packaged run");
    stats->fallthrough();
    stats->callback([&] { action = [&] { return run_stats(g); }; });

    auto* rw = app.add_subcommand("reward", "score responses or print the length reward curve");
    rw->fallthrough();
    rw->require_subcommand(1);
    std::string score_input;
    auto* score = rw->add_subcommand("score", "JSONL {response, gold, n_gold?, semantic_mode?} to reward lines");
    score->fallthrough();
    score->add_option("input", score_input, "input file, stdin when absent");
    score->callback([&] { action = [&] { return reward_score(g, score_input); }; });
    long from = 0, to = 50;
    std::optional<long> n_gold;
    auto* curve = rw->add_subcommand("curve", "CSV of the length reward over an n_y range");
    curve->fallthrough();
    curve->add_option("--from", from);
    curve->add_option("--to", to);
    curve->add_option("--n-gold", n_gold);
    curve->callback([&] { action = [&] { return reward_curve(g, from, to, n_gold); }; });

    std::string eval_in, eval_out;
    auto* ev = app.add_subcommand("eval", "MCQ accuracy over JSONL eval items");
    ev->fallthrough();
    ev->add_option("input", eval_in, "eval items (JSONL)")->required();
    ev->add_option("-o,--output", eval_out, "report path, stdout when absent");
    ev->callback([&] { action = [&] { return run_eval(eval_in, eval_out); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    try {
        return action();
    } catch (const ConfigError& e) {
        std::cerr << "audsem: config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "audsem: " << e.what() << '\n';
        return 1;
    }
}
