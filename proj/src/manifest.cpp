#include "audsem/manifest.hpp"

#include <fstream>

#include "audsem/error.hpp"

namespace audsem::harness {

std::string_view stage_name(Stage s) noexcept {
    switch (s) {
        case Stage::Mine: return "mine";
        case Stage::Fetch: return "fetch";
        case Stage::Annotate: return "annotate";
        case Stage::Filter: return "filter";
        case Stage::Synthesize: return "synthesize";
        case Stage::Package: return "package";
    }
    return "mine";
}

std::string_view stage_status(Stage s) noexcept {
    switch (s) {
        case Stage::Mine: return "mined";
        case Stage::Fetch: return "fetched";
        case Stage::Annotate: return "annotated";
        case Stage::Filter: return "filtered";
        case Stage::Synthesize: return "synthesized";
        case Stage::Package: return "packaged";
    }
    return "mined";
}

std::optional<Stage> stage_from_name(std::string_view name) noexcept {
    for (auto s : kAllStages) {
        if (stage_name(s) == name || stage_status(s) == name) return s;
    }
    return std::nullopt;
}

std::string SampleState::status() const {
    if (failed_at) return "failed:" + reason;
    return completed ? std::string(stage_status(*completed)) : std::string("new");
}

io::json to_json(const ManifestEvent& e) {
    return {{"seq", e.seq},
            {"sample_id", e.sample_id},
            {"stage", std::string(stage_name(e.stage))},
            {"status", e.ok ? std::string(stage_status(e.stage)) : std::string("failed")},
            {"reason", e.reason},
            {"error", e.error}};
}

ManifestEvent event_from_json(const io::json& j) {
    ManifestEvent e;
    e.seq = j.at("seq").get<std::uint64_t>();
    e.sample_id = j.at("sample_id").get<std::string>();
    const auto stage = stage_from_name(j.at("stage").get<std::string>());
    if (!stage) throw ManifestError("unknown stage in manifest");
    e.stage = *stage;
    e.ok = j.at("status").get<std::string>() != "failed";
    e.reason = j.value("reason", "");
    e.error = j.value("error", false);
    return e;
}

void apply_event(std::map<std::string, SampleState>& states, const ManifestEvent& e) {
    if (e.sample_id.empty()) throw ManifestError("event without sample id");
    auto& st = states[e.sample_id];
    if (st.failed()) throw ManifestError("sample " + e.sample_id + " already failed");
    const int expected = st.completed ? static_cast<int>(*st.completed) + 1 : 0;
    if (static_cast<int>(e.stage) != expected) {
        throw ManifestError("sample " + e.sample_id + ": " + std::string(stage_name(e.stage)) +
                            " event out of order (status " + st.status() + ")");
    }
    if (e.ok) {
        st.completed = e.stage;
    } else {
        st.failed_at = e.stage;
        st.reason = e.reason.empty() ? "unspecified" : e.reason;
        st.error = e.error;
    }
}

std::map<std::string, SampleState> replay(const std::vector<ManifestEvent>& events) {
    std::map<std::string, SampleState> states;
    for (const auto& e : events) apply_event(states, e);
    return states;
}

RunManifest::RunManifest(std::filesystem::path path) : path_(std::move(path)) {
    namespace fs = std::filesystem;
    if (path_.has_parent_path()) fs::create_directories(path_.parent_path());
    if (!fs::exists(path_)) {
        std::ofstream(path_, std::ios::binary);
        return;
    }
    // Cut a torn tail so later appends start on a fresh line.
    std::string bytes = io::read_file(path_);
    const auto last_nl = bytes.find_last_of('\n');
    const std::size_t keep = last_nl == std::string::npos ? 0 : last_nl + 1;
    if (keep != bytes.size()) {
        bytes.resize(keep);
        io::write_file_atomic(path_, bytes);
    }
    for (const auto& j : io::read_jsonl(path_)) events_.push_back(event_from_json(j));
    states_ = replay(events_);
}

const SampleState* RunManifest::find(const std::string& sample_id) const {
    auto it = states_.find(sample_id);
    return it == states_.end() ? nullptr : &it->second;
}

ManifestEvent RunManifest::append(ManifestEvent e) {
    e.seq = events_.empty() ? 1 : events_.back().seq + 1;
    std::map<std::string, SampleState> probe;
    if (auto it = states_.find(e.sample_id); it != states_.end()) probe.emplace(it->first, it->second);
    apply_event(probe, e);
    {
        std::ofstream out(path_, std::ios::binary | std::ios::app);
        out << to_json(e).dump() << '\n';
        out.flush();
        if (!out) throw Error("cannot append to manifest " + path_.string());
    }
    states_[e.sample_id] = probe.begin()->second;
    events_.push_back(e);
    if (on_event) on_event(e);
    return e;
}

std::vector<std::string> RunManifest::completed(Stage s) const {
    std::vector<std::string> out;
    for (const auto& [id, st] : states_) {
        if (st.done(s)) out.push_back(id);
    }
    return out;
}

}  // namespace audsem::harness
