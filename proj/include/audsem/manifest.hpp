#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "audsem/io.hpp"

namespace audsem::harness {

enum class Stage { Mine = 0, Fetch, Annotate, Filter, Synthesize, Package };

inline constexpr Stage kAllStages[] = {Stage::Mine,   Stage::Fetch,      Stage::Annotate,
                                       Stage::Filter, Stage::Synthesize, Stage::Package};

std::string_view stage_name(Stage s) noexcept;    // "mine", "fetch", ...
std::string_view stage_status(Stage s) noexcept;  // "mined", "fetched", ...
std::optional<Stage> stage_from_name(std::string_view name) noexcept;

struct ManifestEvent {
    std::uint64_t seq = 0;
    std::string sample_id;
    Stage stage = Stage::Mine;
    bool ok = true;
    std::string reason;  // set when !ok
    bool error = false;  // backend or I/O failure, as opposed to a policy drop
};

io::json to_json(const ManifestEvent& e);
ManifestEvent event_from_json(const io::json& j);

struct SampleState {
    std::optional<Stage> completed;  // highest stage done
    std::optional<Stage> failed_at;
    std::string reason;
    bool error = false;

    bool failed() const noexcept { return failed_at.has_value(); }
    bool done(Stage s) const noexcept { return completed && *completed >= s; }
    // "mined" ... "packaged", or "failed:<reason>".
    std::string status() const;
};

// Thrown when an event would move a sample backwards or out of failure.
class ManifestError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Applies one event to a state table. Stages must advance by exactly one;
// failed samples are terminal.
void apply_event(std::map<std::string, SampleState>& states, const ManifestEvent& e);

// Rebuilds state from an event log.
std::map<std::string, SampleState> replay(const std::vector<ManifestEvent>& events);

// Append-only JSONL event log with an in-memory state table. A torn final line
// left by a crash is cut off when the manifest is reopened.
class RunManifest {
public:
    // Opens or creates the log and replays it.
    explicit RunManifest(std::filesystem::path path);

    const std::filesystem::path& path() const noexcept { return path_; }
    const std::map<std::string, SampleState>& samples() const noexcept { return states_; }
    const std::vector<ManifestEvent>& events() const noexcept { return events_; }

    const SampleState* find(const std::string& sample_id) const;

    // Validates, writes one line, then updates state. Returns the stored event.
    ManifestEvent append(ManifestEvent e);

    // Called after each successful append. Tests use it to simulate a kill.
    std::function<void(const ManifestEvent&)> on_event;

    // Samples that completed `s`, sorted.
    std::vector<std::string> completed(Stage s) const;

private:
    std::filesystem::path path_;
    std::vector<ManifestEvent> events_;
    std::map<std::string, SampleState> states_;
};

}  // namespace audsem::harness
