#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "idart/gateway.hpp"
#include "idart/guard.hpp"
#include "idart/types.hpp"

namespace idart::scenario {

struct Action {
    enum class Kind : std::uint8_t { SetActorDistance, BeamBroken, BeamRestored, Key };
    Kind kind = Kind::SetActorDistance;
    Instant t = 0;
    int distance_cm = 0;  // SetActorDistance
    char key = '0';       // Key
};

struct ScenarioScript {
    std::string name = "scenario";
    Instant duration_ms = 0;
    std::uint64_t seed = 0;
    std::vector<Action> timeline;  // time-ordered, ties keep file order
};

class ParseError : public std::runtime_error {
public:
    ParseError(int line, const std::string& message);
    int line() const { return line_; }

private:
    int line_;
};

// Scenario DSL, one statement per line; lines whose first non-blank char is
// '#' are comments (no trailing comments -- '#' is also a key symbol):
//   seed <u64>
//   duration <seconds[.millis]>
//   at <t> approach <cm>
//   at <t> beam broken|restored
//   at <t> key <0-9|#|*>
ScenarioScript parse_scenario(std::string_view text);
ScenarioScript load_scenario_file(const std::filesystem::path& path);

// Everything a run needs beyond the script. Flat `key = value` file with
// the same comment rule; every field has a default.
struct RunConfig {
    guard::GuardConfig guard;

    // ultrasonic presence path
    int sample_period_ms = 100;
    int max_range_cm = 400;
    int noise_jitter_cm = 0;
    int enter_cm = 150;
    int exit_cm = 170;
    int dwell_samples = 3;

    // beam path
    int beam_confirm = 2;

    // recorder
    int fps = 10;
    Instant pre_roll_ms = 2000;
    Instant post_roll_ms = 5000;
    std::size_t ring_capacity = 150;

    // link
    double loss_p = 0.2;
    Instant base_latency_ms = 20;
    Instant jitter_ms = 10;
    Instant timeout_ms = 100;
    int max_retries = 5;

    gateway::RecipientConfig recipients;
};

// Throws ParseError (bad line) or std::invalid_argument (bad value).
RunConfig parse_config(std::string_view text);
RunConfig load_config_file(const std::filesystem::path& path);
void validate(const RunConfig& cfg);

// `key = value` rendering of the effective config; parses back to itself.
std::string render_config(const RunConfig& cfg);

std::vector<std::string> builtin_names();
bool is_builtin(std::string_view name);

// fig1: approach, no PIN          -> presence email with clip
// fig2: approach, correct PIN     -> suppressed, clip retained on disk
// fig3: beam break while armed    -> break-in emails to owner + authorities
// Throws std::invalid_argument listing the valid names.
ScenarioScript builtin_scenario(std::string_view name);

struct Report {
    std::string scenario;
    std::uint64_t seed = 0;
    Instant duration_ms = 0;
    int notifications = 0;
    int clips_written = 0;
    std::optional<Instant> detection_latency_ms;  // presence detect - first below-threshold sample
    std::optional<Instant> alert_latency_ms;      // max over alerts: dispatch - node alert time
    std::filesystem::path journal_path;
    std::filesystem::path outbox_dir;
    std::filesystem::path clips_dir;
    std::vector<gateway::NotificationRecord> records;
};

std::string format_report(const Report& report);

// Deterministic replay: identical (script, config) produce byte-identical
// journals and identical outbox file sets. Writes journal.jsonl, outbox/
// and clips/ under out_dir (outbox/ and clips/ are cleared first).
Report run_scenario(const ScenarioScript& script, const RunConfig& config,
                    const std::filesystem::path& out_dir);

}  // namespace idart::scenario
