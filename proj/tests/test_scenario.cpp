#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <json.hpp>

#include "idart/prng.hpp"
#include "idart/recorder.hpp"
#include "idart/scenario.hpp"

using namespace idart;
using namespace idart::scenario;

namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const auto dir = fs::path("idart_test_out") / "scenario" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::set<std::string> files_in(const fs::path& dir, const std::string& extension) {
    std::set<std::string> names;
    if (!fs::exists(dir)) return names;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.path().extension() == extension) names.insert(entry.path().filename().string());
    return names;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::vector<nlohmann::json> journal_lines(const fs::path& path) {
    std::vector<nlohmann::json> out;
    std::ifstream in(path);
    std::string line;
    while (std::getline(in, line)) out.push_back(nlohmann::json::parse(line));
    return out;
}

int line_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const ParseError& error) {
        return error.line();
    }
    FAIL("expected a ParseError");
    return -1;
}

}  // namespace

TEST_CASE("scenario parsing maps statements to timed actions") {
    const auto script = parse_scenario("seed 7\nduration 40\nat 2.0 approach 120\n");
    CHECK(script.seed == 7);
    CHECK(script.duration_ms == 40000);
    REQUIRE(script.timeline.size() == 1);
    CHECK(script.timeline[0].kind == Action::Kind::SetActorDistance);
    CHECK(script.timeline[0].t == 2000);
    CHECK(script.timeline[0].distance_cm == 120);
}

TEST_CASE("scenario parsing handles every verb, comments and '#' keys") {
    const auto script = parse_scenario(
        "# a comment\n"
        "seed 1\n"
        "duration 12.5\n"
        "\n"
        "at 1 beam broken\n"
        "at 2.25 beam restored\n"
        "at 3 key 4\n"
        "at 3.1 key #\n"
        "at 3.2 key *\n");
    CHECK(script.duration_ms == 12500);
    REQUIRE(script.timeline.size() == 5);
    CHECK(script.timeline[0].kind == Action::Kind::BeamBroken);
    CHECK(script.timeline[1].kind == Action::Kind::BeamRestored);
    CHECK(script.timeline[1].t == 2250);
    CHECK(script.timeline[2].key == '4');
    CHECK(script.timeline[3].key == '#');
    CHECK(script.timeline[4].key == '*');
}

TEST_CASE("scenario parse errors carry the line number") {
    CHECK(line_of([] { parse_scenario("seed 7\nduration 40\nat 2.0 fly\n"); }) == 3);
    CHECK(line_of([] { parse_scenario("duration 40\nat 5.0 approach 10\nat 3.0 approach 20\n"); }) ==
          3);
    CHECK(line_of([] { parse_scenario("duration 40\nat 2.x approach 10\n"); }) == 2);
    CHECK(line_of([] { parse_scenario("duration 40\nat 2.0001 approach 10\n"); }) == 2);
    CHECK(line_of([] { parse_scenario("seed 1\nseed 2\nduration 4\n"); }) == 2);
    CHECK(line_of([] { parse_scenario("warp 9\nduration 4\n"); }) == 1);
    CHECK(line_of([] { parse_scenario("duration 4\nat 9 approach 10\n"); }) == 1);  // too short
    CHECK_THROWS_AS(parse_scenario("seed 3\nat 1 approach 10\n"), ParseError);     // no duration
}

TEST_CASE("config parsing applies overrides and rejects unknown keys") {
    const auto cfg = parse_config(
        "# tighter site\n"
        "pin = 13579\n"
        "grace_ms = 5000\n"
        "loss_p = 0\n"
        "authorities = police@example.com, guard@example.com\n");
    CHECK(cfg.guard.pin == "13579");
    CHECK(cfg.guard.grace_ms == 5000);
    CHECK(cfg.loss_p == 0.0);
    REQUIRE(cfg.recipients.authorities.size() == 2);
    CHECK(cfg.recipients.authorities[1] == "guard@example.com");

    CHECK_THROWS_AS(parse_config("bogus = 1\n"), ParseError);
    CHECK_THROWS_AS(parse_config("enter_cm = 200\nexit_cm = 150\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config("loss_p = 1.5\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config("pin = abcd\n"), std::invalid_argument);
}

TEST_CASE("rendered config parses back to the same values") {
    RunConfig cfg;
    cfg.guard.pin = "97531";
    cfg.loss_p = 0.25;
    cfg.recipients.authorities = {"a@x.org", "b@y.org"};
    const auto back = parse_config(render_config(cfg));
    CHECK(back.guard.pin == cfg.guard.pin);
    CHECK(back.loss_p == cfg.loss_p);
    CHECK(back.recipients.authorities == cfg.recipients.authorities);
    CHECK(back.enter_cm == cfg.enter_cm);
    CHECK(back.timeout_ms == cfg.timeout_ms);
}

TEST_CASE("builtin scenarios exist and unknown names fail with the valid list") {
    CHECK(builtin_names() == std::vector<std::string>{"fig1", "fig2", "fig3"});

    const auto fig3 = builtin_scenario("fig3");
    bool has_break = false;
    for (const auto& action : fig3.timeline)
        if (action.kind == Action::Kind::BeamBroken && action.t == 5000) has_break = true;
    CHECK(has_break);
    CHECK(fig3.seed == 7);

    const auto fig2 = builtin_scenario("fig2");
    std::string keys;
    for (const auto& action : fig2.timeline)
        if (action.kind == Action::Kind::Key) keys.push_back(action.key);
    CHECK(keys == "2468#");  // spells the default pin plus confirm

    CHECK_THROWS_WITH_AS(builtin_scenario("fig9"),
                         "unknown scenario 'fig9' (valid: fig1 fig2 fig3)", std::invalid_argument);
}

TEST_CASE("fig1: unanswered walk-up escalates to one owner email with the clip") {
    const auto out = fresh_dir("fig1");
    const auto report = run_scenario(builtin_scenario("fig1"), RunConfig{}, out);

    CHECK(report.notifications == 1);
    CHECK(report.clips_written == 1);
    REQUIRE(report.records.size() == 1);
    CHECK(report.records[0].recipient == "owner@example.com");
    REQUIRE(report.records[0].attachment_path.has_value());

    // walking in at 2.0 s with dwell 3 at 10 Hz detects at 2.2 s
    CHECK(report.detection_latency_ms == 200);

    const auto clip = recorder::read_clip(*report.records[0].attachment_path);
    CHECK(clip.duration_ms() == 7000);
}

TEST_CASE("fig2: a PIN inside the grace window suppresses but keeps the clip") {
    const auto out = fresh_dir("fig2");
    const auto report = run_scenario(builtin_scenario("fig2"), RunConfig{}, out);

    CHECK(report.notifications == 0);
    CHECK(report.clips_written == 1);
    CHECK(files_in(out / "outbox", ".msg").empty());
    CHECK(files_in(out / "clips", ".clip").size() == 1);

    bool suppressed = false;
    for (const auto& line : journal_lines(report.journal_path))
        if (line["event"] == "suppress") suppressed = true;
    CHECK(suppressed);
}

TEST_CASE("fig3: break-in notifies the owner and every authority quickly") {
    const auto out = fresh_dir("fig3");
    const auto report = run_scenario(builtin_scenario("fig3"), RunConfig{}, out);

    CHECK(report.notifications == 2);
    std::set<std::string> recipients;
    for (const auto& record : report.records) recipients.insert(record.recipient);
    CHECK(recipients == std::set<std::string>{"owner@example.com", "police@example.com"});

    // dispatch lag from the scripted beam break stays well under 2 s
    Instant last_notify = 0;
    for (const auto& line : journal_lines(report.journal_path))
        if (line["event"] == "notify_email") last_notify = line["t"];
    CHECK(last_notify > 5000);
    CHECK(last_notify - 5000 < 2000);
}

TEST_CASE("identical runs are byte-identical") {
    const auto out_a = fresh_dir("det_a");
    const auto out_b = fresh_dir("det_b");
    for (const auto& name : builtin_names()) {
        const auto report_a = run_scenario(builtin_scenario(name), RunConfig{}, out_a);
        const auto report_b = run_scenario(builtin_scenario(name), RunConfig{}, out_b);
        CHECK(slurp(report_a.journal_path) == slurp(report_b.journal_path));
        CHECK(files_in(out_a / "outbox", ".msg") == files_in(out_b / "outbox", ".msg"));
        CHECK(files_in(out_a / "clips", ".clip") == files_in(out_b / "clips", ".clip"));
    }
}

TEST_CASE("journal time is monotone and dispatches never precede their alerts") {
    const auto out = fresh_dir("causality");
    const auto report = run_scenario(builtin_scenario("fig3"), RunConfig{}, out);
    Instant last = 0;
    for (const auto& line : journal_lines(report.journal_path)) {
        const Instant t = line["t"];
        CHECK(t >= last);
        last = t;
    }
    REQUIRE(report.alert_latency_ms.has_value());
    CHECK(*report.alert_latency_ms >= 0);
}

TEST_CASE("report counts match the files on disk") {
    for (const auto& name : builtin_names()) {
        const auto out = fresh_dir("conserve_" + name);
        const auto report = run_scenario(builtin_scenario(name), RunConfig{}, out);
        CHECK(static_cast<std::size_t>(report.clips_written) ==
              files_in(out / "clips", ".clip").size());
        CHECK(static_cast<std::size_t>(report.notifications) ==
              files_in(out / "outbox", ".msg").size());
    }
}

TEST_CASE("any correct confirm inside the grace window means zero notifications") {
    SplitMix64 rng(99);
    for (int trial = 0; trial < 8; ++trial) {
        const Instant approach = 500 + static_cast<Instant>(rng.next() % 6000);
        // detection completes at the dwell-th sensor tick at/after the approach
        const Instant detect = (approach + 99) / 100 * 100 + 200;
        const Instant grace = RunConfig{}.guard.grace_ms;
        const Instant confirm_start = detect + static_cast<Instant>(rng.next() % (grace - 1000));
        std::ostringstream script;
        script << "seed " << trial << "\n";
        script << "duration " << (detect + grace + 6000) / 1000 + 1 << "\n";
        script << "at " << approach / 1000.0 << " approach 120\n";
        const char keys[] = {'2', '4', '6', '8', '#'};
        for (int k = 0; k < 5; ++k)
            script << "at " << (confirm_start + k * 100) / 1000.0 << " key " << keys[k] << "\n";

        const auto out = fresh_dir("fig2_prop");
        const auto report = run_scenario(parse_scenario(script.str()), RunConfig{}, out);
        CHECK(report.notifications == 0);
    }
}

TEST_CASE("scenario files load and missing paths fail cleanly") {
    const auto dir = fresh_dir("files");
    const auto path = dir / "walk.scn";
    std::ofstream(path) << "seed 3\nduration 10\nat 1 approach 90\n";
    const auto script = load_scenario_file(path);
    CHECK(script.name == "walk");
    CHECK(script.timeline.size() == 1);

    CHECK_THROWS_WITH_AS(load_scenario_file(dir / "missing.scn"),
                         ("scenario file not found: " + (dir / "missing.scn").string()).c_str(),
                         std::runtime_error);
}
