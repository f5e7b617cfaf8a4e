#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "idart/scenario.hpp"
#include "idart/sensing.hpp"

namespace idart::scenario {

namespace {

std::vector<std::string> tokenize(const std::string& line) {
    std::istringstream is(line);
    std::vector<std::string> tokens;
    std::string token;
    while (is >> token) tokens.push_back(token);
    return tokens;
}

bool is_comment_or_blank(const std::string& line) {
    const auto pos = line.find_first_not_of(" \t\r");
    return pos == std::string::npos || line[pos] == '#';
}

std::uint64_t parse_u64(const std::string& text, int line) {
    if (text.empty() || !std::all_of(text.begin(), text.end(),
                                     [](char c) { return c >= '0' && c <= '9'; }))
        throw ParseError(line, "expected an unsigned integer, got '" + text + "'");
    try {
        return std::stoull(text);
    } catch (const std::exception&) {
        throw ParseError(line, "integer out of range: '" + text + "'");
    }
}

// "<seconds>[.<millis>]" -> integer milliseconds, exact (no floats).
Instant parse_time_ms(const std::string& text, int line) {
    const auto dot = text.find('.');
    const std::string whole = dot == std::string::npos ? text : text.substr(0, dot);
    const std::string frac = dot == std::string::npos ? "" : text.substr(dot + 1);
    if (whole.empty() && frac.empty()) throw ParseError(line, "malformed time '" + text + "'");
    if (frac.size() > 3) throw ParseError(line, "time resolution is 1 ms: '" + text + "'");
    auto digits_only = [](const std::string& s) {
        return std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
    };
    if (!digits_only(whole) || !digits_only(frac))
        throw ParseError(line, "malformed time '" + text + "'");
    Instant ms = whole.empty() ? 0 : static_cast<Instant>(std::stoll(whole)) * 1000;
    if (!frac.empty()) {
        Instant f = std::stoll(frac);
        for (std::size_t i = frac.size(); i < 3; ++i) f *= 10;
        ms += f;
    }
    return ms;
}

int parse_int(const std::string& text, int line) {
    try {
        std::size_t pos = 0;
        const int v = std::stoi(text, &pos);
        if (pos != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw ParseError(line, "expected an integer, got '" + text + "'");
    }
}

}  // namespace

ParseError::ParseError(int line, const std::string& message)
    : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}

ScenarioScript parse_scenario(std::string_view text) {
    ScenarioScript script;
    bool have_seed = false;
    bool have_duration = false;
    int duration_line = 0;

    std::istringstream input{std::string(text)};
    std::string raw;
    int line_no = 0;
    while (std::getline(input, raw)) {
        ++line_no;
        if (is_comment_or_blank(raw)) continue;
        const auto tokens = tokenize(raw);
        const std::string& head = tokens.front();

        if (head == "seed") {
            if (tokens.size() != 2) throw ParseError(line_no, "usage: seed <u64>");
            if (have_seed) throw ParseError(line_no, "duplicate seed line");
            script.seed = parse_u64(tokens[1], line_no);
            have_seed = true;
            continue;
        }
        if (head == "duration") {
            if (tokens.size() != 2) throw ParseError(line_no, "usage: duration <seconds>");
            if (have_duration) throw ParseError(line_no, "duplicate duration line");
            script.duration_ms = parse_time_ms(tokens[1], line_no);
            have_duration = true;
            duration_line = line_no;
            continue;
        }
        if (head != "at") throw ParseError(line_no, "unknown statement '" + head + "'");
        if (tokens.size() < 3) throw ParseError(line_no, "usage: at <t> <verb> ...");

        Action action;
        action.t = parse_time_ms(tokens[1], line_no);
        if (!script.timeline.empty() && action.t < script.timeline.back().t)
            throw ParseError(line_no, "actions out of order");

        const std::string& verb = tokens[2];
        if (verb == "approach") {
            if (tokens.size() != 4) throw ParseError(line_no, "usage: at <t> approach <cm>");
            action.kind = Action::Kind::SetActorDistance;
            action.distance_cm = parse_int(tokens[3], line_no);
            if (action.distance_cm < 0) throw ParseError(line_no, "distance must be non-negative");
        } else if (verb == "beam") {
            if (tokens.size() != 4 || (tokens[3] != "broken" && tokens[3] != "restored"))
                throw ParseError(line_no, "usage: at <t> beam broken|restored");
            action.kind =
                tokens[3] == "broken" ? Action::Kind::BeamBroken : Action::Kind::BeamRestored;
        } else if (verb == "key") {
            if (tokens.size() != 4 || tokens[3].size() != 1 || !sensing::is_valid_key(tokens[3][0]))
                throw ParseError(line_no, "usage: at <t> key <0-9|#|*>");
            action.kind = Action::Kind::Key;
            action.key = tokens[3][0];
        } else {
            throw ParseError(line_no, "unknown verb '" + verb + "'");
        }
        script.timeline.push_back(action);
    }

    if (!have_duration) throw ParseError(line_no, "missing duration line");
    if (!script.timeline.empty() && script.duration_ms < script.timeline.back().t)
        throw ParseError(duration_line, "duration shorter than the last action");
    return script;
}

ScenarioScript load_scenario_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("scenario file not found: " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    ScenarioScript script = parse_scenario(buffer.str());
    script.name = path.stem().string();
    return script;
}

namespace {

std::vector<std::string> split_csv(const std::string& value) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(value);
    while (std::getline(is, item, ',')) {
        const auto begin = item.find_first_not_of(" \t");
        if (begin == std::string::npos) continue;
        const auto end = item.find_last_not_of(" \t");
        out.push_back(item.substr(begin, end - begin + 1));
    }
    return out;
}

}  // namespace

RunConfig parse_config(std::string_view text) {
    RunConfig cfg;
    std::istringstream input{std::string(text)};
    std::string raw;
    int line_no = 0;
    while (std::getline(input, raw)) {
        ++line_no;
        if (is_comment_or_blank(raw)) continue;
        const auto eq = raw.find('=');
        if (eq == std::string::npos) throw ParseError(line_no, "expected key = value");
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            if (b == std::string::npos) return std::string();
            const auto e = s.find_last_not_of(" \t\r");
            return s.substr(b, e - b + 1);
        };
        const std::string key = trim(raw.substr(0, eq));
        const std::string value = trim(raw.substr(eq + 1));
        if (key.empty()) throw ParseError(line_no, "empty key");

        auto as_int = [&] { return parse_int(value, line_no); };
        auto as_ms = [&] { return static_cast<Instant>(parse_u64(value, line_no)); };

        if (key == "pin") cfg.guard.pin = value;
        else if (key == "max_fails") cfg.guard.max_fails = as_int();
        else if (key == "lockout_ms") cfg.guard.lockout_ms = as_ms();
        else if (key == "grace_ms") cfg.guard.grace_ms = as_ms();
        else if (key == "sample_period_ms") cfg.sample_period_ms = as_int();
        else if (key == "max_range_cm") cfg.max_range_cm = as_int();
        else if (key == "noise_jitter_cm") cfg.noise_jitter_cm = as_int();
        else if (key == "enter_cm") cfg.enter_cm = as_int();
        else if (key == "exit_cm") cfg.exit_cm = as_int();
        else if (key == "dwell_samples") cfg.dwell_samples = as_int();
        else if (key == "beam_confirm") cfg.beam_confirm = as_int();
        else if (key == "fps") cfg.fps = as_int();
        else if (key == "pre_roll_ms") cfg.pre_roll_ms = as_ms();
        else if (key == "post_roll_ms") cfg.post_roll_ms = as_ms();
        else if (key == "ring_capacity") cfg.ring_capacity = static_cast<std::size_t>(as_int());
        else if (key == "loss_p") {
            try {
                std::size_t pos = 0;
                cfg.loss_p = std::stod(value, &pos);
                if (pos != value.size()) throw std::invalid_argument(value);
            } catch (const std::exception&) {
                throw ParseError(line_no, "expected a probability, got '" + value + "'");
            }
        }
        else if (key == "base_latency_ms") cfg.base_latency_ms = as_ms();
        else if (key == "jitter_ms") cfg.jitter_ms = as_ms();
        else if (key == "timeout_ms") cfg.timeout_ms = as_ms();
        else if (key == "max_retries") cfg.max_retries = as_int();
        else if (key == "owner") cfg.recipients.owner = value;
        else if (key == "authorities") cfg.recipients.authorities = split_csv(value);
        else throw ParseError(line_no, "unknown config key '" + key + "'");
    }
    validate(cfg);
    return cfg;
}

RunConfig load_config_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("config file not found: " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str());
}

void validate(const RunConfig& cfg) {
    guard::validate(cfg.guard);
    if (cfg.sample_period_ms < 1) throw std::invalid_argument("sample_period_ms must be >= 1");
    if (cfg.max_range_cm < 1) throw std::invalid_argument("max_range_cm must be >= 1");
    if (cfg.noise_jitter_cm < 0) throw std::invalid_argument("noise_jitter_cm must be >= 0");
    if (cfg.exit_cm <= cfg.enter_cm) throw std::invalid_argument("exit_cm must exceed enter_cm");
    if (cfg.dwell_samples < 1) throw std::invalid_argument("dwell_samples must be >= 1");
    if (cfg.beam_confirm < 1) throw std::invalid_argument("beam_confirm must be >= 1");
    if (cfg.fps < 1 || cfg.fps > 255 || 1000 % cfg.fps != 0)
        throw std::invalid_argument("fps must divide 1000 evenly");
    if (cfg.pre_roll_ms < 0 || cfg.post_roll_ms < 0)
        throw std::invalid_argument("clip rolls must be non-negative");
    if (cfg.ring_capacity < 1) throw std::invalid_argument("ring_capacity must be >= 1");
    if (cfg.loss_p < 0.0 || cfg.loss_p > 1.0) throw std::invalid_argument("loss_p must be in [0,1]");
    if (cfg.base_latency_ms < 0 || cfg.jitter_ms < 0)
        throw std::invalid_argument("latency values must be non-negative");
    if (cfg.timeout_ms < 1) throw std::invalid_argument("timeout_ms must be >= 1");
    if (cfg.max_retries < 0) throw std::invalid_argument("max_retries must be >= 0");
    if (cfg.recipients.owner.empty()) throw std::invalid_argument("owner must be set");
}

std::string render_config(const RunConfig& cfg) {
    std::ostringstream os;
    os << "pin = " << cfg.guard.pin << '\n'
       << "max_fails = " << cfg.guard.max_fails << '\n'
       << "lockout_ms = " << cfg.guard.lockout_ms << '\n'
       << "grace_ms = " << cfg.guard.grace_ms << '\n'
       << "sample_period_ms = " << cfg.sample_period_ms << '\n'
       << "max_range_cm = " << cfg.max_range_cm << '\n'
       << "noise_jitter_cm = " << cfg.noise_jitter_cm << '\n'
       << "enter_cm = " << cfg.enter_cm << '\n'
       << "exit_cm = " << cfg.exit_cm << '\n'
       << "dwell_samples = " << cfg.dwell_samples << '\n'
       << "beam_confirm = " << cfg.beam_confirm << '\n'
       << "fps = " << cfg.fps << '\n'
       << "pre_roll_ms = " << cfg.pre_roll_ms << '\n'
       << "post_roll_ms = " << cfg.post_roll_ms << '\n'
       << "ring_capacity = " << cfg.ring_capacity << '\n'
       << "loss_p = " << cfg.loss_p << '\n'
       << "base_latency_ms = " << cfg.base_latency_ms << '\n'
       << "jitter_ms = " << cfg.jitter_ms << '\n'
       << "timeout_ms = " << cfg.timeout_ms << '\n'
       << "max_retries = " << cfg.max_retries << '\n'
       << "owner = " << cfg.recipients.owner << '\n';
    os << "authorities = ";
    for (std::size_t i = 0; i < cfg.recipients.authorities.size(); ++i) {
        if (i) os << ", ";
        os << cfg.recipients.authorities[i];
    }
    os << '\n';
    return os.str();
}

}  // namespace idart::scenario
