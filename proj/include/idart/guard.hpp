#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "idart/sensing.hpp"
#include "idart/types.hpp"

namespace idart::guard {

using sensing::BeamState;
using sensing::BeamTransition;
using sensing::KeyEvent;
using sensing::PresenceEvent;

enum class AlarmMode : std::uint8_t { Armed, Disarmed, LockedOut };

struct AlarmState {
    AlarmMode mode = AlarmMode::Armed;
    Instant lockout_until = 0;           // meaningful while LockedOut
    AlarmMode prior = AlarmMode::Armed;  // restored when the lockout lapses
};

// Folds an expired lockout back to the prior mode.
void normalize(AlarmState& state, Instant t);

// Armed and LockedOut both keep detection live: a lockout forced by a
// guessing intruder must not blind the system.
bool detection_active(const AlarmState& state);

struct PinPad {
    std::string buffer;  // digits only, at most 8
    int fail_count = 0;
};

struct GuardConfig {
    std::string pin = "2468";  // 4-8 digits
    int max_fails = 3;
    Instant lockout_ms = 60000;
    Instant grace_ms = 30000;
};

// Throws std::invalid_argument on a bad pin or non-positive limits.
void validate(const GuardConfig& cfg);

enum class KeyOutcome : std::uint8_t { Pending, Accepted, Rejected, LockedOut };

const char* to_string(KeyOutcome outcome);

// Advances the pad/alarm pair by one key press. Digits accumulate, '*'
// clears, '#' compares against the pin and toggles Armed/Disarmed on a
// match; max_fails consecutive mismatched confirms lock the pad out.
KeyOutcome submit_key(PinPad& pad, AlarmState& state, const GuardConfig& cfg, const KeyEvent& key);

struct BreakInAlert {
    NodeId node = 0;
    Instant t = 0;
    std::uint32_t seq = 0;  // strictly increasing, gap-free per node
};

struct RecordCommand {
    NodeId node = 0;
    Instant t_trigger = 0;
    std::uint32_t clip_id = 0;
    Instant escalate_deadline = 0;  // t_trigger + grace
};

struct TickDecision {
    enum class Kind : std::uint8_t { None, Escalate, Suppress };
    Kind kind = Kind::None;
    std::uint32_t clip_id = 0;
};

// Per-node security state machine: pad + alarm mode + the pending record
// window. Single owner, advanced one event at a time.
class GuardNode {
public:
    GuardNode(NodeId node, GuardConfig cfg);

    KeyOutcome submit_key(const KeyEvent& key);

    // Beam gone Broken while detection is active -> break-in alert.
    std::optional<BreakInAlert> on_beam_transition(const BeamTransition& transition);

    // Presence while detection is active -> start a recording with an
    // escalation deadline. At most one pending command; re-triggers while
    // one is pending are absorbed.
    std::optional<RecordCommand> on_presence(const PresenceEvent& event);

    // Grace-window arbiter: a disarm before the deadline suppresses the
    // pending escalation, otherwise it fires at the deadline. Exactly one
    // of Suppress/Escalate per RecordCommand.
    TickDecision tick(Instant t);

    NodeId node() const { return node_; }
    const AlarmState& alarm() const { return state_; }
    const PinPad& pad() const { return pad_; }
    const std::optional<RecordCommand>& pending_record() const { return pending_; }

private:
    NodeId node_;
    GuardConfig cfg_;
    AlarmState state_;
    PinPad pad_;
    std::optional<RecordCommand> pending_;
    std::uint32_t next_alert_seq_ = 1;
    std::uint16_t next_clip_ = 1;
};

}  // namespace idart::guard
