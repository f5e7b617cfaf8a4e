#include "idart/guard.hpp"

#include <algorithm>
#include <stdexcept>

namespace idart::guard {

void normalize(AlarmState& state, Instant t) {
    if (state.mode == AlarmMode::LockedOut && t >= state.lockout_until) {
        state.mode = state.prior;
        state.lockout_until = 0;
    }
}

bool detection_active(const AlarmState& state) {
    return state.mode != AlarmMode::Disarmed;
}

void validate(const GuardConfig& cfg) {
    if (cfg.pin.size() < 4 || cfg.pin.size() > 8)
        throw std::invalid_argument("pin must be 4-8 digits");
    if (!std::all_of(cfg.pin.begin(), cfg.pin.end(), [](char c) { return c >= '0' && c <= '9'; }))
        throw std::invalid_argument("pin must be digits only");
    if (cfg.max_fails < 1) throw std::invalid_argument("max_fails must be >= 1");
    if (cfg.lockout_ms <= 0) throw std::invalid_argument("lockout_ms must be positive");
    if (cfg.grace_ms <= 0) throw std::invalid_argument("grace_ms must be positive");
}

const char* to_string(KeyOutcome outcome) {
    switch (outcome) {
        case KeyOutcome::Pending: return "pending";
        case KeyOutcome::Accepted: return "accepted";
        case KeyOutcome::Rejected: return "rejected";
        case KeyOutcome::LockedOut: return "locked_out";
    }
    return "?";
}

KeyOutcome submit_key(PinPad& pad, AlarmState& state, const GuardConfig& cfg, const KeyEvent& key) {
    if (!sensing::is_valid_key(key.key)) throw std::invalid_argument("key outside keypad alphabet");
    normalize(state, key.t);
    if (state.mode == AlarmMode::LockedOut) return KeyOutcome::LockedOut;  // keys ignored until expiry

    if (key.key >= '0' && key.key <= '9') {
        if (pad.buffer.size() >= 8) {
            pad.buffer.clear();
            return KeyOutcome::Rejected;
        }
        pad.buffer.push_back(key.key);
        return KeyOutcome::Pending;
    }
    if (key.key == '*') {
        pad.buffer.clear();
        return KeyOutcome::Pending;
    }
    // '#': confirm
    const bool match = pad.buffer == cfg.pin;
    pad.buffer.clear();
    if (match) {
        state.mode = state.mode == AlarmMode::Armed ? AlarmMode::Disarmed : AlarmMode::Armed;
        pad.fail_count = 0;
        return KeyOutcome::Accepted;
    }
    if (++pad.fail_count >= cfg.max_fails) {
        state.prior = state.mode;
        state.mode = AlarmMode::LockedOut;
        state.lockout_until = key.t + cfg.lockout_ms;
        pad.fail_count = 0;
        return KeyOutcome::LockedOut;
    }
    return KeyOutcome::Rejected;
}

GuardNode::GuardNode(NodeId node, GuardConfig cfg) : node_(node), cfg_(std::move(cfg)) {
    validate(cfg_);
}

KeyOutcome GuardNode::submit_key(const KeyEvent& key) {
    return guard::submit_key(pad_, state_, cfg_, key);
}

std::optional<BreakInAlert> GuardNode::on_beam_transition(const BeamTransition& transition) {
    normalize(state_, transition.t);
    if (transition.state != BeamState::Broken) return std::nullopt;  // restore is not an intrusion
    if (!detection_active(state_)) return std::nullopt;
    return BreakInAlert{node_, transition.t, next_alert_seq_++};
}

std::optional<RecordCommand> GuardNode::on_presence(const PresenceEvent& event) {
    normalize(state_, event.t_detect);
    if (!detection_active(state_)) return std::nullopt;
    if (pending_) return std::nullopt;  // absorbed while one is pending
    const std::uint32_t clip_id =
        static_cast<std::uint32_t>(node_) << 16 | static_cast<std::uint32_t>(next_clip_++);
    pending_ = RecordCommand{node_, event.t_detect, clip_id, event.t_detect + cfg_.grace_ms};
    return pending_;
}

TickDecision GuardNode::tick(Instant t) {
    if (!pending_) return {};
    normalize(state_, t);
    if (state_.mode == AlarmMode::Disarmed) {
        TickDecision decision{TickDecision::Kind::Suppress, pending_->clip_id};
        pending_.reset();
        return decision;
    }
    if (t >= pending_->escalate_deadline) {
        TickDecision decision{TickDecision::Kind::Escalate, pending_->clip_id};
        pending_.reset();
        return decision;
    }
    return {};
}

}  // namespace idart::guard
