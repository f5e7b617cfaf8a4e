#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "idart/types.hpp"

namespace idart::sensing {

enum class BeamState : std::uint8_t { Intact, Broken };

// One ultrasonic ranging reading.
struct RangeSample {
    Instant t = 0;
    int distance_cm = 0;
};

// One laser/LDR beam reading.
struct BeamSample {
    Instant t = 0;
    BeamState state = BeamState::Intact;
};

// One keypad press. Alphabet: digits, '#' confirm, '*' clear.
struct KeyEvent {
    Instant t = 0;
    char key = '0';
};

bool is_valid_key(char key);

// Emitted when someone has dwelt below the enter threshold long enough.
struct PresenceEvent {
    Instant t_detect = 0;       // sample that completed the dwell
    Instant t_first_below = 0;  // first sample of that consecutive run
    int min_distance_cm = 0;
};

struct SensorChannelConfig {
    int sample_period_ms = 100;
    int max_range_cm = 400;
    int noise_jitter_cm = 0;
    std::uint64_t seed = 0;
};

// Simulated ultrasonic reading: true distance plus uniform integer noise in
// [-jitter, +jitter], clamped to [0, max_range]. The noise generator state is
// derived from (seed, t) alone, so a sample never depends on how many draws
// happened before it.
RangeSample sample_range(const SensorChannelConfig& cfg, int true_distance_cm, Instant t);

struct BeamTransition {
    Instant t = 0;
    BeamState state = BeamState::Intact;
};

// Streaming debouncer for the beam input. The first sample seeds the
// confirmed state; a transition is reported at the n_confirm-th consecutive
// sample that disagrees with it.
class BeamDebouncer {
public:
    explicit BeamDebouncer(int n_confirm);
    std::optional<BeamTransition> feed(const BeamSample& sample);

private:
    int n_confirm_;
    std::optional<BeamState> confirmed_;
    int run_ = 0;
};

std::vector<BeamTransition> debounce_beam(std::span<const BeamSample> samples, int n_confirm);

// Hysteresis detector: fires on the dwell-th consecutive sample with
// distance < enter_cm, then re-arms only after dwell consecutive samples
// with distance > exit_cm.
class PresenceDetector {
public:
    PresenceDetector(int enter_cm, int exit_cm, int dwell_samples);
    std::optional<PresenceEvent> feed(const RangeSample& sample);

private:
    int enter_cm_;
    int exit_cm_;
    int dwell_;
    bool armed_ = true;
    int below_run_ = 0;
    int above_run_ = 0;
    Instant t_first_below_ = 0;
    int min_distance_ = 0;
};

std::vector<PresenceEvent> detect_presence(std::span<const RangeSample> samples, int enter_cm,
                                           int exit_cm, int dwell_samples);

}  // namespace idart::sensing
