#include "idart/sensing.hpp"

#include <algorithm>
#include <stdexcept>

#include "idart/prng.hpp"

namespace idart::sensing {

bool is_valid_key(char key) {
    return (key >= '0' && key <= '9') || key == '#' || key == '*';
}

RangeSample sample_range(const SensorChannelConfig& cfg, int true_distance_cm, Instant t) {
    if (true_distance_cm < 0) throw std::invalid_argument("true distance must be non-negative");
    // Fresh generator state per sample so the reading is a pure function of
    // (seed, t) and never drifts with call order.
    SplitMix64 rng(cfg.seed + static_cast<std::uint64_t>(t));
    const int jitter = cfg.noise_jitter_cm;
    const int noise = jitter > 0 ? static_cast<int>(rng.uniform(-jitter, jitter)) : 0;
    const int clamped = std::clamp(true_distance_cm + noise, 0, cfg.max_range_cm);
    return RangeSample{t, clamped};
}

BeamDebouncer::BeamDebouncer(int n_confirm) : n_confirm_(n_confirm) {
    if (n_confirm < 1) throw std::invalid_argument("n_confirm must be >= 1");
}

std::optional<BeamTransition> BeamDebouncer::feed(const BeamSample& sample) {
    if (!confirmed_) {
        confirmed_ = sample.state;  // first sample seeds the confirmed state
        return std::nullopt;
    }
    if (sample.state == *confirmed_) {
        run_ = 0;
        return std::nullopt;
    }
    if (++run_ < n_confirm_) return std::nullopt;
    confirmed_ = sample.state;
    run_ = 0;
    return BeamTransition{sample.t, sample.state};
}

std::vector<BeamTransition> debounce_beam(std::span<const BeamSample> samples, int n_confirm) {
    BeamDebouncer debouncer(n_confirm);
    std::vector<BeamTransition> out;
    for (const auto& sample : samples)
        if (auto transition = debouncer.feed(sample)) out.push_back(*transition);
    return out;
}

PresenceDetector::PresenceDetector(int enter_cm, int exit_cm, int dwell_samples)
    : enter_cm_(enter_cm), exit_cm_(exit_cm), dwell_(dwell_samples) {
    if (exit_cm <= enter_cm) throw std::invalid_argument("exit threshold must exceed enter threshold");
    if (dwell_samples < 1) throw std::invalid_argument("dwell_samples must be >= 1");
}

std::optional<PresenceEvent> PresenceDetector::feed(const RangeSample& sample) {
    if (armed_) {
        if (sample.distance_cm < enter_cm_) {
            if (below_run_ == 0) {
                t_first_below_ = sample.t;
                min_distance_ = sample.distance_cm;
            } else {
                min_distance_ = std::min(min_distance_, sample.distance_cm);
            }
            if (++below_run_ == dwell_) {
                armed_ = false;
                below_run_ = 0;
                above_run_ = 0;
                return PresenceEvent{sample.t, t_first_below_, min_distance_};
            }
        } else {
            below_run_ = 0;
        }
        return std::nullopt;
    }
    // re-arm hysteresis: dwell consecutive samples clear of the exit threshold
    if (sample.distance_cm > exit_cm_) {
        if (++above_run_ == dwell_) {
            armed_ = true;
            above_run_ = 0;
            below_run_ = 0;
        }
    } else {
        above_run_ = 0;
    }
    return std::nullopt;
}

std::vector<PresenceEvent> detect_presence(std::span<const RangeSample> samples, int enter_cm,
                                           int exit_cm, int dwell_samples) {
    PresenceDetector detector(enter_cm, exit_cm, dwell_samples);
    std::vector<PresenceEvent> out;
    for (const auto& sample : samples)
        if (auto event = detector.feed(sample)) out.push_back(*event);
    return out;
}

}  // namespace idart::sensing
