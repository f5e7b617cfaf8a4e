#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "idart/types.hpp"

namespace idart::recorder {

class RecorderError : public std::runtime_error {
public:
    enum class Code {
        OutOfOrderFrame,
        EmptyClip,
        BadMagic,
        BadVersion,
        BadPayloadLen,
        Truncated,
        Io,
    };

    RecorderError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
    Code code() const { return code_; }

private:
    Code code_;
};

struct CameraFrame {
    Instant t = 0;
    std::uint32_t index = 0;  // capture counter; not persisted in the container
    std::array<std::uint8_t, 8> payload{};

    friend bool operator==(const CameraFrame& a, const CameraFrame& b) {
        return a.t == b.t && a.payload == b.payload;
    }
};

// Synthetic footage: the payload is reproducible from (node, index) alone.
CameraFrame make_frame(NodeId node, std::uint32_t index, Instant t);

// Pre-roll buffer holding the most recent frames, time-ordered.
class FrameRing {
public:
    explicit FrameRing(std::size_t capacity = 150, std::uint8_t fps = 10);

    // Throws RecorderError(OutOfOrderFrame) if frame.t < the newest frame.
    void push(const CameraFrame& frame);

    std::size_t size() const { return frames_.size(); }
    bool empty() const { return frames_.empty(); }
    std::size_t capacity() const { return capacity_; }
    std::uint8_t fps() const { return fps_; }
    const std::deque<CameraFrame>& frames() const { return frames_; }

private:
    std::size_t capacity_;
    std::uint8_t fps_;
    std::deque<CameraFrame> frames_;
};

struct VideoClip {
    NodeId node = 0;
    std::uint32_t clip_id = 0;
    std::uint8_t fps = 10;
    std::vector<CameraFrame> frames;

    // Span derived from the frames: [first frame, last frame + one period).
    Instant t_start() const;
    Instant t_end() const;
    Instant duration_ms() const { return t_end() - t_start(); }

    friend bool operator==(const VideoClip& a, const VideoClip& b) {
        return a.node == b.node && a.clip_id == b.clip_id && a.fps == b.fps && a.frames == b.frames;
    }
};

// Snapshot of the ring around a trigger: frames with
// t in [t_trigger - pre_roll, t_trigger + post_roll). The pre-roll is
// truncated when the ring does not reach back that far.
// Throws RecorderError(EmptyClip) when nothing falls in the window.
VideoClip extract_clip(const FrameRing& ring, NodeId node, std::uint32_t clip_id, Instant t_trigger,
                       Instant pre_roll_ms = 2000, Instant post_roll_ms = 5000);

// Clip container, all integers big-endian:
//   magic "IDVC" | version u8 = 1 | node u16 | clip_id u32 | fps u8 |
//   frame_count u32 | per frame: t u64 | payload_len u32 | payload bytes.
std::vector<std::uint8_t> encode_clip(const VideoClip& clip);
VideoClip decode_clip(std::span<const std::uint8_t> bytes);

// Returns total bytes written. Rejects empty clips.
std::size_t write_clip(const VideoClip& clip, const std::filesystem::path& path);
VideoClip read_clip(const std::filesystem::path& path);

}  // namespace idart::recorder
