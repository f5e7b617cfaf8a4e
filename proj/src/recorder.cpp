#include "idart/recorder.hpp"

#include <cstdio>
#include <fstream>

#include "idart/bytes.hpp"
#include "idart/prng.hpp"

namespace idart::recorder {

namespace {

constexpr std::uint8_t kMagic[4] = {'I', 'D', 'V', 'C'};
constexpr std::uint8_t kContainerVersion = 1;

Instant frame_period_ms(std::uint8_t fps) {
    return fps > 0 ? 1000 / fps : 0;
}

}  // namespace

CameraFrame make_frame(NodeId node, std::uint32_t index, Instant t) {
    SplitMix64 rng(static_cast<std::uint64_t>(node) << 32 | index);
    const std::uint64_t word = rng.next();
    CameraFrame frame{t, index, {}};
    for (int i = 0; i < 8; ++i)
        frame.payload[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(word >> (56 - 8 * i));
    return frame;
}

FrameRing::FrameRing(std::size_t capacity, std::uint8_t fps) : capacity_(capacity), fps_(fps) {
    if (capacity < 1) throw std::invalid_argument("ring capacity must be >= 1");
    if (fps < 1) throw std::invalid_argument("fps must be >= 1");
}

void FrameRing::push(const CameraFrame& frame) {
    if (!frames_.empty() && frame.t < frames_.back().t)
        throw RecorderError(RecorderError::Code::OutOfOrderFrame, "frame older than newest in ring");
    frames_.push_back(frame);
    if (frames_.size() > capacity_) frames_.pop_front();
}

Instant VideoClip::t_start() const {
    return frames.empty() ? 0 : frames.front().t;
}

Instant VideoClip::t_end() const {
    return frames.empty() ? 0 : frames.back().t + frame_period_ms(fps);
}

VideoClip extract_clip(const FrameRing& ring, NodeId node, std::uint32_t clip_id, Instant t_trigger,
                       Instant pre_roll_ms, Instant post_roll_ms) {
    if (ring.empty()) throw RecorderError(RecorderError::Code::EmptyClip, "ring holds no frames");
    const Instant window_start = t_trigger - pre_roll_ms;
    const Instant window_end = t_trigger + post_roll_ms;
    VideoClip clip{node, clip_id, ring.fps(), {}};
    for (const auto& frame : ring.frames())
        if (frame.t >= window_start && frame.t < window_end) clip.frames.push_back(frame);
    if (clip.frames.empty())
        throw RecorderError(RecorderError::Code::EmptyClip, "no frames in the clip window");
    return clip;
}

std::vector<std::uint8_t> encode_clip(const VideoClip& clip) {
    if (clip.frames.empty())
        throw RecorderError(RecorderError::Code::EmptyClip, "refusing to encode a zero-frame clip");
    std::vector<std::uint8_t> out;
    out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
    put_u8(out, kContainerVersion);
    put_u16be(out, clip.node);
    put_u32be(out, clip.clip_id);
    put_u8(out, clip.fps);
    put_u32be(out, static_cast<std::uint32_t>(clip.frames.size()));
    for (const auto& frame : clip.frames) {
        put_u64be(out, static_cast<std::uint64_t>(frame.t));
        put_u32be(out, static_cast<std::uint32_t>(frame.payload.size()));
        out.insert(out.end(), frame.payload.begin(), frame.payload.end());
    }
    return out;
}

VideoClip decode_clip(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 4) throw RecorderError(RecorderError::Code::BadMagic, "file shorter than magic");
    if (!std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin()))
        throw RecorderError(RecorderError::Code::BadMagic, "bad container magic");
    if (bytes.size() < 16) throw RecorderError(RecorderError::Code::Truncated, "header cut short");
    if (bytes[4] != kContainerVersion)
        throw RecorderError(RecorderError::Code::BadVersion, "unsupported container version");

    VideoClip clip;
    clip.node = get_u16be(bytes, 5);
    clip.clip_id = get_u32be(bytes, 7);
    clip.fps = bytes[11];
    const std::uint32_t frame_count = get_u32be(bytes, 12);

    std::size_t off = 16;
    clip.frames.reserve(frame_count);
    for (std::uint32_t i = 0; i < frame_count; ++i) {
        if (bytes.size() - off < 12)
            throw RecorderError(RecorderError::Code::Truncated, "file truncated mid-frame");
        CameraFrame frame;
        frame.t = static_cast<Instant>(get_u64be(bytes, off));
        frame.index = i;
        const std::uint32_t payload_len = get_u32be(bytes, off + 8);
        if (payload_len != frame.payload.size())
            throw RecorderError(RecorderError::Code::BadPayloadLen, "unexpected frame payload length");
        off += 12;
        if (bytes.size() - off < payload_len)
            throw RecorderError(RecorderError::Code::Truncated, "file truncated mid-frame");
        std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(off), payload_len,
                    frame.payload.begin());
        off += payload_len;
        clip.frames.push_back(frame);
    }
    if (off != bytes.size())
        throw RecorderError(RecorderError::Code::Truncated, "trailing bytes after last frame");
    return clip;
}

std::size_t write_clip(const VideoClip& clip, const std::filesystem::path& path) {
    const auto bytes = encode_clip(clip);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw RecorderError(RecorderError::Code::Io, "cannot open " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw RecorderError(RecorderError::Code::Io, "short write to " + path.string());
    return bytes.size();
}

VideoClip read_clip(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw RecorderError(RecorderError::Code::Io, "cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return decode_clip(bytes);
}

}  // namespace idart::recorder
