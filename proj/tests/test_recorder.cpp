#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <functional>

#include "idart/prng.hpp"
#include "idart/recorder.hpp"

using namespace idart;
using namespace idart::recorder;

namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
    const auto dir = fs::path("idart_test_out") / "recorder";
    fs::create_directories(dir);
    return dir / name;
}

// Ring filled with frames at the given fps, ending at t_last.
FrameRing full_ring(NodeId node, Instant t_last, std::size_t capacity = 150, std::uint8_t fps = 10) {
    FrameRing ring(capacity, fps);
    const Instant period = 1000 / fps;
    const Instant t_first = t_last - static_cast<Instant>(capacity - 1) * period;
    std::uint32_t index = 0;
    for (Instant t = t_first; t <= t_last; t += period) ring.push(make_frame(node, index++, t));
    return ring;
}

RecorderError::Code code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const RecorderError& error) {
        return error.code();
    }
    FAIL("expected a RecorderError");
    return RecorderError::Code::Io;
}

}  // namespace

TEST_CASE("frame payloads derive from (node, index)") {
    // Frozen from the independent generator with state (1 << 32): first
    // output 0xC42C5A1AA3820138, big-endian bytes.
    const auto frame = make_frame(1, 0, 500);
    const std::array<std::uint8_t, 8> expected{0xC4, 0x2C, 0x5A, 0x1A, 0xA3, 0x82, 0x01, 0x38};
    CHECK(frame.payload == expected);
    CHECK(frame.t == 500);

    // reproducible, and distinct across indices and nodes
    CHECK(make_frame(1, 0, 999).payload == expected);
    CHECK(make_frame(1, 1, 500).payload != expected);
    CHECK(make_frame(2, 0, 500).payload != expected);
}

TEST_CASE("ring keeps the newest frames and rejects time going backwards") {
    FrameRing ring(150, 10);
    ring.push(make_frame(1, 0, 0));
    CHECK(ring.size() == 1);

    for (std::uint32_t i = 1; i <= 150; ++i) ring.push(make_frame(1, i, i * 100));
    CHECK(ring.size() == 150);
    CHECK(ring.frames().front().t == 100);  // oldest evicted

    CHECK(code_of([&] { ring.push(make_frame(1, 200, 10)); }) ==
          RecorderError::Code::OutOfOrderFrame);
    CHECK(ring.size() == 150);
}

TEST_CASE("extract_clip takes the window around the trigger") {
    // Ring covers [10100, 25000]; defaults give [18000, 25000) = 70 frames.
    const auto ring = full_ring(1, 25000);
    const auto clip = extract_clip(ring, 1, 42, 20000);

    // independent count of frames inside the window
    std::size_t expected = 0;
    for (const auto& frame : ring.frames())
        if (frame.t >= 18000 && frame.t < 25000) ++expected;

    CHECK(clip.frames.size() == 70);
    CHECK(clip.frames.size() == expected);
    CHECK(clip.t_start() == 18000);
    CHECK(clip.t_end() == 25000);
    CHECK(clip.duration_ms() == 7000);
    CHECK(clip.node == 1);
    CHECK(clip.clip_id == 42);
}

TEST_CASE("extract_clip truncates the pre-roll when the ring is young") {
    FrameRing ring(150, 10);
    std::uint32_t index = 0;
    for (Instant t = 0; t <= 6000; t += 100) ring.push(make_frame(1, index++, t));

    const auto clip = extract_clip(ring, 1, 7, 1000);
    CHECK(clip.t_start() == 0);
    CHECK(clip.t_end() == 6000);
    CHECK(clip.duration_ms() == 6000);
    CHECK(clip.frames.size() == 60);
}

TEST_CASE("extract_clip on an empty ring is an error") {
    FrameRing ring(150, 10);
    CHECK(code_of([&] { extract_clip(ring, 1, 1, 1000); }) == RecorderError::Code::EmptyClip);
}

TEST_CASE("clip duration never exceeds the configured rolls") {
    SplitMix64 rng(31);
    const auto ring = full_ring(1, 60000);
    for (int trial = 0; trial < 50; ++trial) {
        const Instant pre = static_cast<Instant>(rng.next() % 5000);
        const Instant post = 100 + static_cast<Instant>(rng.next() % 8000);
        const auto clip = extract_clip(ring, 1, 1, 50000, pre, post);
        CHECK(clip.duration_ms() <= pre + post);
    }
}

TEST_CASE("one-frame clip container is exactly 36 bytes") {
    VideoClip clip{5, 9, 10, {make_frame(5, 0, 1000)}};
    const auto path = temp_file("one_frame.clip");
    // 16 header bytes plus 8 + 4 + 8 for the single frame record
    CHECK(write_clip(clip, path) == 36);
    CHECK(fs::file_size(path) == 36);
}

TEST_CASE("write then read gives back the same clip") {
    const auto ring = full_ring(3, 25000);
    const auto clip = extract_clip(ring, 3, 11, 20000);
    const auto path = temp_file("roundtrip.clip");
    write_clip(clip, path);
    const auto loaded = read_clip(path);
    CHECK(loaded == clip);
    CHECK(loaded.duration_ms() == clip.duration_ms());
}

TEST_CASE("roundtrip holds for arbitrary clip sizes") {
    SplitMix64 rng(64);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n_frames = 1 + rng.next() % 200;
        VideoClip clip;
        clip.node = static_cast<NodeId>(rng.next() % 0xFFFF);
        clip.clip_id = static_cast<std::uint32_t>(rng.next());
        clip.fps = static_cast<std::uint8_t>(1 + rng.next() % 50);
        Instant t = static_cast<Instant>(rng.next() % 100000);
        const std::uint32_t base = static_cast<std::uint32_t>(rng.next() % 1000);
        for (std::size_t i = 0; i < n_frames; ++i) {
            clip.frames.push_back(make_frame(clip.node, base + static_cast<std::uint32_t>(i), t));
            t += 20 + static_cast<Instant>(rng.next() % 200);
        }
        const auto bytes = encode_clip(clip);
        CHECK(decode_clip(bytes) == clip);

        // payloads re-derive from (node, index)
        const auto loaded = decode_clip(bytes);
        for (std::size_t i = 0; i < n_frames; ++i)
            CHECK(loaded.frames[i].payload ==
                  make_frame(clip.node, base + static_cast<std::uint32_t>(i), 0).payload);
    }
}

TEST_CASE("zero-frame clips are rejected") {
    VideoClip clip{1, 1, 10, {}};
    CHECK(code_of([&] { write_clip(clip, temp_file("empty.clip")); }) ==
          RecorderError::Code::EmptyClip);
}

TEST_CASE("reader distinguishes bad magic, bad version and truncation") {
    VideoClip clip{5, 9, 10, {make_frame(5, 0, 1000), make_frame(5, 1, 1100)}};
    auto bytes = encode_clip(clip);

    auto mutated = bytes;
    mutated[0] = 'X';
    mutated[1] = 'X';
    CHECK(code_of([&] { decode_clip(mutated); }) == RecorderError::Code::BadMagic);

    mutated = bytes;
    mutated[4] = 9;
    CHECK(code_of([&] { decode_clip(mutated); }) == RecorderError::Code::BadVersion);

    mutated.assign(bytes.begin(), bytes.end() - 5);  // cut mid-frame
    CHECK(code_of([&] { decode_clip(mutated); }) == RecorderError::Code::Truncated);

    mutated = bytes;
    mutated.push_back(0);  // trailing junk
    CHECK(code_of([&] { decode_clip(mutated); }) == RecorderError::Code::Truncated);

    const auto path = temp_file("truncated.clip");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size() - 3));
    out.close();
    CHECK(code_of([&] { read_clip(path); }) == RecorderError::Code::Truncated);
}
