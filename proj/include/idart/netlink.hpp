#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "idart/prng.hpp"
#include "idart/types.hpp"

namespace idart::netlink {

inline constexpr std::uint8_t kSyncByte = 0x7E;
inline constexpr std::uint8_t kProtocolVersion = 1;
inline constexpr std::size_t kMaxPayload = 64;
inline constexpr std::size_t kFrameOverhead = 11;  // sync..len header + crc

enum class FrameType : std::uint8_t { Data = 0x00, Ack = 0x01 };

struct Frame {
    std::uint8_t version = kProtocolVersion;
    FrameType type = FrameType::Data;
    NodeId src = 0;
    NodeId dst = 0;
    std::uint8_t seq = 0;
    std::vector<std::uint8_t> payload;  // at most kMaxPayload bytes
    std::uint16_t crc = 0;              // wire checksum; filled in by the codec
};

Frame make_data(NodeId src, NodeId dst, std::uint8_t seq, std::span<const std::uint8_t> payload);
Frame make_ack(NodeId src, NodeId dst, std::uint8_t seq);

// CRC-16/CCITT-FALSE: poly 0x1021, init 0xFFFF, no reflection, xorout 0.
std::uint16_t crc16(std::span<const std::uint8_t> bytes);

// Wire layout, big-endian:
//   offset 0   sync 0x7E
//          1   version
//          2   frame type
//          3-4 src
//          5-6 dst
//          7   seq
//          8   payload length
//          9.. payload
//     last 2   crc over offsets 1 .. 8+len
// Throws std::invalid_argument on oversize payload.
std::vector<std::uint8_t> encode_frame(const Frame& frame);

enum class DecodeError : std::uint8_t { BadSync, BadLength, BadCrc };

const char* to_string(DecodeError error);

std::variant<Frame, DecodeError> decode_frame(std::span<const std::uint8_t> bytes);

struct ChannelConfig {
    std::uint64_t loss_threshold = 0;  // drop when a raw u64 draw falls below this
    Instant base_latency_ms = 20;
    Instant jitter_ms = 10;
    std::uint64_t seed = 0;
};

// floor(p * 2^64), saturated. Loss is decided on raw integer draws so runs
// replay identically everywhere.
std::uint64_t loss_threshold_from_probability(double p);

// Seeded lossy wireless hop. One generator, consumed in transmit order:
// one draw decides loss, a second (delivered only) draws the jitter.
class ChannelModel {
public:
    explicit ChannelModel(ChannelConfig cfg) : cfg_(cfg), rng_(cfg.seed) {}

    // nullopt = dropped, otherwise the arrival instant.
    std::optional<Instant> transmit(std::span<const std::uint8_t> bytes, Instant t_send);

    const ChannelConfig& config() const { return cfg_; }

private:
    ChannelConfig cfg_;
    SplitMix64 rng_;
};

struct ArqConfig {
    Instant timeout_ms = 100;
    int max_retries = 5;
};

enum class SendStatus : std::uint8_t { Accepted, Busy };
enum class PollResult : std::uint8_t { None, Retransmit, DeliveryFailed };

struct RxResult {
    enum class Kind : std::uint8_t { DeliverPayload, AckOnly, Duplicate, Ignored };
    Kind kind = Kind::Ignored;
    std::vector<std::uint8_t> payload;  // set for DeliverPayload
};

// Stop-and-wait endpoint: at most one DATA frame in flight, 8-bit seq,
// per-peer duplicate suppression on the receive side. Frames to put on the
// wire accumulate in an outbox the caller drains after every call.
class ArqEndpoint {
public:
    ArqEndpoint(NodeId node, ArqConfig cfg) : node_(node), cfg_(cfg) {}

    // Busy while a frame is unacknowledged; the caller queues.
    SendStatus send(NodeId dst, std::span<const std::uint8_t> payload, Instant t);

    // Drives timeouts: retransmits until retries are exhausted, then
    // reports DeliveryFailed and clears the pending frame.
    PollResult poll(Instant t);

    // DATA: ACK is always (re)sent; the payload is delivered at most once
    // per (peer, seq). ACK: clears the matching in-flight frame, anything
    // else is Ignored.
    RxResult on_frame(const Frame& frame, Instant t);

    std::vector<Frame> take_outbox();

    bool in_flight() const { return pending_.has_value(); }
    std::optional<std::uint8_t> pending_seq() const;
    std::optional<Instant> timeout_at() const;
    std::uint8_t next_seq() const { return next_seq_; }
    NodeId node() const { return node_; }

private:
    struct InFlight {
        Frame frame;
        int retries_left = 0;
        Instant timeout_at = 0;
    };

    NodeId node_;
    ArqConfig cfg_;
    std::uint8_t next_seq_ = 0;
    std::optional<InFlight> pending_;
    std::map<NodeId, std::uint8_t> last_delivered_;  // per-peer last DATA seq
    std::vector<Frame> outbox_;
};

}  // namespace idart::netlink
