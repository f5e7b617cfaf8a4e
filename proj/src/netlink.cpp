#include "idart/netlink.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

#include "idart/bytes.hpp"

namespace idart::netlink {

Frame make_data(NodeId src, NodeId dst, std::uint8_t seq, std::span<const std::uint8_t> payload) {
    if (payload.size() > kMaxPayload) throw std::invalid_argument("payload exceeds 64 bytes");
    return Frame{kProtocolVersion, FrameType::Data, src, dst, seq,
                 std::vector<std::uint8_t>(payload.begin(), payload.end()), 0};
}

Frame make_ack(NodeId src, NodeId dst, std::uint8_t seq) {
    return Frame{kProtocolVersion, FrameType::Ack, src, dst, seq, {}, 0};
}

std::uint16_t crc16(std::span<const std::uint8_t> bytes) {
    std::uint16_t crc = 0xFFFF;
    for (const std::uint8_t byte : bytes) {
        crc ^= static_cast<std::uint16_t>(byte << 8);
        for (int bit = 0; bit < 8; ++bit)
            crc = static_cast<std::uint16_t>(crc & 0x8000 ? crc << 1 ^ 0x1021 : crc << 1);
    }
    return crc;
}

std::vector<std::uint8_t> encode_frame(const Frame& frame) {
    if (frame.payload.size() > kMaxPayload) throw std::invalid_argument("payload exceeds 64 bytes");
    std::vector<std::uint8_t> out;
    out.reserve(kFrameOverhead + frame.payload.size());
    put_u8(out, kSyncByte);
    put_u8(out, frame.version);
    put_u8(out, static_cast<std::uint8_t>(frame.type));
    put_u16be(out, frame.src);
    put_u16be(out, frame.dst);
    put_u8(out, frame.seq);
    put_u8(out, static_cast<std::uint8_t>(frame.payload.size()));
    out.insert(out.end(), frame.payload.begin(), frame.payload.end());
    const std::uint16_t crc = crc16(std::span(out).subspan(1));  // sync excluded
    put_u16be(out, crc);
    return out;
}

const char* to_string(DecodeError error) {
    switch (error) {
        case DecodeError::BadSync: return "bad_sync";
        case DecodeError::BadLength: return "bad_length";
        case DecodeError::BadCrc: return "bad_crc";
    }
    return "?";
}

std::variant<Frame, DecodeError> decode_frame(std::span<const std::uint8_t> bytes) {
    if (bytes.empty()) return DecodeError::BadLength;
    if (bytes[0] != kSyncByte) return DecodeError::BadSync;
    if (bytes.size() < kFrameOverhead) return DecodeError::BadLength;
    const std::size_t payload_len = bytes[8];
    if (payload_len > kMaxPayload || bytes.size() != kFrameOverhead + payload_len)
        return DecodeError::BadLength;
    const std::uint16_t wire_crc = get_u16be(bytes, 9 + payload_len);
    if (crc16(bytes.subspan(1, 8 + payload_len)) != wire_crc) return DecodeError::BadCrc;

    Frame frame;
    frame.version = bytes[1];
    frame.type = static_cast<FrameType>(bytes[2]);
    frame.src = get_u16be(bytes, 3);
    frame.dst = get_u16be(bytes, 5);
    frame.seq = bytes[7];
    frame.payload.assign(bytes.begin() + 9, bytes.begin() + 9 + static_cast<std::ptrdiff_t>(payload_len));
    frame.crc = wire_crc;
    return frame;
}

std::uint64_t loss_threshold_from_probability(double p) {
    if (p <= 0.0) return 0;
    if (p >= 1.0) return UINT64_MAX;
    const double scaled = p * 18446744073709551616.0;  // 2^64
    if (scaled >= 18446744073709551616.0) return UINT64_MAX;
    return static_cast<std::uint64_t>(scaled);
}

std::optional<Instant> ChannelModel::transmit(std::span<const std::uint8_t> bytes, Instant t_send) {
    (void)bytes;  // loss and latency are size-independent in this model
    if (rng_.next() < cfg_.loss_threshold) return std::nullopt;
    const Instant jitter = cfg_.jitter_ms > 0 ? rng_.uniform(0, cfg_.jitter_ms) : 0;
    return t_send + cfg_.base_latency_ms + jitter;
}

SendStatus ArqEndpoint::send(NodeId dst, std::span<const std::uint8_t> payload, Instant t) {
    if (pending_) return SendStatus::Busy;
    Frame frame = make_data(node_, dst, next_seq_, payload);
    ++next_seq_;  // u8 wraparound intended
    outbox_.push_back(frame);
    pending_ = InFlight{std::move(frame), cfg_.max_retries, t + cfg_.timeout_ms};
    return SendStatus::Accepted;
}

PollResult ArqEndpoint::poll(Instant t) {
    if (!pending_ || t < pending_->timeout_at) return PollResult::None;
    if (pending_->retries_left == 0) {
        pending_.reset();
        return PollResult::DeliveryFailed;
    }
    --pending_->retries_left;
    pending_->timeout_at = t + cfg_.timeout_ms;
    outbox_.push_back(pending_->frame);
    return PollResult::Retransmit;
}

RxResult ArqEndpoint::on_frame(const Frame& frame, Instant t) {
    (void)t;
    if (frame.type == FrameType::Data) {
        outbox_.push_back(make_ack(node_, frame.src, frame.seq));  // ACK even duplicates
        const auto it = last_delivered_.find(frame.src);
        if (it != last_delivered_.end() && it->second == frame.seq)
            return RxResult{RxResult::Kind::Duplicate, {}};
        last_delivered_[frame.src] = frame.seq;
        return RxResult{RxResult::Kind::DeliverPayload, frame.payload};
    }
    // ACK
    if (pending_ && frame.seq == pending_->frame.seq) {
        pending_.reset();
        return RxResult{RxResult::Kind::AckOnly, {}};
    }
    return RxResult{RxResult::Kind::Ignored, {}};
}

std::vector<Frame> ArqEndpoint::take_outbox() {
    return std::exchange(outbox_, {});
}

std::optional<std::uint8_t> ArqEndpoint::pending_seq() const {
    if (!pending_) return std::nullopt;
    return pending_->frame.seq;
}

std::optional<Instant> ArqEndpoint::timeout_at() const {
    if (!pending_) return std::nullopt;
    return pending_->timeout_at;
}

}  // namespace idart::netlink
