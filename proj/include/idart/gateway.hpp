#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <variant>
#include <vector>

#include "idart/types.hpp"

namespace idart::gateway {

enum class AlertKind : std::uint8_t { Presence = 0x01, BreakIn = 0x02 };

const char* to_string(AlertKind kind);  // "PRESENCE" / "BREAKIN"

// Semantic alert as it crosses the link. clip_id 0 means no clip.
struct AlertMessage {
    AlertKind kind = AlertKind::Presence;
    NodeId node = 0;
    std::uint64_t t_origin = 0;  // ms, node-side event time
    std::uint32_t clip_id = 0;
    std::uint8_t seq = 0;  // link seq, audit only
};

inline constexpr std::size_t kAlertPayloadSize = 15;

// Payload layout, big-endian: kind u8 | node u16 | t_origin u64 | clip_id u32.
std::vector<std::uint8_t> encode_alert_payload(const AlertMessage& alert);

enum class AlertParseError : std::uint8_t { MalformedAlert, UnknownKind };

// link_seq is carried into the resulting AlertMessage for audit.
std::variant<AlertMessage, AlertParseError> parse_alert_payload(std::span<const std::uint8_t> bytes,
                                                                std::uint8_t link_seq = 0);

enum class Channel : std::uint8_t { Email, Sms };

struct NotificationRecord {
    std::string recipient;
    Channel channel = Channel::Email;
    std::string subject;
    std::string body;
    std::optional<std::string> attachment_path;  // Email only; Sms never attaches
    Instant t_dispatched = 0;
    std::string filename;  // outbox artifact name
};

struct RecipientConfig {
    std::string owner = "owner@example.com";
    std::vector<std::string> authorities = {"police@example.com"};
};

struct JournalRecord {
    Instant t = 0;
    std::string event;
    NodeId node = 0;
    std::uint32_t seq = 0;
    std::uint32_t clip_id = 0;
    std::string detail;
};

// Append-only JSON-lines log, one object per record with fixed key order
// t, event, node, seq, clip_id, detail. Byte-identical across identical runs.
class Journal {
public:
    explicit Journal(std::filesystem::path path);

    void append(Instant t, std::string_view event, NodeId node, std::uint32_t seq,
                std::uint32_t clip_id, std::string_view detail);

    const std::vector<JournalRecord>& records() const { return records_; }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
    std::ofstream out_;
    std::vector<JournalRecord> records_;
};

// Maps clip ids to the files the recorder wrote.
class ClipStore {
public:
    void put(std::uint32_t clip_id, std::filesystem::path path);
    std::optional<std::filesystem::path> find(std::uint32_t clip_id) const;

private:
    std::map<std::uint32_t, std::filesystem::path> paths_;
};

// "iDART ALERT: <KIND> node <hex4>"
std::string subject_for(const AlertMessage& alert);

// Address -> filename-safe slug (non-alphanumerics become '_').
std::string slugify(std::string_view address);

// Stem shared by the .msg and its .clip copy: <t>_<node-hex4>_<seq>_<slug>.
std::string outbox_stem(const AlertMessage& alert, std::string_view recipient);

// A transport turns an alert into an on-disk notification artifact.
class Transport {
public:
    virtual ~Transport() = default;
    virtual NotificationRecord deliver(const AlertMessage& alert, const std::string& recipient,
                                       const std::optional<std::filesystem::path>& clip_path,
                                       Instant t_dispatch) = 0;
};

// Writes `<stem>.msg` (headers, blank line, body) and copies the clip
// beside it as `<stem>.clip` when one is attached.
class EmailTransport : public Transport {
public:
    explicit EmailTransport(std::filesystem::path outbox_dir);
    NotificationRecord deliver(const AlertMessage& alert, const std::string& recipient,
                               const std::optional<std::filesystem::path>& clip_path,
                               Instant t_dispatch) override;

private:
    std::filesystem::path outbox_;
};

// Text-message stub: `<stem>.sms` holding the body only, never an attachment.
class SmsTransport : public Transport {
public:
    explicit SmsTransport(std::filesystem::path outbox_dir);
    NotificationRecord deliver(const AlertMessage& alert, const std::string& recipient,
                               const std::optional<std::filesystem::path>& clip_path,
                               Instant t_dispatch) override;

private:
    std::filesystem::path outbox_;
};

struct IngestResult {
    enum class Kind : std::uint8_t { Dispatched, Duplicate, Error };
    Kind kind = Kind::Error;
    int notifications = 0;
};

// Central receiver: parses alert payloads, dedups on (node, kind, t_origin),
// journals every event and fans notifications out to the recipients.
class Gateway {
public:
    Gateway(RecipientConfig recipients, std::filesystem::path outbox_dir, Journal& journal,
            const ClipStore& clips, std::unique_ptr<Transport> transport = nullptr);

    IngestResult ingest(std::span<const std::uint8_t> payload, Instant t, std::uint8_t link_seq = 0);

    // BreakIn -> owner and every authority; Presence -> owner with the clip
    // attached when it can be resolved. Caller guarantees the alert is fresh.
    std::vector<NotificationRecord> dispatch(const AlertMessage& alert, Instant t);

    const std::vector<NotificationRecord>& notifications() const { return sent_; }
    const std::filesystem::path& outbox_dir() const { return outbox_; }
    int parse_errors() const { return parse_errors_; }

private:
    RecipientConfig recipients_;
    std::filesystem::path outbox_;
    Journal& journal_;
    const ClipStore& clips_;
    std::unique_ptr<Transport> transport_;
    std::set<std::tuple<NodeId, std::uint8_t, std::uint64_t>> seen_;
    std::vector<NotificationRecord> sent_;
    int parse_errors_ = 0;
};

}  // namespace idart::gateway
