#include "idart/gateway.hpp"

#include <cctype>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "idart/bytes.hpp"

namespace idart::gateway {

namespace {

std::string hex4(std::uint16_t v) {
    std::ostringstream os;
    os << std::hex << std::setfill('0') << std::setw(4) << v;
    return os.str();
}

std::string hex8(std::uint32_t v) {
    std::ostringstream os;
    os << std::hex << std::setfill('0') << std::setw(8) << v;
    return os.str();
}

std::string body_for(const AlertMessage& alert, bool attached) {
    std::ostringstream os;
    if (alert.kind == AlertKind::BreakIn) {
        os << "Break-in reported by node " << hex4(alert.node) << " at " << alert.t_origin << " ms.";
        if (attached) os << " Video clip " << hex8(alert.clip_id) << " attached.";
    } else {
        os << "Presence detected by node " << hex4(alert.node) << " at " << alert.t_origin << " ms.";
        if (alert.clip_id != 0)
            os << " Video clip " << hex8(alert.clip_id) << (attached ? " attached." : " unavailable.");
    }
    return os.str();
}

}  // namespace

const char* to_string(AlertKind kind) {
    return kind == AlertKind::BreakIn ? "BREAKIN" : "PRESENCE";
}

std::vector<std::uint8_t> encode_alert_payload(const AlertMessage& alert) {
    std::vector<std::uint8_t> out;
    out.reserve(kAlertPayloadSize);
    put_u8(out, static_cast<std::uint8_t>(alert.kind));
    put_u16be(out, alert.node);
    put_u64be(out, alert.t_origin);
    put_u32be(out, alert.clip_id);
    return out;
}

std::variant<AlertMessage, AlertParseError> parse_alert_payload(std::span<const std::uint8_t> bytes,
                                                                std::uint8_t link_seq) {
    if (bytes.size() != kAlertPayloadSize) return AlertParseError::MalformedAlert;
    const std::uint8_t kind = bytes[0];
    if (kind != static_cast<std::uint8_t>(AlertKind::Presence) &&
        kind != static_cast<std::uint8_t>(AlertKind::BreakIn))
        return AlertParseError::UnknownKind;
    AlertMessage alert;
    alert.kind = static_cast<AlertKind>(kind);
    alert.node = get_u16be(bytes, 1);
    alert.t_origin = get_u64be(bytes, 3);
    alert.clip_id = get_u32be(bytes, 11);
    alert.seq = link_seq;
    return alert;
}

Journal::Journal(std::filesystem::path path) : path_(std::move(path)) {
    if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
    out_.open(path_, std::ios::binary | std::ios::trunc);
    if (!out_) throw std::runtime_error("cannot open journal " + path_.string());
}

void Journal::append(Instant t, std::string_view event, NodeId node, std::uint32_t seq,
                     std::uint32_t clip_id, std::string_view detail) {
    nlohmann::ordered_json line{{"t", t},          {"event", event},     {"node", node},
                                {"seq", seq},      {"clip_id", clip_id}, {"detail", detail}};
    out_ << line.dump() << '\n';
    out_.flush();
    records_.push_back(JournalRecord{t, std::string(event), node, seq, clip_id, std::string(detail)});
}

void ClipStore::put(std::uint32_t clip_id, std::filesystem::path path) {
    paths_[clip_id] = std::move(path);
}

std::optional<std::filesystem::path> ClipStore::find(std::uint32_t clip_id) const {
    const auto it = paths_.find(clip_id);
    if (it == paths_.end()) return std::nullopt;
    return it->second;
}

std::string subject_for(const AlertMessage& alert) {
    return std::string("iDART ALERT: ") + to_string(alert.kind) + " node " + hex4(alert.node);
}

std::string slugify(std::string_view address) {
    std::string slug;
    slug.reserve(address.size());
    for (const char c : address)
        slug.push_back(std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
    return slug;
}

std::string outbox_stem(const AlertMessage& alert, std::string_view recipient) {
    std::ostringstream os;
    os << alert.t_origin << '_' << hex4(alert.node) << '_' << static_cast<unsigned>(alert.seq) << '_'
       << slugify(recipient);
    return os.str();
}

EmailTransport::EmailTransport(std::filesystem::path outbox_dir) : outbox_(std::move(outbox_dir)) {
    std::filesystem::create_directories(outbox_);
}

NotificationRecord EmailTransport::deliver(const AlertMessage& alert, const std::string& recipient,
                                           const std::optional<std::filesystem::path>& clip_path,
                                           Instant t_dispatch) {
    const std::string stem = outbox_stem(alert, recipient);
    std::string attachment_name = "-";
    std::optional<std::string> attachment_path;
    if (clip_path) {
        const auto copy_to = outbox_ / (stem + ".clip");
        std::filesystem::copy_file(*clip_path, copy_to,
                                   std::filesystem::copy_options::overwrite_existing);
        attachment_name = copy_to.filename().string();
        attachment_path = copy_to.string();
    }

    NotificationRecord record;
    record.recipient = recipient;
    record.channel = Channel::Email;
    record.subject = subject_for(alert);
    record.body = body_for(alert, clip_path.has_value());
    record.attachment_path = attachment_path;
    record.t_dispatched = t_dispatch;
    record.filename = stem + ".msg";

    std::ofstream msg(outbox_ / record.filename, std::ios::binary | std::ios::trunc);
    if (!msg) throw std::runtime_error("cannot write " + (outbox_ / record.filename).string());
    msg << "To: " << recipient << '\n'
        << "Subject: " << record.subject << '\n'
        << "Date-Ms: " << t_dispatch << '\n'
        << "Node: " << hex4(alert.node) << '\n'
        << "Kind: " << to_string(alert.kind) << '\n'
        << "Attachment: " << attachment_name << '\n'
        << '\n'
        << record.body << '\n';
    return record;
}

SmsTransport::SmsTransport(std::filesystem::path outbox_dir) : outbox_(std::move(outbox_dir)) {
    std::filesystem::create_directories(outbox_);
}

NotificationRecord SmsTransport::deliver(const AlertMessage& alert, const std::string& recipient,
                                         const std::optional<std::filesystem::path>& clip_path,
                                         Instant t_dispatch) {
    (void)clip_path;  // SMS never carries an attachment
    NotificationRecord record;
    record.recipient = recipient;
    record.channel = Channel::Sms;
    record.subject = subject_for(alert);
    record.body = body_for(alert, false);
    record.t_dispatched = t_dispatch;
    record.filename = outbox_stem(alert, recipient) + ".sms";

    std::ofstream sms(outbox_ / record.filename, std::ios::binary | std::ios::trunc);
    if (!sms) throw std::runtime_error("cannot write " + (outbox_ / record.filename).string());
    sms << record.body << '\n';
    return record;
}

Gateway::Gateway(RecipientConfig recipients, std::filesystem::path outbox_dir, Journal& journal,
                 const ClipStore& clips, std::unique_ptr<Transport> transport)
    : recipients_(std::move(recipients)),
      outbox_(std::move(outbox_dir)),
      journal_(journal),
      clips_(clips),
      transport_(std::move(transport)) {
    if (recipients_.owner.empty()) throw std::invalid_argument("owner address must be set");
    if (!transport_) transport_ = std::make_unique<EmailTransport>(outbox_);
}

IngestResult Gateway::ingest(std::span<const std::uint8_t> payload, Instant t,
                             std::uint8_t link_seq) {
    const auto parsed = parse_alert_payload(payload, link_seq);
    if (const auto* error = std::get_if<AlertParseError>(&parsed)) {
        ++parse_errors_;
        journal_.append(t, "parse_error", 0, link_seq, 0,
                        *error == AlertParseError::MalformedAlert ? "malformed_alert" : "unknown_kind");
        return IngestResult{IngestResult::Kind::Error, 0};
    }
    const auto& alert = std::get<AlertMessage>(parsed);

    // Link-level dedup already happened; this guards against replays across
    // endpoint restarts, whose link seqs start over.
    const auto key = std::make_tuple(alert.node, static_cast<std::uint8_t>(alert.kind), alert.t_origin);
    if (!seen_.insert(key).second) {
        journal_.append(t, "alert_duplicate", alert.node, link_seq, alert.clip_id,
                        to_string(alert.kind));
        return IngestResult{IngestResult::Kind::Duplicate, 0};
    }

    journal_.append(t, "alert", alert.node, link_seq, alert.clip_id, to_string(alert.kind));
    const auto records = dispatch(alert, t);
    return IngestResult{IngestResult::Kind::Dispatched, static_cast<int>(records.size())};
}

std::vector<NotificationRecord> Gateway::dispatch(const AlertMessage& alert, Instant t) {
    std::optional<std::filesystem::path> clip_path;
    if (alert.clip_id != 0) {
        clip_path = clips_.find(alert.clip_id);
        if (clip_path && !std::filesystem::exists(*clip_path)) clip_path.reset();
        if (!clip_path)
            journal_.append(t, "clip_missing", alert.node, alert.seq, alert.clip_id,
                            "dispatching without attachment");
    }

    std::vector<std::string> recipients{recipients_.owner};
    if (alert.kind == AlertKind::BreakIn)
        recipients.insert(recipients.end(), recipients_.authorities.begin(),
                          recipients_.authorities.end());

    std::vector<NotificationRecord> dispatched;
    for (const auto& recipient : recipients) {
        auto record = transport_->deliver(alert, recipient, clip_path, t);
        std::string detail = record.filename;
        if (record.attachment_path)
            detail += '|' + std::filesystem::path(*record.attachment_path).filename().string();
        journal_.append(t, record.channel == Channel::Sms ? "notify_sms" : "notify_email", alert.node,
                        alert.seq, alert.clip_id, detail);
        sent_.push_back(record);
        dispatched.push_back(std::move(record));
    }
    return dispatched;
}

}  // namespace idart::gateway
