#include <deque>
#include <iomanip>
#include <queue>
#include <sstream>
#include <variant>

#include "idart/gateway.hpp"
#include "idart/guard.hpp"
#include "idart/netlink.hpp"
#include "idart/recorder.hpp"
#include "idart/scenario.hpp"
#include "idart/sensing.hpp"

namespace idart::scenario {

namespace {

// Builtins are ordinary DSL text so they exercise the same parser as user
// scripts. Timings are configuration, not claims: approach at 2 s, PIN entry
// finishing at 10.8 s, beam break at 5 s.
constexpr std::string_view kFig1 = R"(# walk-up with no PIN: presence escalates to an owner email with clip
seed 1
duration 40
at 2.0 approach 120
)";

constexpr std::string_view kFig2 = R"(# walk-up, then the correct PIN inside the grace window: suppressed
seed 2
duration 40
at 2.0 approach 120
at 10.0 key 2
at 10.2 key 4
at 10.4 key 6
at 10.6 key 8
at 10.8 key #
)";

constexpr std::string_view kFig3 = R"(# beam break while armed: break-in emails to owner and authorities
seed 7
duration 40
at 5.0 beam broken
at 8.0 beam restored
)";

struct Event {
    enum class Kind : std::uint8_t {
        ScriptAction,
        SensorTick,
        CameraTick,
        ClipDue,
        FrameArrival,
        ArqTimeout,
    };

    Instant t = 0;
    std::uint64_t order = 0;  // FIFO tie-break at equal timestamps
    Kind kind = Kind::SensorTick;
    std::size_t action_index = 0;            // ScriptAction
    NodeId node = 0;                         // ClipDue origin / FrameArrival dst / ArqTimeout owner
    std::uint32_t clip_id = 0;               // ClipDue
    Instant t_trigger = 0;                   // ClipDue
    std::vector<std::uint8_t> frame_bytes;   // FrameArrival
};

struct EventAfter {
    bool operator()(const Event& a, const Event& b) const {
        return std::tie(a.t, a.order) > std::tie(b.t, b.order);
    }
};

std::string hex8(std::uint32_t v) {
    std::ostringstream os;
    os << std::hex << std::setfill('0') << std::setw(8) << v;
    return os.str();
}

// One door node (ultrasonic + camera + pad) and one perimeter node
// (laser/LDR + pad), both reporting to the gateway over a shared lossy
// channel. Strictly single-threaded; determinism comes from the seeded
// generators and the (time, insertion order) event queue.
class SimEngine {
public:
    SimEngine(const ScenarioScript& script, const RunConfig& cfg,
              const std::filesystem::path& out_dir)
        : script_(script),
          cfg_(cfg),
          out_dir_(out_dir),
          journal_(out_dir / "journal.jsonl"),
          channel_(netlink::ChannelConfig{netlink::loss_threshold_from_probability(cfg.loss_p),
                                          cfg.base_latency_ms, cfg.jitter_ms, script.seed + 2}),
          door_guard_(kDoorNode, cfg.guard),
          perim_guard_(kPerimeterNode, cfg.guard),
          presence_(cfg.enter_cm, cfg.exit_cm, cfg.dwell_samples),
          debouncer_(cfg.beam_confirm),
          ring_(cfg.ring_capacity, static_cast<std::uint8_t>(cfg.fps)),
          door_ep_(kDoorNode, netlink::ArqConfig{cfg.timeout_ms, cfg.max_retries}),
          perim_ep_(kPerimeterNode, netlink::ArqConfig{cfg.timeout_ms, cfg.max_retries}),
          gateway_ep_(kGatewayNode, netlink::ArqConfig{cfg.timeout_ms, cfg.max_retries}),
          gateway_(cfg.recipients, out_dir / "outbox", journal_, clips_) {
        range_cfg_ = sensing::SensorChannelConfig{cfg.sample_period_ms, cfg.max_range_cm,
                                                  cfg.noise_jitter_cm, script.seed + 1};
        actor_distance_ = cfg.max_range_cm;  // nobody near the door until the script says so
        clips_dir_ = out_dir / "clips";
        std::filesystem::create_directories(clips_dir_);
    }

    Report run() {
        for (std::size_t i = 0; i < script_.timeline.size(); ++i)
            schedule(script_.timeline[i].t, [&](Event& e) {
                e.kind = Event::Kind::ScriptAction;
                e.action_index = i;
            });
        schedule(0, [](Event& e) { e.kind = Event::Kind::SensorTick; });
        schedule(0, [](Event& e) { e.kind = Event::Kind::CameraTick; });

        while (!queue_.empty()) {
            Event event = queue_.top();
            if (event.t > script_.duration_ms) break;
            queue_.pop();
            now_ = event.t;
            handle(event);
        }
        return make_report();
    }

private:
    template <typename Fill>
    void schedule(Instant t, Fill fill) {
        Event event;
        event.t = t;
        event.order = next_order_++;
        fill(event);
        queue_.push(std::move(event));
    }

    void handle(const Event& event) {
        switch (event.kind) {
            case Event::Kind::ScriptAction: handle_action(script_.timeline[event.action_index]); break;
            case Event::Kind::SensorTick: handle_sensor_tick(); break;
            case Event::Kind::CameraTick: handle_camera_tick(); break;
            case Event::Kind::ClipDue: handle_clip_due(event); break;
            case Event::Kind::FrameArrival: handle_frame_arrival(event); break;
            case Event::Kind::ArqTimeout: handle_arq_timeout(event.node); break;
        }
    }

    void handle_action(const Action& action) {
        switch (action.kind) {
            case Action::Kind::SetActorDistance:
                actor_distance_ = action.distance_cm;
                break;
            case Action::Kind::BeamBroken:
                beam_ = sensing::BeamState::Broken;
                break;
            case Action::Kind::BeamRestored:
                beam_ = sensing::BeamState::Intact;
                break;
            case Action::Kind::Key: {
                // One physical pad; both node machines consume the same key
                // stream and stay in lockstep.
                const sensing::KeyEvent key{action.t, action.key};
                const auto outcome = door_guard_.submit_key(key);
                perim_guard_.submit_key(key);
                journal_.append(now_, "key", kDoorNode, 0, 0, guard::to_string(outcome));
                break;
            }
        }
    }

    void handle_sensor_tick() {
        // door: ultrasonic -> presence -> record window
        const auto sample = sensing::sample_range(range_cfg_, actor_distance_, now_);
        if (const auto event = presence_.feed(sample)) {
            if (!detection_latency_)
                detection_latency_ = event->t_detect - event->t_first_below;
            std::ostringstream detail;
            detail << "first_below=" << event->t_first_below << " min_cm=" << event->min_distance_cm;
            journal_.append(now_, "presence", kDoorNode, 0, 0, detail.str());
            if (const auto command = door_guard_.on_presence(*event)) {
                std::ostringstream cmd_detail;
                cmd_detail << "deadline=" << command->escalate_deadline;
                journal_.append(now_, "record", kDoorNode, 0, command->clip_id, cmd_detail.str());
                schedule(command->t_trigger + cfg_.post_roll_ms, [&](Event& e) {
                    e.kind = Event::Kind::ClipDue;
                    e.node = command->node;
                    e.clip_id = command->clip_id;
                    e.t_trigger = command->t_trigger;
                });
            }
        }
        dispatch_guard_decision(door_guard_.tick(now_), kDoorNode);

        // perimeter: beam -> debounce -> break-in
        if (const auto transition = debouncer_.feed(sensing::BeamSample{now_, beam_})) {
            journal_.append(now_, "beam", kPerimeterNode, 0, 0,
                            transition->state == sensing::BeamState::Broken ? "broken" : "intact");
            if (const auto alert = perim_guard_.on_beam_transition(*transition)) {
                journal_.append(now_, "breakin", kPerimeterNode, alert->seq, 0, "");
                send_alert(kPerimeterNode, gateway::AlertKind::BreakIn, alert->t, 0);
            }
        }
        dispatch_guard_decision(perim_guard_.tick(now_), kPerimeterNode);

        if (now_ + cfg_.sample_period_ms <= script_.duration_ms)
            schedule(now_ + cfg_.sample_period_ms, [](Event& e) { e.kind = Event::Kind::SensorTick; });
    }

    void dispatch_guard_decision(const guard::TickDecision& decision, NodeId node) {
        using Kind = guard::TickDecision::Kind;
        if (decision.kind == Kind::Suppress) {
            journal_.append(now_, "suppress", node, 0, decision.clip_id, "clip retained on disk");
        } else if (decision.kind == Kind::Escalate) {
            journal_.append(now_, "escalate", node, 0, decision.clip_id, "");
            send_alert(node, gateway::AlertKind::Presence, now_, decision.clip_id);
        }
    }

    void handle_camera_tick() {
        ring_.push(recorder::make_frame(kDoorNode, camera_index_++, now_));
        const Instant period = 1000 / cfg_.fps;
        if (now_ + period <= script_.duration_ms)
            schedule(now_ + period, [](Event& e) { e.kind = Event::Kind::CameraTick; });
    }

    void handle_clip_due(const Event& event) {
        try {
            const auto clip = recorder::extract_clip(ring_, event.node, event.clip_id,
                                                     event.t_trigger, cfg_.pre_roll_ms,
                                                     cfg_.post_roll_ms);
            const auto path = clips_dir_ / ("clip_" + hex8(event.clip_id) + ".clip");
            recorder::write_clip(clip, path);
            clips_.put(event.clip_id, path);
            ++clips_written_;
            journal_.append(now_, "clip", event.node, 0, event.clip_id, path.filename().string());
        } catch (const recorder::RecorderError& error) {
            journal_.append(now_, "clip_error", event.node, 0, event.clip_id, error.what());
        }
    }

    void send_alert(NodeId node, gateway::AlertKind kind, Instant t_origin, std::uint32_t clip_id) {
        gateway::AlertMessage alert;
        alert.kind = kind;
        alert.node = node;
        alert.t_origin = static_cast<std::uint64_t>(t_origin);
        alert.clip_id = clip_id;
        const auto payload = gateway::encode_alert_payload(alert);
        auto& endpoint = endpoint_for(node);
        if (endpoint.send(kGatewayNode, payload, now_) == netlink::SendStatus::Busy) {
            tx_queue_for(node).push_back(payload);
            journal_.append(now_, "queued", node, 0, clip_id, "link busy");
            return;
        }
        pump(endpoint);
    }

    void send_next_queued(NodeId node) {
        auto& queue = tx_queue_for(node);
        auto& endpoint = endpoint_for(node);
        if (queue.empty() || endpoint.in_flight()) return;
        const auto payload = queue.front();
        queue.pop_front();
        endpoint.send(kGatewayNode, payload, now_);
        pump(endpoint);
    }

    // Drain an endpoint's outbox onto the channel; schedule arrivals and the
    // retransmission timer.
    void pump(netlink::ArqEndpoint& endpoint) {
        for (const auto& frame : endpoint.take_outbox()) {
            const auto bytes = netlink::encode_frame(frame);
            if (const auto t_arrive = channel_.transmit(bytes, now_)) {
                schedule(*t_arrive, [&](Event& e) {
                    e.kind = Event::Kind::FrameArrival;
                    e.node = frame.dst;
                    e.frame_bytes = bytes;
                });
            } else {
                journal_.append(now_, "link_drop", frame.src, frame.seq, 0,
                                frame.type == netlink::FrameType::Ack ? "ack" : "data");
            }
        }
        if (endpoint.in_flight())
            schedule(*endpoint.timeout_at(), [&](Event& e) {
                e.kind = Event::Kind::ArqTimeout;
                e.node = endpoint.node();
            });
    }

    void handle_arq_timeout(NodeId node) {
        auto& endpoint = endpoint_for(node);
        const auto pending_seq = endpoint.pending_seq();
        switch (endpoint.poll(now_)) {
            case netlink::PollResult::None:
                break;  // stale timer; the frame was acknowledged or replaced
            case netlink::PollResult::Retransmit:
                journal_.append(now_, "retransmit", node, pending_seq.value_or(0), 0, "");
                pump(endpoint);
                break;
            case netlink::PollResult::DeliveryFailed:
                journal_.append(now_, "delivery_failed", node, pending_seq.value_or(0), 0,
                                "retries exhausted");
                send_next_queued(node);
                break;
        }
    }

    void handle_frame_arrival(const Event& event) {
        const auto decoded = netlink::decode_frame(event.frame_bytes);
        if (const auto* error = std::get_if<netlink::DecodeError>(&decoded)) {
            journal_.append(now_, "decode_error", event.node, 0, 0, netlink::to_string(*error));
            return;
        }
        const auto& frame = std::get<netlink::Frame>(decoded);

        if (event.node == kGatewayNode) {
            const auto rx = gateway_ep_.on_frame(frame, now_);
            pump(gateway_ep_);  // the ACK rides the same lossy channel
            switch (rx.kind) {
                case netlink::RxResult::Kind::DeliverPayload: deliver_to_gateway(rx.payload, frame.seq); break;
                case netlink::RxResult::Kind::Duplicate:
                    journal_.append(now_, "link_duplicate", frame.src, frame.seq, 0, "");
                    break;
                default:
                    journal_.append(now_, "ack_ignored", event.node, frame.seq, 0, "");
                    break;
            }
            return;
        }

        auto& endpoint = endpoint_for(event.node);
        const auto rx = endpoint.on_frame(frame, now_);
        pump(endpoint);
        if (rx.kind == netlink::RxResult::Kind::AckOnly) {
            send_next_queued(event.node);
        } else if (rx.kind == netlink::RxResult::Kind::Ignored) {
            journal_.append(now_, "ack_ignored", event.node, frame.seq, 0, "");
        }
    }

    void deliver_to_gateway(const std::vector<std::uint8_t>& payload, std::uint8_t link_seq) {
        // Peek at the origin time for the latency report; ingest re-parses
        // and journals on its own.
        const auto parsed = gateway::parse_alert_payload(payload, link_seq);
        const auto result = gateway_.ingest(payload, now_, link_seq);
        if (result.kind == gateway::IngestResult::Kind::Dispatched) {
            if (const auto* alert = std::get_if<gateway::AlertMessage>(&parsed)) {
                const Instant latency = now_ - static_cast<Instant>(alert->t_origin);
                if (!alert_latency_ || latency > *alert_latency_) alert_latency_ = latency;
            }
        }
    }

    netlink::ArqEndpoint& endpoint_for(NodeId node) {
        if (node == kDoorNode) return door_ep_;
        if (node == kPerimeterNode) return perim_ep_;
        return gateway_ep_;
    }

    std::deque<std::vector<std::uint8_t>>& tx_queue_for(NodeId node) {
        return node == kDoorNode ? door_txq_ : perim_txq_;
    }

    Report make_report() {
        Report report;
        report.scenario = script_.name;
        report.seed = script_.seed;
        report.duration_ms = script_.duration_ms;
        report.notifications = static_cast<int>(gateway_.notifications().size());
        report.clips_written = clips_written_;
        report.detection_latency_ms = detection_latency_;
        report.alert_latency_ms = alert_latency_;
        report.journal_path = journal_.path();
        report.outbox_dir = gateway_.outbox_dir();
        report.clips_dir = clips_dir_;
        report.records = gateway_.notifications();
        return report;
    }

    const ScenarioScript& script_;
    const RunConfig& cfg_;
    std::filesystem::path out_dir_;
    std::filesystem::path clips_dir_;

    gateway::Journal journal_;
    gateway::ClipStore clips_;
    netlink::ChannelModel channel_;
    guard::GuardNode door_guard_;
    guard::GuardNode perim_guard_;
    sensing::PresenceDetector presence_;
    sensing::BeamDebouncer debouncer_;
    recorder::FrameRing ring_;
    netlink::ArqEndpoint door_ep_;
    netlink::ArqEndpoint perim_ep_;
    netlink::ArqEndpoint gateway_ep_;
    gateway::Gateway gateway_;

    sensing::SensorChannelConfig range_cfg_;
    std::deque<std::vector<std::uint8_t>> door_txq_;
    std::deque<std::vector<std::uint8_t>> perim_txq_;

    std::priority_queue<Event, std::vector<Event>, EventAfter> queue_;
    std::uint64_t next_order_ = 0;
    Instant now_ = 0;
    int actor_distance_ = 0;
    sensing::BeamState beam_ = sensing::BeamState::Intact;
    std::uint32_t camera_index_ = 0;
    int clips_written_ = 0;
    std::optional<Instant> detection_latency_;
    std::optional<Instant> alert_latency_;
};

}  // namespace

std::vector<std::string> builtin_names() {
    return {"fig1", "fig2", "fig3"};
}

bool is_builtin(std::string_view name) {
    return name == "fig1" || name == "fig2" || name == "fig3";
}

ScenarioScript builtin_scenario(std::string_view name) {
    std::string_view text;
    if (name == "fig1") text = kFig1;
    else if (name == "fig2") text = kFig2;
    else if (name == "fig3") text = kFig3;
    else throw std::invalid_argument("unknown scenario '" + std::string(name) +
                                     "' (valid: fig1 fig2 fig3)");
    ScenarioScript script = parse_scenario(text);
    script.name = std::string(name);
    return script;
}

Report run_scenario(const ScenarioScript& script, const RunConfig& config,
                    const std::filesystem::path& out_dir) {
    validate(config);
    std::filesystem::create_directories(out_dir);
    // Stale artifacts from a previous run would corrupt the counts.
    std::filesystem::remove_all(out_dir / "outbox");
    std::filesystem::remove_all(out_dir / "clips");
    SimEngine engine(script, config, out_dir);
    return engine.run();
}

std::string format_report(const Report& report) {
    auto line = [](std::string_view key, const auto& value) {
        std::ostringstream os;
        os << std::left << std::setw(22) << (std::string(key) + ":") << value << '\n';
        return os.str();
    };
    std::string out;
    out += line("scenario", report.scenario);
    out += line("seed", report.seed);
    out += line("duration_ms", report.duration_ms);
    out += line("notifications", report.notifications);
    out += line("clips_written", report.clips_written);
    out += line("detection_latency_ms",
                report.detection_latency_ms ? std::to_string(*report.detection_latency_ms) : "-");
    out += line("alert_latency_ms",
                report.alert_latency_ms ? std::to_string(*report.alert_latency_ms) : "-");
    out += line("journal", report.journal_path.string());
    out += line("outbox", report.outbox_dir.string());
    out += line("clips", report.clips_dir.string());
    return out;
}

}  // namespace idart::scenario
