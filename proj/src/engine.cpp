#include "engine.hpp"

#include <algorithm>
#include <array>
#include <tuple>
#include <cmath>

#include "iovsim/errors.hpp"

namespace iovsim::detail {

namespace {

// rng stream roles, forked from the master seed
enum : uint64_t { kStreamChannel = 1, kStreamGen = 2, kStreamDrop = 3 };

struct PacketState {
    PacketHeader hdr;
    int ttl_initial = 0;
    int path_len = 0;
    uint32_t attempts = 0;
    int64_t gen_slot = 0;
    PacketOutcome outcome;
    bool resolved = false;
};

struct SlotStats {
    int64_t sent[2] = {0, 0};  // [safety, normal]
    int64_t delivered[2] = {0, 0};
    // (packet, class, delay); summed in packet-id order at slot end so the
    // report does not depend on the serve order
    std::vector<std::tuple<uint64_t, int, double>> deliveries;

    std::array<double, 2> delay_sums() {
        std::sort(deliveries.begin(), deliveries.end());
        std::array<double, 2> sums = {0.0, 0.0};
        for (const auto& [idx, cls, delay] : deliveries) sums[std::size_t(cls)] += delay;
        return sums;
    }
};

}  // namespace

ManagedRunResult run_engine(const SimConfig& cfg, const EngineOptions& opt) {
    cfg.validate();
    MarkovChannel channel = cfg.make_channel();

    Rng master(cfg.seed);
    Rng rng_channel = master.fork(kStreamChannel);
    Rng rng_gen = master.fork(kStreamGen);
    Rng rng_drop = master.fork(kStreamDrop);

    const double slot_dur = cfg.slot_duration_s;
    const auto whole_rate = static_cast<int64_t>(std::floor(cfg.packets_per_vehicle_per_slot));
    const double frac_rate = cfg.packets_per_vehicle_per_slot - double(whole_rate);

    ManagedRunResult out;
    std::vector<PacketState> packets;
    TxQueue queue(cfg.queue_capacity_packets);
    std::vector<uint64_t> retx_due;        // packet indices to retransmit this slot
    std::vector<uint64_t> retx_next;       // scheduled during this slot for the next one

    CongCounterState counter;
    // per-source retransmission counts over the trailing flag window,
    // maintained as a ring of per-slot count rows
    const auto flag_window = std::size_t(std::max<int64_t>(1, cfg.cong_flag_window_slots));
    std::vector<std::vector<int64_t>> retx_ring(flag_window,
                                                std::vector<int64_t>(cfg.n_vehicles, 0));
    std::vector<int64_t> retx_trailing(cfg.n_vehicles, 0);
    int64_t win_sent = 0;
    int64_t win_dropped = 0;
    int64_t window_index = 0;

    std::vector<double> cong_history;
    bool have_prediction = false;
    double current_prediction = 0.0;
    int64_t prediction_target = -1;  // window index the current prediction refers to
    int64_t last_closed_cong = 0;
    uint64_t arrival_seq = 0;

    const bool proactive = opt.policy.mode == SchedMode::ProactivePriority;

    auto classify_entry = [&](const PacketHeader& hdr) {
        return opt.clusters ? classify(*opt.clusters, hdr) : PacketClass::NonCritical;
    };

    auto resolve = [&](uint64_t idx, bool delivered, DropReason reason, double delay) {
        PacketState& ps = packets[idx];
        ps.outcome.delivered = delivered;
        ps.outcome.drop_reason = reason;
        ps.outcome.delay_s = delay;
        ps.resolved = true;
    };

    for (int64_t t = 0; t < cfg.n_slots; ++t) {
        const double clock = double(t) * slot_dur;
        const CongestionState& state = channel.step(rng_channel);

        // slide the flag window: retire the slot that falls out of range
        auto& ring_row = retx_ring[std::size_t(t) % flag_window];
        for (uint32_t v = 0; v < cfg.n_vehicles; ++v) {
            retx_trailing[v] -= ring_row[v];
            ring_row[v] = 0;
        }

        // Queue aging: every waiting slot burns one hop of TTL budget, so a
        // packet is transmitted or expires within ttl_initial slots.
        if (!queue.empty()) {
            auto& entries = queue.entries();
            for (auto it = entries.begin(); it != entries.end();) {
                PacketState& ps = packets[it->packet_index];
                if (ps.hdr.ttl <= 0) {
                    resolve(it->packet_index, false, DropReason::TtlExpired, 0.0);
                    it = entries.erase(it);
                } else {
                    ps.hdr.ttl -= 1;
                    it->ttl = ps.hdr.ttl;
                    ++it;
                }
            }
        }

        const bool priority_active = proactive && have_prediction &&
                                     current_prediction > opt.policy.congestion_threshold;

        std::swap(retx_due, retx_next);
        retx_next.clear();
        const auto retx_backlog = static_cast<int64_t>(retx_due.size());
        const double hop_delay = 0.002 + 0.010 * double(retx_backlog);

        auto enqueue_packet = [&](uint64_t idx, bool is_retx) {
            const PacketState& ps = packets[idx];
            QueueEntry e;
            e.packet_index = idx;
            e.cls = classify_entry(ps.hdr);
            e.priority = ps.hdr.priority;
            e.ttl = ps.hdr.ttl;
            e.gen_time_s = ps.hdr.gen_time_s;
            e.arrival_seq = arrival_seq++;
            e.is_retx = is_retx;
            if (auto victim = queue.enqueue(e, priority_active))
                resolve(victim->packet_index, false, DropReason::QueueOverflow, 0.0);
        };

        for (uint64_t idx : retx_due) {
            if (!packets[idx].resolved) enqueue_packet(idx, true);
        }
        for (uint32_t v = 0; v < cfg.n_vehicles; ++v) {
            int64_t count = whole_rate + (frac_rate > 0.0 && rng_gen.bernoulli(frac_rate) ? 1 : 0);
            for (int64_t c = 0; c < count; ++c) {
                PacketState ps;
                ps.hdr.packet_id = packets.size();
                ps.hdr.src = v;
                uint32_t dst = cfg.n_vehicles > 1
                                   ? uint32_t(rng_gen.uniform_int(0, int(cfg.n_vehicles) - 2))
                                   : 0;
                if (cfg.n_vehicles > 1 && dst >= v) ++dst;
                ps.hdr.dst = dst;
                const bool safety = rng_gen.bernoulli(cfg.p_safety);
                ps.hdr.size_bytes =
                    safety ? uint32_t(rng_gen.uniform_int(uint64_t(cfg.safety_size_min),
                                                          uint64_t(cfg.safety_size_max)))
                           : uint32_t(rng_gen.uniform_int(uint64_t(cfg.normal_size_min),
                                                          uint64_t(cfg.normal_size_max)));
                ps.hdr = assign_priority(ps.hdr, rng_gen);
                ps.hdr.ttl = cfg.ttl_initial;
                ps.hdr.gen_time_s = clock;
                ps.ttl_initial = cfg.ttl_initial;
                ps.path_len = rng_gen.uniform_int(1, cfg.ttl_initial);
                ps.gen_slot = t;
                packets.push_back(ps);
                enqueue_packet(packets.size() - 1, false);
            }
        }

        SlotStats stats;
        int64_t served = 0;
        std::optional<CongWindowFragment> closed;
        while (!queue.empty() &&
               (cfg.slot_capacity_packets == 0 || served < cfg.slot_capacity_packets)) {
            const QueueEntry e = queue.pop(priority_active);
            PacketState& ps = packets[e.packet_index];
            ++served;
            ps.attempts += 1;

            const bool flag = congestion_flag(e.is_retx, retx_trailing[ps.hdr.src],
                                              cfg.cong_window_threshold);
            if (e.is_retx) {
                retx_trailing[ps.hdr.src] += 1;
                ring_row[ps.hdr.src] += 1;
            }

            // walk the multi-hop path under the current channel state
            bool lost = false;
            bool expired = false;
            double delay_acc = 0.0;
            for (int hop = 0; hop < ps.path_len; ++hop) {
                auto next = decrement_ttl(ps.hdr);
                if (!next) {
                    expired = true;
                    break;
                }
                ps.hdr = *next;
                delay_acc += hop_delay;
                if (sample_drop(state, rng_drop)) {
                    lost = true;
                    break;
                }
            }
            const bool delivered = !lost && !expired;
            const int cls = ps.hdr.size_bytes <= 100 ? 0 : 1;  // ground-truth safety split
            stats.sent[cls] += 1;
            win_sent += 1;
            if (delivered) {
                const double delay = double(t - ps.gen_slot) * slot_dur + delay_acc;
                resolve(e.packet_index, true, DropReason::None, delay);
                stats.delivered[cls] += 1;
                stats.deliveries.emplace_back(e.packet_index, cls, delay);
            } else {
                win_dropped += 1;
                if (expired) {
                    resolve(e.packet_index, false, DropReason::TtlExpired, 0.0);
                } else if (int(ps.attempts) < 1 + cfg.max_retx && ps.hdr.ttl > 0) {
                    retx_next.push_back(e.packet_index);  // retransmit next slot
                } else {
                    resolve(e.packet_index, false, DropReason::ChannelLoss, 0.0);
                }
            }

            if (auto frag = update_cong_counter(counter, flag, clock, cfg.pack_th)) {
                CongestionRecord rec;
                rec.slot_index = t;
                rec.cong_act_time_s = frag->closed_at_s;
                rec.cong_diff = frag->cong_diff;
                rec.state_label = state.label;
                rec.packets_sent = win_sent;
                rec.packets_dropped = win_dropped;
                rec.delivery_ratio =
                    win_sent > 0 ? double(win_sent - win_dropped) / double(win_sent) : 1.0;
                out.sim.records.push_back(rec);

                win_sent = 0;
                win_dropped = 0;
                last_closed_cong = frag->cong_diff;
                if (prediction_target == window_index)
                    out.window_log.push_back({window_index, current_prediction, frag->cong_diff});
                cong_history.push_back(double(frag->cong_diff));
                window_index += 1;
                closed = frag;
            }
        }

        // refresh the open-loop prediction once per closed window
        if (closed && opt.predictor) {
            const std::size_t need = opt.predictor->window_length();
            if (cong_history.size() >= need) {
                const std::span<const double> trailing(cong_history.data() + cong_history.size() -
                                                           need,
                                                       need);
                current_prediction = opt.predictor->predict_next(trailing);
                have_prediction = true;
                prediction_target = window_index + opt.policy.horizon - 1;
            }
        }

        if (opt.collect_slots) {
            const auto delay_sum = stats.delay_sums();
            SlotReport row;
            row.slot_index = t;
            row.predicted_cong = have_prediction ? current_prediction : 0.0;
            row.actual_cong = last_closed_cong;
            row.safety_sent = stats.sent[0];
            row.safety_delivered = stats.delivered[0];
            row.normal_sent = stats.sent[1];
            row.normal_delivered = stats.delivered[1];
            row.safety_delivery_ratio =
                stats.sent[0] > 0 ? double(stats.delivered[0]) / double(stats.sent[0]) : 1.0;
            row.normal_delivery_ratio =
                stats.sent[1] > 0 ? double(stats.delivered[1]) / double(stats.sent[1]) : 1.0;
            row.safety_mean_delay_s =
                stats.delivered[0] > 0 ? delay_sum[0] / double(stats.delivered[0]) : 0.0;
            row.normal_mean_delay_s =
                stats.delivered[1] > 0 ? delay_sum[1] / double(stats.delivered[1]) : 0.0;
            out.slots.push_back(row);
        }
    }

    out.sim.partial_window_packets = counter.packs;

    out.sim.trace.reserve(packets.size());
    for (const PacketState& ps : packets) {
        PacketRecord rec;
        rec.hdr = ps.hdr;
        rec.ttl_initial = ps.ttl_initial;
        rec.attempts = ps.attempts;
        // unresolved packets (in flight when the run ends) keep drop_reason None
        rec.outcome = ps.outcome;
        out.sim.trace.push_back(rec);
    }
    return out;
}

}  // namespace iovsim::detail
