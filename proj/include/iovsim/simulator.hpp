#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "iovsim/channel.hpp"
#include "iovsim/config.hpp"
#include "iovsim/packet.hpp"

namespace iovsim {

/// One completed packet window of the historical congestion dataset.
struct CongestionRecord {
    int64_t slot_index = 0;
    double cong_act_time_s = 0.0;  // clock at the window boundary
    int64_t cong_diff = 0;
    std::string state_label;
    int64_t packets_sent = 0;
    int64_t packets_dropped = 0;
    double delivery_ratio = 0.0;
};

/// Running congestion-flag counters between window boundaries.
struct CongCounterState {
    int64_t cong_act = 0;
    int64_t cong_init = 0;
    int64_t packs = 0;
    double cong_act_time_s = 0.0;  // clock of the last flag activation
};

struct CongWindowFragment {
    int64_t cong_diff = 0;
    double closed_at_s = 0.0;
};

/// Congestion flag for one packet event: raised when the sender has more
/// than `threshold` retransmissions in the current window, and the packet
/// itself is an original (retransmissions are never counted).
bool congestion_flag(bool is_retransmission, int64_t window_retx_from_src, int64_t threshold);

/// Advance the counters for one packet event; emits a window fragment
/// (CongDiff and boundary time) whenever `packs` reaches pack_th.
std::optional<CongWindowFragment> update_cong_counter(CongCounterState& counter, bool flag,
                                                      double clock_s, int64_t pack_th);

/// Final state of one simulated packet (one trace row).
struct PacketRecord {
    PacketHeader hdr;  // ttl holds the remaining budget at resolution time
    int ttl_initial = 0;
    uint32_t attempts = 0;
    PacketOutcome outcome;
};

struct RunResult {
    std::vector<CongestionRecord> records;
    std::vector<PacketRecord> trace;
    int64_t partial_window_packets = 0;  // tail events not covered by a record
};

/// Run the dataset-generation simulation: per-slot channel stepping,
/// packet generation, multi-hop transmission with retransmissions, and
/// Alg.-style CongDiff window accounting. Deterministic given cfg.seed.
RunResult run(const SimConfig& cfg);

/// Write congestion.csv and packets.csv into out_dir (UTF-8, LF endings,
/// 6 decimal places). Byte-stable for a fixed seed.
void export_dataset(const std::vector<CongestionRecord>& records,
                    const std::vector<PacketRecord>& trace,
                    const std::filesystem::path& out_dir);

std::vector<CongestionRecord> import_congestion_csv(const std::filesystem::path& file);
std::vector<PacketRecord> import_packets_csv(const std::filesystem::path& file);

}  // namespace iovsim
