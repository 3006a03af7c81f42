#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "iovsim/channel.hpp"

namespace iovsim {

/// Full run configuration. Defaults reproduce the standard scenario:
/// 150 vehicles, 20,000 slots, PackTH 350, the default 4-state chain.
struct SimConfig {
    // offered load
    uint32_t n_vehicles = 150;
    double speed_kmh = 25.0;  // informational; mobility is abstracted away
    double packets_per_vehicle_per_slot = 0.3;
    int64_t n_slots = 20000;
    double slot_duration_s = 1.0;

    // congestion accounting
    int64_t pack_th = 350;
    int64_t cong_window_threshold = 1;
    int64_t cong_flag_window_slots = 10;  // trailing horizon for per-source retx counts

    // packets
    int ttl_initial = 8;
    int max_retx = 3;
    double p_safety = 0.3;
    uint32_t safety_size_min = 40;
    uint32_t safety_size_max = 100;
    uint32_t normal_size_min = 300;
    uint32_t normal_size_max = 1200;

    // service model (0 = unlimited)
    int64_t slot_capacity_packets = 0;
    int64_t queue_capacity_packets = 0;

    uint64_t seed = 1;

    // channel; empty labels means "use the default chain"
    std::vector<std::string> channel_labels;
    std::vector<double> channel_drop_rates;
    std::vector<std::vector<double>> channel_rows;
    std::size_t channel_initial_state = 0;

    /// Throws ConfigError on any violated invariant.
    void validate() const;

    /// Channel built from the channel_* fields (or the default chain).
    MarkovChannel make_channel() const;
};

/// Parse a line-oriented `key = value` file. Blank lines and lines starting
/// with '#' are ignored; unknown keys are a hard error.
SimConfig parse_config_file(const std::filesystem::path& path);

/// Apply one `key = value` assignment (exposed for tests).
void apply_config_entry(SimConfig& cfg, const std::string& key, const std::string& value);

}  // namespace iovsim
