#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>

#include "iovsim/rng.hpp"

namespace iovsim {

enum class DropReason { None, ChannelLoss, TtlExpired, QueueOverflow };

const char* drop_reason_name(DropReason r);
DropReason drop_reason_from_name(const std::string& name);

/// Header fields the pipeline consumes; safety packets are <= 100 bytes
/// and carry priority 1..10, everything else 11..20 (priority 1 = most urgent).
struct PacketHeader {
    uint64_t packet_id = 0;
    uint32_t src = 0;
    uint32_t dst = 0;
    uint32_t size_bytes = 0;
    int ttl = 0;  // remaining hop budget
    int priority = 0;
    double gen_time_s = 0.0;
    int hop_count = 0;
};

struct PacketOutcome {
    bool delivered = false;
    DropReason drop_reason = DropReason::None;
    double delay_s = 0.0;  // end-to-end, only meaningful when delivered
};

/// Draw the priority field: uniform 1..10 when size_bytes <= 100 (inclusive
/// boundary), uniform 11..20 otherwise. Other fields unchanged.
PacketHeader assign_priority(PacketHeader header, Rng& rng);

/// One hop: nullopt when the header arrives with ttl already 0 (the packet
/// must be dropped), otherwise ttl-1 / hop_count+1.
std::optional<PacketHeader> decrement_ttl(PacketHeader header);

/// Feature vector for criticality clustering, fixed (ttl, priority) order.
std::array<double, 2> criticality_features(const PacketHeader& header);

}  // namespace iovsim
