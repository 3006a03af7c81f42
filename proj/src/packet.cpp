#include "iovsim/packet.hpp"

#include "iovsim/errors.hpp"

namespace iovsim {

const char* drop_reason_name(DropReason r) {
    switch (r) {
        case DropReason::None: return "None";
        case DropReason::ChannelLoss: return "ChannelLoss";
        case DropReason::TtlExpired: return "TtlExpired";
        case DropReason::QueueOverflow: return "QueueOverflow";
    }
    return "None";
}

DropReason drop_reason_from_name(const std::string& name) {
    if (name == "None") return DropReason::None;
    if (name == "ChannelLoss") return DropReason::ChannelLoss;
    if (name == "TtlExpired") return DropReason::TtlExpired;
    if (name == "QueueOverflow") return DropReason::QueueOverflow;
    throw DataError("unknown drop reason: " + name);
}

PacketHeader assign_priority(PacketHeader header, Rng& rng) {
    header.priority = header.size_bytes <= 100 ? rng.uniform_int(1, 10) : rng.uniform_int(11, 20);
    return header;
}

std::optional<PacketHeader> decrement_ttl(PacketHeader header) {
    if (header.ttl <= 0) return std::nullopt;
    header.ttl -= 1;
    header.hop_count += 1;
    return header;
}

std::array<double, 2> criticality_features(const PacketHeader& header) {
    return {static_cast<double>(header.ttl), static_cast<double>(header.priority)};
}

}  // namespace iovsim
