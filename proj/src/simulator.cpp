#include "iovsim/simulator.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "engine.hpp"
#include "iovsim/errors.hpp"

namespace iovsim {

bool congestion_flag(bool is_retransmission, int64_t window_retx_from_src, int64_t threshold) {
    if (is_retransmission) return false;  // retransmissions never count toward CongAct
    return window_retx_from_src > threshold;
}

std::optional<CongWindowFragment> update_cong_counter(CongCounterState& counter, bool flag,
                                                      double clock_s, int64_t pack_th) {
    if (flag) {
        counter.cong_act += 1;
        counter.cong_act_time_s = clock_s;
    }
    counter.packs += 1;
    if (counter.packs == pack_th) {
        CongWindowFragment frag;
        frag.cong_diff = counter.cong_act - counter.cong_init;
        frag.closed_at_s = clock_s;
        counter.cong_init = counter.cong_act;
        counter.packs = 0;
        return frag;
    }
    return std::nullopt;
}

RunResult run(const SimConfig& cfg) {
    detail::EngineOptions opt;  // Fifo, no predictor: pure dataset generation
    return detail::run_engine(cfg, opt).sim;
}

namespace {

std::string f6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(item);
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

std::ifstream open_or_throw(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw IoError("cannot open " + file.string());
    return in;
}

}  // namespace

void export_dataset(const std::vector<CongestionRecord>& records,
                    const std::vector<PacketRecord>& trace,
                    const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);

    {
        std::ofstream out(out_dir / "congestion.csv", std::ios::binary);
        if (!out) throw IoError("cannot write " + (out_dir / "congestion.csv").string());
        out << "slot_index,cong_act_time_s,cong_diff,state_label,packets_sent,packets_dropped,"
               "delivery_ratio\n";
        for (const auto& r : records) {
            out << r.slot_index << ',' << f6(r.cong_act_time_s) << ',' << r.cong_diff << ','
                << r.state_label << ',' << r.packets_sent << ',' << r.packets_dropped << ','
                << f6(r.delivery_ratio) << '\n';
        }
    }
    {
        std::ofstream out(out_dir / "packets.csv", std::ios::binary);
        if (!out) throw IoError("cannot write " + (out_dir / "packets.csv").string());
        out << "packet_id,src,dst,size_bytes,ttl_initial,ttl_remaining,priority,gen_time_s,"
               "hop_count,delivered,drop_reason,delay_s\n";
        for (const auto& p : trace) {
            out << p.hdr.packet_id << ',' << p.hdr.src << ',' << p.hdr.dst << ','
                << p.hdr.size_bytes << ',' << p.ttl_initial << ',' << p.hdr.ttl << ','
                << p.hdr.priority << ',' << f6(p.hdr.gen_time_s) << ',' << p.hdr.hop_count << ','
                << (p.outcome.delivered ? 1 : 0) << ',' << drop_reason_name(p.outcome.drop_reason)
                << ',' << f6(p.outcome.delay_s) << '\n';
        }
    }
}

std::vector<CongestionRecord> import_congestion_csv(const std::filesystem::path& file) {
    auto in = open_or_throw(file);
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty congestion csv: " + file.string());
    std::vector<CongestionRecord> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_line(line);
        if (f.size() != 7) throw DataError("bad congestion row: " + line);
        CongestionRecord r;
        r.slot_index = std::stoll(f[0]);
        r.cong_act_time_s = std::stod(f[1]);
        r.cong_diff = std::stoll(f[2]);
        r.state_label = f[3];
        r.packets_sent = std::stoll(f[4]);
        r.packets_dropped = std::stoll(f[5]);
        r.delivery_ratio = std::stod(f[6]);
        out.push_back(r);
    }
    return out;
}

std::vector<PacketRecord> import_packets_csv(const std::filesystem::path& file) {
    auto in = open_or_throw(file);
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty packets csv: " + file.string());
    std::vector<PacketRecord> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_line(line);
        if (f.size() != 12) throw DataError("bad packet row: " + line);
        PacketRecord p;
        p.hdr.packet_id = std::stoull(f[0]);
        p.hdr.src = uint32_t(std::stoul(f[1]));
        p.hdr.dst = uint32_t(std::stoul(f[2]));
        p.hdr.size_bytes = uint32_t(std::stoul(f[3]));
        p.ttl_initial = std::stoi(f[4]);
        p.hdr.ttl = std::stoi(f[5]);
        p.hdr.priority = std::stoi(f[6]);
        p.hdr.gen_time_s = std::stod(f[7]);
        p.hdr.hop_count = std::stoi(f[8]);
        p.outcome.delivered = f[9] == "1";
        p.outcome.drop_reason = drop_reason_from_name(f[10]);
        p.outcome.delay_s = std::stod(f[11]);
        out.push_back(p);
    }
    return out;
}

}  // namespace iovsim
