#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "iovsim/errors.hpp"
#include "iovsim/simulator.hpp"

using namespace iovsim;
namespace fs = std::filesystem;

namespace {

SimConfig small_config() {
    SimConfig cfg;
    cfg.n_vehicles = 30;
    cfg.packets_per_vehicle_per_slot = 1.0;
    cfg.n_slots = 400;
    cfg.pack_th = 50;
    cfg.seed = 7;
    return cfg;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("congestion flag rule") {
    CHECK_FALSE(congestion_flag(false, 2, 3));
    CHECK(congestion_flag(false, 4, 3));
    CHECK_FALSE(congestion_flag(true, 4, 3));  // retransmissions never count
    CHECK_FALSE(congestion_flag(false, 3, 3)); // strictly greater than the threshold
}

TEST_CASE("counter hand-trace: flags at packet indices {10, 400, 700}") {
    // 1-based packet indices; PackTH = 350 so window 1 covers 1..350 and
    // window 2 covers 351..700
    const std::set<int64_t> flagged = {10, 400, 700};
    CongCounterState counter;
    std::vector<int64_t> cong_diffs;
    for (int64_t p = 1; p <= 700; ++p) {
        const bool flag = flagged.count(p) > 0;
        if (auto frag = update_cong_counter(counter, flag, double(p), 350))
            cong_diffs.push_back(frag->cong_diff);
    }
    REQUIRE(cong_diffs.size() == 2);
    CHECK(cong_diffs[0] == 1);
    CHECK(cong_diffs[1] == 2);
}

TEST_CASE("counter: no flags gives CongDiff 0") {
    CongCounterState counter;
    std::vector<int64_t> diffs;
    for (int64_t p = 0; p < 350; ++p) {
        if (auto frag = update_cong_counter(counter, false, 0.0, 350))
            diffs.push_back(frag->cong_diff);
    }
    REQUIRE(diffs.size() == 1);
    CHECK(diffs[0] == 0);
}

TEST_CASE("counter: flag on every packet saturates at PackTH") {
    CongCounterState counter;
    std::vector<int64_t> diffs;
    for (int64_t p = 0; p < 1050; ++p) {
        if (auto frag = update_cong_counter(counter, true, 0.0, 350))
            diffs.push_back(frag->cong_diff);
    }
    REQUIRE(diffs.size() == 3);
    for (int64_t d : diffs) CHECK(d == 350);
}

TEST_CASE("counter stamps the flag activation time") {
    CongCounterState counter;
    update_cong_counter(counter, true, 12.5, 350);
    CHECK(counter.cong_act_time_s == 12.5);
    update_cong_counter(counter, false, 20.0, 350);
    CHECK(counter.cong_act_time_s == 12.5);
}

TEST_CASE("zero slots produce an empty dataset") {
    SimConfig cfg = small_config();
    cfg.n_slots = 0;
    const auto result = run(cfg);
    CHECK(result.records.empty());
    CHECK(result.trace.empty());
}

TEST_CASE("lossless channel delivers everything") {
    SimConfig cfg = small_config();
    cfg.channel_labels = {"zero"};
    cfg.channel_drop_rates = {0.0};
    cfg.channel_rows = {{1.0}};
    const auto result = run(cfg);
    REQUIRE_FALSE(result.records.empty());
    for (const auto& r : result.records) {
        CHECK(r.delivery_ratio == 1.0);
        CHECK(r.packets_dropped == 0);
        CHECK(r.cong_diff == 0);
    }
    for (const auto& p : result.trace) CHECK(p.outcome.delivered);
}

TEST_CASE("window tiling: every complete window covers exactly pack_th events") {
    const auto result = run(small_config());
    REQUIRE_FALSE(result.records.empty());
    int64_t total_attempts = 0;
    for (const auto& p : result.trace) total_attempts += p.attempts;
    int64_t windowed = 0;
    for (const auto& r : result.records) {
        CHECK(r.packets_sent == 50);
        CHECK(r.packets_dropped <= r.packets_sent);
        CHECK(r.delivery_ratio >= 0.0);
        CHECK(r.delivery_ratio <= 1.0);
        CHECK(r.cong_diff >= 0);
        windowed += r.packets_sent;
    }
    // unresolved packets at the end of the run never reached the counter
    int64_t unresolved = 0;
    for (const auto& p : result.trace) {
        if (!p.outcome.delivered && p.outcome.drop_reason == DropReason::None) unresolved += 1;
    }
    CHECK(windowed + result.partial_window_packets == total_attempts);
}

TEST_CASE("conservation: attempts = delivered + dropped per window") {
    const auto result = run(small_config());
    for (const auto& r : result.records) {
        const int64_t delivered = r.packets_sent - r.packets_dropped;
        CHECK(delivered == int64_t(std::lround(r.delivery_ratio * double(r.packets_sent))));
    }
}

TEST_CASE("trace outcomes are exhaustive and consistent") {
    const auto result = run(small_config());
    int64_t delivered = 0, channel_loss = 0, ttl_expired = 0, pending = 0;
    for (const auto& p : result.trace) {
        if (p.outcome.delivered) {
            CHECK(p.outcome.drop_reason == DropReason::None);
            CHECK(p.outcome.delay_s >= 0.0);
            delivered += 1;
        } else if (p.outcome.drop_reason == DropReason::ChannelLoss) {
            channel_loss += 1;
        } else if (p.outcome.drop_reason == DropReason::TtlExpired) {
            ttl_expired += 1;
        } else {
            pending += 1;  // in flight when the run ended
        }
        CHECK(p.attempts >= 1);
        CHECK(p.attempts <= 4);  // 1 + max_retx
        CHECK(p.hdr.ttl >= 0);
        CHECK(p.hdr.ttl <= p.ttl_initial);
    }
    CHECK(delivered > 0);
    CHECK(channel_loss > 0);
    CHECK(ttl_expired > 0);  // retransmissions exhaust the hop budget
    CHECK(pending <= 64);
}

TEST_CASE("deterministic: identical config and seed give identical results") {
    const auto a = run(small_config());
    const auto b = run(small_config());
    REQUIRE(a.records.size() == b.records.size());
    REQUIRE(a.trace.size() == b.trace.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        CHECK(a.records[i].cong_diff == b.records[i].cong_diff);
        CHECK(a.records[i].state_label == b.records[i].state_label);
        CHECK(a.records[i].packets_dropped == b.records[i].packets_dropped);
    }
    for (std::size_t i = 0; i < a.trace.size(); ++i) {
        CHECK(a.trace[i].outcome.delivered == b.trace[i].outcome.delivered);
        CHECK(a.trace[i].outcome.delay_s == b.trace[i].outcome.delay_s);
        CHECK(a.trace[i].hdr.priority == b.trace[i].hdr.priority);
    }
}

TEST_CASE("different seeds give different traffic") {
    SimConfig cfg = small_config();
    const auto a = run(cfg);
    cfg.seed = 8;
    const auto b = run(cfg);
    int64_t diff = 0;
    const std::size_t n = std::min(a.trace.size(), b.trace.size());
    for (std::size_t i = 0; i < n; ++i)
        diff += a.trace[i].outcome.delivered != b.trace[i].outcome.delivered ? 1 : 0;
    CHECK(diff > 0);
}

TEST_CASE("mean drop fraction approaches the stationary expectation") {
    // single-hop paths isolate the channel: per-attempt drop probability in
    // state i is exactly drop_rate_i, so the long-run mean drop fraction is
    // sum_i pi_i * drop_rate_i
    SimConfig cfg;
    cfg.n_vehicles = 60;
    cfg.packets_per_vehicle_per_slot = 1.0;
    cfg.n_slots = 5000;
    cfg.pack_th = 350;
    cfg.ttl_initial = 1;  // path length is always 1
    cfg.max_retx = 0;
    cfg.seed = 21;
    const auto chain = cfg.make_channel();
    const auto pi = chain.stationary_distribution();
    double expected = 0.0;
    for (std::size_t s = 0; s < chain.num_states(); ++s)
        expected += pi[s] * chain.state(s).drop_rate;

    const auto result = run(cfg);
    int64_t sent = 0, dropped = 0;
    for (const auto& r : result.records) {
        sent += r.packets_sent;
        dropped += r.packets_dropped;
    }
    REQUIRE(sent > 100000);
    CHECK(std::fabs(double(dropped) / double(sent) - expected) < 0.02);
}

TEST_CASE("raising every drop rate does not decrease total drops") {
    int harder_wins = 0;
    for (uint64_t seed = 1; seed <= 10; ++seed) {
        SimConfig cfg = small_config();
        cfg.seed = seed;
        const auto base = run(cfg);
        cfg.channel_labels = {"low", "peak", "medium", "high"};
        cfg.channel_drop_rates = {0.25, 0.50, 0.35, 0.45};  // +0.15 everywhere
        const auto harder = run(cfg);
        int64_t base_drops = 0, harder_drops = 0;
        for (const auto& r : base.records) base_drops += r.packets_dropped;
        for (const auto& r : harder.records) harder_drops += r.packets_dropped;
        harder_wins += harder_drops >= base_drops ? 1 : 0;
    }
    CHECK(harder_wins >= 9);
}

TEST_CASE("export is byte-stable and round-trips") {
    const fs::path dir = fs::temp_directory_path() / "iovsim_sim_test";
    fs::remove_all(dir);
    const auto result = run(small_config());
    export_dataset(result.records, result.trace, dir);
    const std::string cong1 = slurp(dir / "congestion.csv");
    const std::string pkts1 = slurp(dir / "packets.csv");

    export_dataset(result.records, result.trace, dir);
    CHECK(slurp(dir / "congestion.csv") == cong1);
    CHECK(slurp(dir / "packets.csv") == pkts1);
    CHECK(cong1.find("\r") == std::string::npos);  // LF endings only

    const auto records = import_congestion_csv(dir / "congestion.csv");
    REQUIRE(records.size() == result.records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        CHECK(records[i].slot_index == result.records[i].slot_index);
        CHECK(records[i].cong_diff == result.records[i].cong_diff);
        CHECK(records[i].state_label == result.records[i].state_label);
        CHECK(records[i].packets_sent == result.records[i].packets_sent);
    }
    const auto trace = import_packets_csv(dir / "packets.csv");
    REQUIRE(trace.size() == result.trace.size());
    for (std::size_t i = 0; i < trace.size(); i += 97) {
        CHECK(trace[i].hdr.packet_id == result.trace[i].hdr.packet_id);
        CHECK(trace[i].hdr.priority == result.trace[i].hdr.priority);
        CHECK(trace[i].outcome.delivered == result.trace[i].outcome.delivered);
        CHECK(trace[i].outcome.drop_reason == result.trace[i].outcome.drop_reason);
    }
    fs::remove_all(dir);
}

TEST_CASE("single record exports as header plus one row") {
    const fs::path dir = fs::temp_directory_path() / "iovsim_sim_single";
    fs::remove_all(dir);
    CongestionRecord rec;
    rec.slot_index = 3;
    rec.cong_diff = 5;
    rec.state_label = "low";
    rec.packets_sent = 350;
    rec.packets_dropped = 35;
    rec.delivery_ratio = 0.9;
    export_dataset({rec}, {}, dir);
    const std::string text = slurp(dir / "congestion.csv");
    CHECK(std::count(text.begin(), text.end(), '\n') == 2);
    fs::remove_all(dir);
}

TEST_CASE("unknown config keys are a hard error") {
    const fs::path file = fs::temp_directory_path() / "iovsim_bad.conf";
    {
        std::ofstream out(file);
        out << "n_vehicles = 10\nno_such_key = 1\n";
    }
    CHECK_THROWS_AS(parse_config_file(file), ConfigError);
    fs::remove(file);
}

TEST_CASE("config file round-trips the channel") {
    const fs::path file = fs::temp_directory_path() / "iovsim_chan.conf";
    {
        std::ofstream out(file);
        out << "# comment line\n";
        out << "channel_labels = a, b\n";
        out << "channel_drop_rates = 0.0, 1.0\n";
        out << "channel_row_0 = 0.9, 0.1\n";
        out << "channel_row_1 = 0.5, 0.5\n";
        out << "n_slots = 10\n";
    }
    const SimConfig cfg = parse_config_file(file);
    const auto chain = cfg.make_channel();
    CHECK(chain.num_states() == 2);
    CHECK(chain.state(0).label == "a");
    CHECK(chain.state(1).drop_rate == 1.0);
    CHECK(chain.transition()[0][1] == doctest::Approx(0.1));
    fs::remove(file);
}
