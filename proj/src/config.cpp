#include "iovsim/config.hpp"

#include <charconv>
#include <fstream>

#include "iovsim/errors.hpp"

namespace iovsim {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        if (pos == std::string::npos) {
            out.push_back(trim(s.substr(start)));
            return out;
        }
        out.push_back(trim(s.substr(start, pos - start)));
        start = pos + 1;
    }
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': not a number: '" + v + "'");
    }
}

int64_t parse_int(const std::string& key, const std::string& v) {
    int64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size())
        throw ConfigError("config key '" + key + "': not an integer: '" + v + "'");
    return out;
}

uint64_t parse_uint(const std::string& key, const std::string& v) {
    uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size())
        throw ConfigError("config key '" + key + "': not an unsigned integer: '" + v + "'");
    return out;
}

std::vector<double> parse_double_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    for (const auto& item : split(v, ',')) out.push_back(parse_double(key, item));
    return out;
}

}  // namespace

void apply_config_entry(SimConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "n_vehicles") cfg.n_vehicles = static_cast<uint32_t>(parse_uint(key, value));
    else if (key == "speed_kmh") cfg.speed_kmh = parse_double(key, value);
    else if (key == "packets_per_vehicle_per_slot")
        cfg.packets_per_vehicle_per_slot = parse_double(key, value);
    else if (key == "n_slots") cfg.n_slots = parse_int(key, value);
    else if (key == "slot_duration_s") cfg.slot_duration_s = parse_double(key, value);
    else if (key == "pack_th") cfg.pack_th = parse_int(key, value);
    else if (key == "cong_window_threshold") cfg.cong_window_threshold = parse_int(key, value);
    else if (key == "cong_flag_window_slots") cfg.cong_flag_window_slots = parse_int(key, value);
    else if (key == "ttl_initial") cfg.ttl_initial = static_cast<int>(parse_int(key, value));
    else if (key == "max_retx") cfg.max_retx = static_cast<int>(parse_int(key, value));
    else if (key == "p_safety") cfg.p_safety = parse_double(key, value);
    else if (key == "safety_size_min") cfg.safety_size_min = static_cast<uint32_t>(parse_uint(key, value));
    else if (key == "safety_size_max") cfg.safety_size_max = static_cast<uint32_t>(parse_uint(key, value));
    else if (key == "normal_size_min") cfg.normal_size_min = static_cast<uint32_t>(parse_uint(key, value));
    else if (key == "normal_size_max") cfg.normal_size_max = static_cast<uint32_t>(parse_uint(key, value));
    else if (key == "slot_capacity_packets") cfg.slot_capacity_packets = parse_int(key, value);
    else if (key == "queue_capacity_packets") cfg.queue_capacity_packets = parse_int(key, value);
    else if (key == "seed") cfg.seed = parse_uint(key, value);
    else if (key == "channel_labels") {
        cfg.channel_labels.clear();
        for (auto& s : split(value, ',')) cfg.channel_labels.push_back(s);
    } else if (key == "channel_drop_rates") cfg.channel_drop_rates = parse_double_list(key, value);
    else if (key == "channel_initial_state")
        cfg.channel_initial_state = static_cast<std::size_t>(parse_uint(key, value));
    else if (key.rfind("channel_row_", 0) == 0) {
        const auto idx = static_cast<std::size_t>(parse_uint(key, key.substr(12)));
        if (cfg.channel_rows.size() <= idx) cfg.channel_rows.resize(idx + 1);
        cfg.channel_rows[idx] = parse_double_list(key, value);
    } else {
        throw ConfigError("unknown config key: '" + key + "'");
    }
}

SimConfig parse_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    SimConfig cfg;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path.string() + ":" + std::to_string(lineno) +
                              ": expected 'key = value'");
        apply_config_entry(cfg, trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    }
    cfg.validate();
    return cfg;
}

void SimConfig::validate() const {
    if (n_vehicles == 0) throw ConfigError("n_vehicles must be positive");
    if (packets_per_vehicle_per_slot <= 0.0)
        throw ConfigError("packets_per_vehicle_per_slot must be positive");
    if (n_slots < 0) throw ConfigError("n_slots must be non-negative");
    if (slot_duration_s <= 0.0) throw ConfigError("slot_duration_s must be positive");
    if (pack_th < 1) throw ConfigError("pack_th must be >= 1");
    if (cong_window_threshold < 0) throw ConfigError("cong_window_threshold must be >= 0");
    if (cong_flag_window_slots < 1) throw ConfigError("cong_flag_window_slots must be >= 1");
    if (ttl_initial < 1) throw ConfigError("ttl_initial must be >= 1");
    if (max_retx < 0) throw ConfigError("max_retx must be >= 0");
    if (!(p_safety >= 0.0 && p_safety <= 1.0)) throw ConfigError("p_safety must be in [0,1]");
    if (safety_size_min == 0 || safety_size_min > safety_size_max)
        throw ConfigError("safety size range invalid");
    if (safety_size_max > 100)
        throw ConfigError("safety_size_max must be <= 100 bytes");
    if (normal_size_min <= 100 || normal_size_min > normal_size_max)
        throw ConfigError("normal size range must sit above 100 bytes");
    if (slot_capacity_packets < 0 || queue_capacity_packets < 0)
        throw ConfigError("capacities must be >= 0 (0 = unlimited)");
    const std::size_t s = channel_drop_rates.size();
    if (!channel_labels.empty() && channel_labels.size() != s)
        throw ConfigError("channel_labels and channel_drop_rates must have equal length");
    if (!channel_rows.empty() && channel_rows.size() != s)
        throw ConfigError("channel_row_* count must equal the number of states");
    make_channel();  // full matrix validation happens in the MarkovChannel ctor
}

MarkovChannel SimConfig::make_channel() const {
    if (channel_drop_rates.empty()) {
        if (channel_initial_state != 0) {
            auto chain = MarkovChannel::default_chain();
            return MarkovChannel(
                {chain.state(0), chain.state(1), chain.state(2), chain.state(3)},
                chain.transition(), channel_initial_state);
        }
        return MarkovChannel::default_chain();
    }
    const std::size_t n = channel_drop_rates.size();
    std::vector<CongestionState> states(n);
    for (std::size_t i = 0; i < n; ++i) {
        states[i].drop_rate = channel_drop_rates[i];
        states[i].label = i < channel_labels.size() ? channel_labels[i] : "s" + std::to_string(i);
    }
    std::vector<std::vector<double>> rows = channel_rows;
    if (rows.empty()) {
        // same persistence pattern as the default chain
        rows.assign(n, std::vector<double>(n, n > 1 ? 0.005 / double(n - 1) : 0.0));
        for (std::size_t i = 0; i < n; ++i) rows[i][i] = n > 1 ? 0.995 : 1.0;
    }
    return MarkovChannel(states, rows, channel_initial_state);
}

}  // namespace iovsim
