#include "iovsim/channel.hpp"

#include <cmath>
#include <cstdint>

#include "iovsim/errors.hpp"

namespace iovsim {

MarkovChannel::MarkovChannel(std::vector<CongestionState> states,
                             std::vector<std::vector<double>> transition,
                             std::size_t initial_state)
    : states_(std::move(states)), transition_(std::move(transition)), current_(initial_state) {
    const std::size_t n = states_.size();
    if (n == 0) throw ConfigError("channel needs at least one state");
    if (transition_.size() != n) throw ConfigError("transition matrix must be SxS");
    for (const auto& st : states_) {
        if (!(st.drop_rate >= 0.0 && st.drop_rate <= 1.0))
            throw ConfigError("drop_rate out of [0,1] for state '" + st.label + "'");
    }
    for (const auto& row : transition_) {
        if (row.size() != n) throw ConfigError("transition matrix must be SxS");
        double sum = 0.0;
        for (double p : row) {
            if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("transition entry out of [0,1]");
            sum += p;
        }
        if (std::fabs(sum - 1.0) > 1e-9)
            throw ConfigError("transition row does not sum to 1 (got " + std::to_string(sum) + ")");
    }
    if (current_ >= n) throw ConfigError("initial state index out of range");
}

MarkovChannel MarkovChannel::default_chain() {
    const std::vector<CongestionState> states = {
        {0.10, "low"}, {0.35, "peak"}, {0.20, "medium"}, {0.30, "high"}};
    const std::size_t n = states.size();
    std::vector<std::vector<double>> matrix(n, std::vector<double>(n, 0.005 / double(n - 1)));
    for (std::size_t i = 0; i < n; ++i) matrix[i][i] = 0.995;
    return MarkovChannel(states, matrix, 0);
}

const CongestionState& MarkovChannel::step(Rng& rng) {
    const auto& row = transition_[current_];
    const double u = rng.uniform01();
    double cum = 0.0;
    std::size_t next = row.size() - 1;  // guards against cum rounding below 1
    for (std::size_t j = 0; j < row.size(); ++j) {
        cum += row[j];
        if (u < cum) {
            next = j;
            break;
        }
    }
    current_ = next;
    return states_[current_];
}

namespace {

// BFS over positive-probability edges; returns distance from `start`,
// -1 for unreachable states.
std::vector<int> bfs_levels(const std::vector<std::vector<double>>& p, std::size_t start,
                            bool reversed) {
    const std::size_t n = p.size();
    std::vector<int> level(n, -1);
    std::vector<std::size_t> queue{start};
    level[start] = 0;
    for (std::size_t qi = 0; qi < queue.size(); ++qi) {
        const std::size_t u = queue[qi];
        for (std::size_t v = 0; v < n; ++v) {
            const double w = reversed ? p[v][u] : p[u][v];
            if (w > 0.0 && level[v] < 0) {
                level[v] = level[u] + 1;
                queue.push_back(v);
            }
        }
    }
    return level;
}

uint64_t gcd_u64(uint64_t a, uint64_t b) {
    while (b != 0) {
        const uint64_t t = a % b;
        a = b;
        b = t;
    }
    return a;
}

}  // namespace

std::vector<double> MarkovChannel::stationary_distribution(std::size_t max_iter, double tol) const {
    const std::size_t n = states_.size();

    // Irreducibility: every state reachable from and to state 0.
    const auto fwd = bfs_levels(transition_, 0, false);
    const auto bwd = bfs_levels(transition_, 0, true);
    for (std::size_t i = 0; i < n; ++i) {
        if (fwd[i] < 0 || bwd[i] < 0) throw NonErgodic("transition matrix is reducible");
    }
    // Aperiodicity: gcd of (level[u] + 1 - level[v]) over positive edges is 1.
    uint64_t period = 0;
    for (std::size_t u = 0; u < n; ++u) {
        for (std::size_t v = 0; v < n; ++v) {
            if (transition_[u][v] > 0.0) {
                const auto diff = static_cast<int64_t>(fwd[u]) + 1 - static_cast<int64_t>(fwd[v]);
                period = gcd_u64(period, static_cast<uint64_t>(diff < 0 ? -diff : diff));
            }
        }
    }
    if (period != 1) throw NonErgodic("transition matrix is periodic");

    std::vector<double> pi(n, 1.0 / double(n));
    std::vector<double> next(n);
    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        for (std::size_t j = 0; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) acc += pi[i] * transition_[i][j];
            next[j] = acc;
        }
        double delta = 0.0;
        double sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            delta = std::max(delta, std::fabs(next[j] - pi[j]));
            sum += next[j];
        }
        for (std::size_t j = 0; j < n; ++j) pi[j] = next[j] / sum;
        if (delta < tol) return pi;
    }
    throw NonErgodic("power iteration did not converge; chain may be reducible or periodic");
}

bool sample_drop(const CongestionState& state, Rng& rng) { return rng.bernoulli(state.drop_rate); }

}  // namespace iovsim
