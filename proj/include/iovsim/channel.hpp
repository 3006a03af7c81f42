#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "iovsim/rng.hpp"

namespace iovsim {

/// One congestion level of the shared channel.
struct CongestionState {
    double drop_rate = 0.0;  // probability a transmitted packet is dropped this slot
    std::string label;
};

/// Markov-modulated congestion model: a row-stochastic transition matrix
/// over congestion states, advanced once per time slot.
class MarkovChannel {
public:
    /// Validates row-stochasticity (1e-9), entry ranges and the initial index.
    MarkovChannel(std::vector<CongestionState> states, std::vector<std::vector<double>> transition,
                  std::size_t initial_state = 0);

    /// The default 4-state chain: drop rates {0.1, 0.35, 0.2, 0.3},
    /// 0.995 self-transition, remainder spread evenly. The strong
    /// persistence produces congestion episodes long enough to forecast.
    static MarkovChannel default_chain();

    std::size_t num_states() const { return states_.size(); }
    std::size_t current_index() const { return current_; }
    const CongestionState& current() const { return states_[current_]; }
    const CongestionState& state(std::size_t i) const { return states_[i]; }
    const std::vector<std::vector<double>>& transition() const { return transition_; }

    /// Advance one slot: sample the next state from the current row.
    const CongestionState& step(Rng& rng);

    /// Left eigenvector of the transition matrix (power iteration).
    /// Throws NonErgodic if the iteration does not converge.
    std::vector<double> stationary_distribution(std::size_t max_iter = 100000,
                                                double tol = 1e-12) const;

private:
    std::vector<CongestionState> states_;
    std::vector<std::vector<double>> transition_;
    std::size_t current_ = 0;
};

/// True with probability state.drop_rate.
bool sample_drop(const CongestionState& state, Rng& rng);

}  // namespace iovsim
