#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "iovsim/linalg.hpp"
#include "iovsim/lstm.hpp"
#include "iovsim/rng.hpp"

namespace iovsim {

/// Benchmark recurrence: h_t = tanh(W_x.x_t + W_h.h_{t-1} + b).
struct RnnLayerParams {
    std::size_t input_dim = 0;
    std::size_t hidden_dim = 0;
    Matrix w_x;
    Matrix w_h;
    Vector b;

    RnnLayerParams() = default;
    RnnLayerParams(std::size_t in, std::size_t hid)
        : input_dim(in), hidden_dim(hid), w_x(hid, in), w_h(hid, hid), b(hid, 0.0) {}
    std::size_t num_params() const {
        return hidden_dim * input_dim + hidden_dim * hidden_dim + hidden_dim;
    }
};

/// Same stacked surface and head as the LSTM, with the plain tanh cell.
struct StackedRnn {
    std::vector<RnnLayerParams> layers;
    OutputHead head;

    static StackedRnn init(std::size_t input_dim, const std::vector<std::size_t>& hidden_sizes,
                           Rng& rng);
    static StackedRnn zeros_like(const StackedRnn& other);
    std::size_t num_params() const;
    std::size_t input_dim() const { return layers.empty() ? 0 : layers.front().input_dim; }
};

struct RnnTrace {
    std::size_t seq_len = 0;
    std::vector<Vector> inputs;
    std::vector<std::vector<Vector>> hidden;  // [layer][t]
};

std::vector<double> forward_sequence(const StackedRnn& net, const std::vector<Vector>& xs,
                                     RnnTrace* trace);

void backward(const StackedRnn& net, const RnnTrace& trace, std::span<const double> dpreds,
              StackedRnn& grads);

template <class Fn>
void visit_params(StackedRnn& net, Fn&& fn) {
    for (auto& layer : net.layers) {
        fn(layer.w_x.data.data(), layer.w_x.size());
        fn(layer.w_h.data.data(), layer.w_h.size());
        fn(layer.b.data(), layer.b.size());
    }
    fn(net.head.w.data(), net.head.w.size());
    fn(&net.head.b, 1);
}

}  // namespace iovsim
