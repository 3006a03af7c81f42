#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "iovsim/linalg.hpp"
#include "iovsim/rng.hpp"

namespace iovsim {

/// Gate order used throughout: forget, input, output, cell candidate.
enum GateIndex : std::size_t { kGateForget = 0, kGateInput = 1, kGateOutput = 2, kGateCell = 3 };

/// One LSTM layer: four input-weight matrices, four recurrent-weight
/// matrices and four bias vectors.
struct LstmLayerParams {
    std::size_t input_dim = 0;
    std::size_t hidden_dim = 0;
    std::array<Matrix, 4> w_x;  // hidden x input
    std::array<Matrix, 4> w_h;  // hidden x hidden
    std::array<Vector, 4> b;    // hidden

    LstmLayerParams() = default;
    LstmLayerParams(std::size_t in, std::size_t hid);
    std::size_t num_params() const { return 4 * (hidden_dim * input_dim + hidden_dim * hidden_dim + hidden_dim); }
};

struct LstmCellState {
    Vector c;
    Vector h;
};

/// Gate activations of one step, retained for backprop.
struct LstmGateTrace {
    Vector f, i, o, g;  // g is the tanh candidate
    Vector c, tanh_c;
};

/// One cell step: f,i,o = sigmoid(Wx.x + Wh.h + b), g = tanh(...),
/// c = i*g + f*c_prev, h = o*tanh(c). Throws DimensionMismatch.
LstmCellState cell_forward(const LstmLayerParams& params, std::span<const double> x,
                           const LstmCellState& prev, LstmGateTrace* trace = nullptr);

struct OutputHead {
    Vector w;
    double b = 0.0;
};

/// Layered LSTM; layer l consumes layer l-1's hidden sequence, and the
/// affine head maps the last layer's hidden state to a scalar per step.
struct StackedLstm {
    std::vector<LstmLayerParams> layers;
    OutputHead head;

    /// Seeded init: weights uniform in +-1/sqrt(hidden), forget bias 1.
    static StackedLstm init(std::size_t input_dim, const std::vector<std::size_t>& hidden_sizes,
                            Rng& rng);
    static StackedLstm zeros_like(const StackedLstm& other);
    std::size_t num_params() const;
    std::size_t input_dim() const { return layers.empty() ? 0 : layers.front().input_dim; }
};

/// Full activation record of forward_sequence, reusable across calls.
struct LstmTrace {
    std::size_t seq_len = 0;
    std::vector<Vector> inputs;                       // [t] layer-0 input
    std::vector<std::vector<LstmGateTrace>> gates;    // [layer][t]
    std::vector<std::vector<Vector>> hidden;          // [layer][t]
};

/// Runs the stack over a sequence (initial states zero) and returns the
/// per-step head outputs. `trace` may be null when only predictions are
/// needed.
std::vector<double> forward_sequence(const StackedLstm& net, const std::vector<Vector>& xs,
                                     LstmTrace* trace);

/// Gradients of the summed per-step loss with respect to every parameter,
/// via backpropagation through time. `dpreds[t]` is dLoss/dprediction_t.
/// Accumulates into `grads` (zeros_like-shaped). Throws TraceMismatch.
void backward(const StackedLstm& net, const LstmTrace& trace, std::span<const double> dpreds,
              StackedLstm& grads);

/// Enumerate parameter buffers in a fixed order (model and grads share it).
template <class Net, class Fn>
void visit_params(Net& net, Fn&& fn) {
    for (auto& layer : net.layers) {
        for (std::size_t g = 0; g < 4; ++g) {
            fn(layer.w_x[g].data.data(), layer.w_x[g].size());
            fn(layer.w_h[g].data.data(), layer.w_h[g].size());
            fn(layer.b[g].data(), layer.b[g].size());
        }
    }
    fn(net.head.w.data(), net.head.w.size());
    fn(&net.head.b, 1);
}

}  // namespace iovsim
