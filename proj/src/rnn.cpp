#include "iovsim/rnn.hpp"

#include <cmath>

#include "iovsim/errors.hpp"
#include "iovsim/kernels.hpp"

namespace iovsim {

StackedRnn StackedRnn::init(std::size_t input_dim, const std::vector<std::size_t>& hidden_sizes,
                            Rng& rng) {
    if (hidden_sizes.empty()) throw ConfigError("RNN needs at least one hidden layer");
    StackedRnn net;
    std::size_t in = input_dim;
    for (std::size_t hid : hidden_sizes) {
        if (hid == 0) throw ConfigError("hidden layer width must be positive");
        RnnLayerParams layer(in, hid);
        const double scale = 1.0 / std::sqrt(double(hid));
        for (double& v : layer.w_x.data) v = rng.uniform(-scale, scale);
        for (double& v : layer.w_h.data) v = rng.uniform(-scale, scale);
        net.layers.push_back(std::move(layer));
        in = hid;
    }
    net.head.w.resize(in);
    const double scale = 1.0 / std::sqrt(double(in));
    for (double& v : net.head.w) v = rng.uniform(-scale, scale);
    net.head.b = 0.0;
    return net;
}

StackedRnn StackedRnn::zeros_like(const StackedRnn& other) {
    StackedRnn net;
    for (const auto& layer : other.layers)
        net.layers.emplace_back(layer.input_dim, layer.hidden_dim);
    net.head.w.assign(other.head.w.size(), 0.0);
    net.head.b = 0.0;
    return net;
}

std::size_t StackedRnn::num_params() const {
    std::size_t n = head.w.size() + 1;
    for (const auto& layer : layers) n += layer.num_params();
    return n;
}

std::vector<double> forward_sequence(const StackedRnn& net, const std::vector<Vector>& xs,
                                     RnnTrace* trace) {
    if (xs.empty()) throw DimensionMismatch("forward_sequence: empty sequence");
    const std::size_t T = xs.size();
    const std::size_t L = net.layers.size();

    RnnTrace local;
    RnnTrace& tr = trace ? *trace : local;
    tr.seq_len = T;
    tr.inputs = xs;
    tr.hidden.resize(L);
    for (std::size_t l = 0; l < L; ++l) tr.hidden[l].resize(T);

    std::vector<double> preds(T);
    std::vector<Vector> states(L);
    for (std::size_t l = 0; l < L; ++l) states[l].assign(net.layers[l].hidden_dim, 0.0);

    Vector z;
    for (std::size_t t = 0; t < T; ++t) {
        std::span<const double> input(xs[t]);
        for (std::size_t l = 0; l < L; ++l) {
            const RnnLayerParams& p = net.layers[l];
            if (input.size() != p.input_dim) throw DimensionMismatch("rnn forward: input size");
            z.assign(p.b.begin(), p.b.end());
            kern::matvec_acc(p.w_x.data.data(), p.w_x.rows, p.w_x.cols, input.data(), z.data());
            kern::matvec_acc(p.w_h.data.data(), p.w_h.rows, p.w_h.cols, states[l].data(),
                             z.data());
            kern::vtanh(z.data(), z.data(), p.hidden_dim);
            states[l] = z;
            tr.hidden[l][t] = states[l];
            input = std::span<const double>(tr.hidden[l][t]);
        }
        preds[t] = net.head.b + kern::dot(net.head.w.data(), states[L - 1].data(),
                                          net.head.w.size());
    }
    return preds;
}

void backward(const StackedRnn& net, const RnnTrace& trace, std::span<const double> dpreds,
              StackedRnn& grads) {
    const std::size_t T = trace.seq_len;
    const std::size_t L = net.layers.size();
    if (dpreds.size() != T) throw TraceMismatch("backward: dpreds length");
    if (trace.hidden.size() != L) throw TraceMismatch("backward: trace layer count");

    std::vector<std::vector<Vector>> dh_in(L);
    const std::size_t top = L - 1;
    dh_in[top].assign(T, Vector(net.layers[top].hidden_dim, 0.0));
    for (std::size_t t = 0; t < T; ++t) {
        const Vector& h_top = trace.hidden[top][t];
        kern::axpy(dpreds[t], net.head.w.data(), dh_in[top][t].data(), h_top.size());
        kern::axpy(dpreds[t], h_top.data(), grads.head.w.data(), h_top.size());
        grads.head.b += dpreds[t];
    }

    Vector dh, dz, dh_prev, dx;
    for (std::size_t l = L; l-- > 0;) {
        const RnnLayerParams& p = net.layers[l];
        RnnLayerParams& gp = grads.layers[l];
        const std::size_t h = p.hidden_dim;
        const std::size_t d = p.input_dim;

        if (l > 0) dh_in[l - 1].assign(T, Vector(net.layers[l - 1].hidden_dim, 0.0));

        dh_prev.assign(h, 0.0);
        for (std::size_t t = T; t-- > 0;) {
            dh = dh_in[l][t];
            kern::axpy(1.0, dh_prev.data(), dh.data(), h);

            const Vector& ht = trace.hidden[l][t];
            dz.resize(h);
            for (std::size_t j = 0; j < h; ++j) dz[j] = dh[j] * (1.0 - ht[j] * ht[j]);

            const double* x = l == 0 ? trace.inputs[t].data() : trace.hidden[l - 1][t].data();
            const double* h_prev = t > 0 ? trace.hidden[l][t - 1].data() : nullptr;
            dh_prev.assign(h, 0.0);
            dx.assign(d, 0.0);
            for (std::size_t j = 0; j < h; ++j) {
                if (dz[j] != 0.0) {
                    kern::axpy(dz[j], x, gp.w_x.row(j), d);
                    if (h_prev) kern::axpy(dz[j], h_prev, gp.w_h.row(j), h);
                }
            }
            kern::axpy(1.0, dz.data(), gp.b.data(), h);
            kern::matvec_t_acc(p.w_x.data.data(), h, d, dz.data(), dx.data());
            kern::matvec_t_acc(p.w_h.data.data(), h, h, dz.data(), dh_prev.data());
            if (l > 0) kern::axpy(1.0, dx.data(), dh_in[l - 1][t].data(), d);
        }
    }
}

}  // namespace iovsim
