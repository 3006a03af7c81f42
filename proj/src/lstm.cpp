#include "iovsim/lstm.hpp"

#include <cmath>

#include "iovsim/errors.hpp"
#include "iovsim/kernels.hpp"

namespace iovsim {

LstmLayerParams::LstmLayerParams(std::size_t in, std::size_t hid) : input_dim(in), hidden_dim(hid) {
    for (std::size_t g = 0; g < 4; ++g) {
        w_x[g] = Matrix(hid, in);
        w_h[g] = Matrix(hid, hid);
        b[g] = Vector(hid, 0.0);
    }
}

StackedLstm StackedLstm::init(std::size_t input_dim, const std::vector<std::size_t>& hidden_sizes,
                              Rng& rng) {
    if (hidden_sizes.empty()) throw ConfigError("LSTM needs at least one hidden layer");
    StackedLstm net;
    std::size_t in = input_dim;
    for (std::size_t hid : hidden_sizes) {
        if (hid == 0) throw ConfigError("hidden layer width must be positive");
        LstmLayerParams layer(in, hid);
        const double scale = 1.0 / std::sqrt(double(hid));
        for (std::size_t g = 0; g < 4; ++g) {
            for (double& v : layer.w_x[g].data) v = rng.uniform(-scale, scale);
            for (double& v : layer.w_h[g].data) v = rng.uniform(-scale, scale);
        }
        // forget-gate bias starts open so early training keeps long memory
        std::fill(layer.b[kGateForget].begin(), layer.b[kGateForget].end(), 1.0);
        net.layers.push_back(std::move(layer));
        in = hid;
    }
    net.head.w.resize(in);
    const double scale = 1.0 / std::sqrt(double(in));
    for (double& v : net.head.w) v = rng.uniform(-scale, scale);
    net.head.b = 0.0;
    return net;
}

StackedLstm StackedLstm::zeros_like(const StackedLstm& other) {
    StackedLstm net;
    for (const auto& layer : other.layers)
        net.layers.emplace_back(layer.input_dim, layer.hidden_dim);
    net.head.w.assign(other.head.w.size(), 0.0);
    net.head.b = 0.0;
    return net;
}

std::size_t StackedLstm::num_params() const {
    std::size_t n = head.w.size() + 1;
    for (const auto& layer : layers) n += layer.num_params();
    return n;
}

namespace {

// z = W_x.x + W_h.h_prev + b for one gate
void gate_preact(const Matrix& wx, const Matrix& wh, const Vector& b, std::span<const double> x,
                 const Vector& h_prev, Vector& z) {
    z.assign(b.begin(), b.end());
    kern::matvec_acc(wx.data.data(), wx.rows, wx.cols, x.data(), z.data());
    kern::matvec_acc(wh.data.data(), wh.rows, wh.cols, h_prev.data(), z.data());
}

}  // namespace

LstmCellState cell_forward(const LstmLayerParams& params, std::span<const double> x,
                           const LstmCellState& prev, LstmGateTrace* trace) {
    const std::size_t h = params.hidden_dim;
    if (x.size() != params.input_dim) throw DimensionMismatch("cell_forward: input size");
    if (prev.c.size() != h || prev.h.size() != h)
        throw DimensionMismatch("cell_forward: state size");

    LstmGateTrace local;
    LstmGateTrace& tr = trace ? *trace : local;

    gate_preact(params.w_x[kGateForget], params.w_h[kGateForget], params.b[kGateForget], x, prev.h,
                tr.f);
    gate_preact(params.w_x[kGateInput], params.w_h[kGateInput], params.b[kGateInput], x, prev.h,
                tr.i);
    gate_preact(params.w_x[kGateOutput], params.w_h[kGateOutput], params.b[kGateOutput], x, prev.h,
                tr.o);
    gate_preact(params.w_x[kGateCell], params.w_h[kGateCell], params.b[kGateCell], x, prev.h,
                tr.g);
    kern::vsigmoid(tr.f.data(), tr.f.data(), h);
    kern::vsigmoid(tr.i.data(), tr.i.data(), h);
    kern::vsigmoid(tr.o.data(), tr.o.data(), h);
    kern::vtanh(tr.g.data(), tr.g.data(), h);

    tr.c.resize(h);
    for (std::size_t j = 0; j < h; ++j) tr.c[j] = tr.i[j] * tr.g[j] + tr.f[j] * prev.c[j];
    tr.tanh_c.resize(h);
    kern::vtanh(tr.c.data(), tr.tanh_c.data(), h);

    LstmCellState next;
    next.c = tr.c;
    next.h.resize(h);
    for (std::size_t j = 0; j < h; ++j) next.h[j] = tr.o[j] * tr.tanh_c[j];
    return next;
}

std::vector<double> forward_sequence(const StackedLstm& net, const std::vector<Vector>& xs,
                                     LstmTrace* trace) {
    if (xs.empty()) throw DimensionMismatch("forward_sequence: empty sequence");
    const std::size_t T = xs.size();
    const std::size_t L = net.layers.size();

    LstmTrace local;
    LstmTrace& tr = trace ? *trace : local;
    tr.seq_len = T;
    tr.inputs = xs;
    tr.gates.resize(L);
    tr.hidden.resize(L);
    for (std::size_t l = 0; l < L; ++l) {
        tr.gates[l].resize(T);
        tr.hidden[l].resize(T);
    }

    std::vector<double> preds(T);
    std::vector<LstmCellState> states(L);
    for (std::size_t l = 0; l < L; ++l) {
        states[l].c.assign(net.layers[l].hidden_dim, 0.0);
        states[l].h.assign(net.layers[l].hidden_dim, 0.0);
    }

    for (std::size_t t = 0; t < T; ++t) {
        std::span<const double> input(xs[t]);
        for (std::size_t l = 0; l < L; ++l) {
            states[l] = cell_forward(net.layers[l], input, states[l], &tr.gates[l][t]);
            tr.hidden[l][t] = states[l].h;
            input = std::span<const double>(tr.hidden[l][t]);
        }
        preds[t] = net.head.b + kern::dot(net.head.w.data(), states[L - 1].h.data(),
                                          net.head.w.size());
    }
    return preds;
}

void backward(const StackedLstm& net, const LstmTrace& trace, std::span<const double> dpreds,
              StackedLstm& grads) {
    const std::size_t T = trace.seq_len;
    const std::size_t L = net.layers.size();
    if (dpreds.size() != T) throw TraceMismatch("backward: dpreds length");
    if (trace.gates.size() != L || trace.hidden.size() != L)
        throw TraceMismatch("backward: trace layer count");

    // dh arriving at each layer from above (head for the top layer)
    std::vector<std::vector<Vector>> dh_in(L);
    const std::size_t top = L - 1;
    dh_in[top].assign(T, Vector(net.layers[top].hidden_dim, 0.0));
    for (std::size_t t = 0; t < T; ++t) {
        const Vector& h_top = trace.hidden[top][t];
        kern::axpy(dpreds[t], net.head.w.data(), dh_in[top][t].data(), h_top.size());
        kern::axpy(dpreds[t], h_top.data(), grads.head.w.data(), h_top.size());
        grads.head.b += dpreds[t];
    }

    Vector dh, dc, dz_f, dz_i, dz_o, dz_g, dh_prev, dx;
    for (std::size_t l = L; l-- > 0;) {
        const LstmLayerParams& p = net.layers[l];
        LstmLayerParams& gp = grads.layers[l];
        const std::size_t h = p.hidden_dim;
        const std::size_t d = p.input_dim;

        if (l > 0) dh_in[l - 1].assign(T, Vector(net.layers[l - 1].hidden_dim, 0.0));

        dc.assign(h, 0.0);
        dh_prev.assign(h, 0.0);
        for (std::size_t t = T; t-- > 0;) {
            const LstmGateTrace& g = trace.gates[l][t];
            dh = dh_in[l][t];
            kern::axpy(1.0, dh_prev.data(), dh.data(), h);

            dz_o.resize(h);
            dz_i.resize(h);
            dz_g.resize(h);
            dz_f.resize(h);
            const Vector* c_prev = t > 0 ? &trace.gates[l][t - 1].c : nullptr;
            for (std::size_t j = 0; j < h; ++j) {
                const double tc = g.tanh_c[j];
                dz_o[j] = dh[j] * tc * g.o[j] * (1.0 - g.o[j]);
                dc[j] += dh[j] * g.o[j] * (1.0 - tc * tc);
                dz_i[j] = dc[j] * g.g[j] * g.i[j] * (1.0 - g.i[j]);
                dz_g[j] = dc[j] * g.i[j] * (1.0 - g.g[j] * g.g[j]);
                const double cp = c_prev ? (*c_prev)[j] : 0.0;
                dz_f[j] = dc[j] * cp * g.f[j] * (1.0 - g.f[j]);
                dc[j] *= g.f[j];  // flows to c_{t-1}
            }

            const double* x = l == 0 ? trace.inputs[t].data() : trace.hidden[l - 1][t].data();
            const double* h_prev = t > 0 ? trace.hidden[l][t - 1].data() : nullptr;
            dh_prev.assign(h, 0.0);
            dx.assign(d, 0.0);
            const std::array<const Vector*, 4> dzs = {&dz_f, &dz_i, &dz_o, &dz_g};
            for (std::size_t gate = 0; gate < 4; ++gate) {
                const Vector& dz = *dzs[gate];
                Matrix& dwx = gp.w_x[gate];
                Matrix& dwh = gp.w_h[gate];
                for (std::size_t j = 0; j < h; ++j) {
                    if (dz[j] != 0.0) {
                        kern::axpy(dz[j], x, dwx.row(j), d);
                        if (h_prev) kern::axpy(dz[j], h_prev, dwh.row(j), h);
                    }
                }
                kern::axpy(1.0, dz.data(), gp.b[gate].data(), h);
                kern::matvec_t_acc(p.w_x[gate].data.data(), h, d, dz.data(), dx.data());
                kern::matvec_t_acc(p.w_h[gate].data.data(), h, h, dz.data(), dh_prev.data());
            }
            if (l > 0) kern::axpy(1.0, dx.data(), dh_in[l - 1][t].data(), d);
        }
    }
}

}  // namespace iovsim
