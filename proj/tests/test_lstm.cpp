#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "iovsim/errors.hpp"
#include "iovsim/lstm.hpp"
#include "iovsim/rnn.hpp"
#include "oracles.hpp"

using namespace iovsim;

namespace {

std::vector<Vector> random_sequence(Rng& rng, std::size_t T, std::size_t dim) {
    std::vector<Vector> xs(T);
    for (auto& x : xs) {
        x.resize(dim);
        for (double& v : x) v = rng.uniform(-1.0, 1.0);
    }
    return xs;
}

void randomize(StackedLstm& net, Rng& rng, double lo = -1.0, double hi = 1.0) {
    visit_params(net, [&](double* p, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) p[i] = rng.uniform(lo, hi);
    });
}

void randomize(StackedRnn& net, Rng& rng, double lo = -1.0, double hi = 1.0) {
    visit_params(net, [&](double* p, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) p[i] = rng.uniform(lo, hi);
    });
}

void fill_layer(LstmLayerParams& p, Rng& rng) {
    for (std::size_t g = 0; g < 4; ++g) {
        for (double& v : p.w_x[g].data) v = rng.uniform(-1.0, 1.0);
        for (double& v : p.w_h[g].data) v = rng.uniform(-1.0, 1.0);
        for (double& v : p.b[g]) v = rng.uniform(-1.0, 1.0);
    }
}

// gradient of sum_t dweights[t] * pred_t  (linear losses keep the FD exact)
template <class Net, class Trace>
void check_gradients(Net& net, const std::vector<Vector>& xs, const std::vector<double>& dpreds,
                     double tol = 1e-4) {
    Trace trace;
    forward_sequence(net, xs, &trace);
    Net grads = Net::zeros_like(net);
    backward(net, trace, dpreds, grads);
    const auto analytic = oracle::flatten_params(grads);

    auto loss = [&]() {
        const auto preds = forward_sequence(net, xs, nullptr);
        double acc = 0.0;
        for (std::size_t t = 0; t < preds.size(); ++t) acc += dpreds[t] * preds[t];
        return acc;
    };
    const auto numeric = oracle::fd_gradients(net, loss, 1e-5);
    REQUIRE(analytic.size() == numeric.size());
    for (std::size_t i = 0; i < analytic.size(); ++i) {
        const double denom = std::max({std::fabs(analytic[i]), std::fabs(numeric[i]), 1e-8});
        CHECK(std::fabs(analytic[i] - numeric[i]) / denom < tol);
    }
}

}  // namespace

TEST_CASE("all-zero parameters: gates sit at 0.5 and states at 0") {
    LstmLayerParams p(2, 3);
    LstmCellState prev{Vector(3, 0.0), Vector(3, 0.0)};
    LstmGateTrace tr;
    const Vector x = {0.7, -0.3};
    const auto next = cell_forward(p, x, prev, &tr);
    for (std::size_t j = 0; j < 3; ++j) {
        CHECK(tr.f[j] == doctest::Approx(0.5));
        CHECK(tr.i[j] == doctest::Approx(0.5));
        CHECK(tr.o[j] == doctest::Approx(0.5));
        CHECK(tr.g[j] == doctest::Approx(0.0));
        CHECK(next.c[j] == doctest::Approx(0.0));
        CHECK(next.h[j] == doctest::Approx(0.0));
    }
}

TEST_CASE("zero weights with nonzero previous cell: c = 0.5*c0, h = 0.5*tanh(0.5*c0)") {
    LstmLayerParams p(1, 4);
    const Vector c0 = {0.4, -1.2, 2.0, 0.0};
    LstmCellState prev{c0, Vector(4, 0.0)};
    const Vector x = {3.0};
    const auto next = cell_forward(p, x, prev, nullptr);
    for (std::size_t j = 0; j < 4; ++j) {
        CHECK(next.c[j] == doctest::Approx(0.5 * c0[j]).epsilon(1e-12));
        CHECK(next.h[j] == doctest::Approx(0.5 * std::tanh(0.5 * c0[j])).epsilon(1e-12));
    }
}

TEST_CASE("scalar hidden cell matches the element-wise oracle to 1e-12") {
    Rng rng(31);
    for (int trial = 0; trial < 200; ++trial) {
        LstmLayerParams p(1, 1);
        for (std::size_t g = 0; g < 4; ++g) {
            p.w_x[g].at(0, 0) = rng.uniform(-2.0, 2.0);
            p.w_h[g].at(0, 0) = rng.uniform(-2.0, 2.0);
            p.b[g][0] = rng.uniform(-1.0, 1.0);
        }
        const Vector x = {rng.uniform(-2.0, 2.0)};
        const Vector c0 = {rng.uniform(-2.0, 2.0)};
        const Vector h0 = {rng.uniform(-1.0, 1.0)};
        const auto got = cell_forward(p, x, LstmCellState{c0, h0}, nullptr);
        const auto want = oracle::lstm_cell(p, x, c0, h0);
        CHECK(std::fabs(got.c[0] - want.c[0]) < 1e-12);
        CHECK(std::fabs(got.h[0] - want.h[0]) < 1e-12);
    }
}

TEST_CASE("vectorized cell matches the oracle on 1000 random shapes") {
    Rng rng(57);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto H = std::size_t(rng.uniform_int(1, 16));
        const auto D = std::size_t(rng.uniform_int(1, 8));
        LstmLayerParams p(D, H);
        fill_layer(p, rng);
        Vector x(D), c0(H), h0(H);
        for (auto& v : x) v = rng.uniform(-2.0, 2.0);
        for (auto& v : c0) v = rng.uniform(-2.0, 2.0);
        for (auto& v : h0) v = rng.uniform(-1.0, 1.0);
        LstmGateTrace tr;
        const auto got = cell_forward(p, x, LstmCellState{c0, h0}, &tr);
        const auto want = oracle::lstm_cell(p, x, c0, h0);
        for (std::size_t j = 0; j < H; ++j) {
            CHECK(std::fabs(got.c[j] - want.c[j]) < 1e-12);
            CHECK(std::fabs(got.h[j] - want.h[j]) < 1e-12);
            CHECK(std::fabs(tr.f[j] - want.f[j]) < 1e-12);
            CHECK(std::fabs(tr.i[j] - want.i[j]) < 1e-12);
            CHECK(std::fabs(tr.o[j] - want.o[j]) < 1e-12);
            CHECK(std::fabs(tr.g[j] - want.g[j]) < 1e-12);
        }
    }
}

TEST_CASE("gate ranges hold for extreme inputs") {
    Rng rng(3);
    LstmLayerParams p(2, 4);
    for (std::size_t g = 0; g < 4; ++g) {
        for (double& v : p.w_x[g].data) v = rng.uniform(-30.0, 30.0);
        for (double& v : p.w_h[g].data) v = rng.uniform(-30.0, 30.0);
        for (double& v : p.b[g]) v = rng.uniform(-30.0, 30.0);
    }
    const Vector x = {100.0, -100.0};
    LstmCellState prev{Vector(4, 50.0), Vector(4, -1.0)};
    LstmGateTrace tr;
    const auto next = cell_forward(p, x, prev, &tr);
    for (std::size_t j = 0; j < 4; ++j) {
        CHECK(tr.f[j] >= 0.0);
        CHECK(tr.f[j] <= 1.0);
        CHECK(tr.i[j] >= 0.0);
        CHECK(tr.i[j] <= 1.0);
        CHECK(tr.o[j] >= 0.0);
        CHECK(tr.o[j] <= 1.0);
        CHECK(tr.g[j] >= -1.0);
        CHECK(tr.g[j] <= 1.0);
        CHECK(std::isfinite(next.c[j]));
        CHECK(std::fabs(next.h[j]) <= 1.0);
    }
}

TEST_CASE("dimension mismatches are rejected") {
    LstmLayerParams p(2, 3);
    LstmCellState prev{Vector(3, 0.0), Vector(3, 0.0)};
    CHECK_THROWS_AS(cell_forward(p, Vector{1.0}, prev, nullptr), DimensionMismatch);
    LstmCellState bad{Vector(2, 0.0), Vector(3, 0.0)};
    CHECK_THROWS_AS(cell_forward(p, Vector{1.0, 2.0}, bad, nullptr), DimensionMismatch);
    StackedLstm net;
    CHECK_THROWS_AS(forward_sequence(net, {}, nullptr), DimensionMismatch);
}

TEST_CASE("sequence of one equals a single cell step plus head") {
    Rng rng(5);
    auto net = StackedLstm::init(2, {3}, rng);
    const auto xs = random_sequence(rng, 1, 2);
    const auto preds = forward_sequence(net, xs, nullptr);
    LstmCellState prev{Vector(3, 0.0), Vector(3, 0.0)};
    const auto state = cell_forward(net.layers[0], xs[0], prev, nullptr);
    double want = net.head.b;
    for (std::size_t j = 0; j < 3; ++j) want += net.head.w[j] * state.h[j];
    CHECK(preds[0] == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("all-zero two-layer stack predicts the head bias everywhere") {
    StackedLstm net;
    net.layers.emplace_back(1, 1);
    net.layers.emplace_back(1, 1);
    net.head.w = {0.0};
    net.head.b = 0.37;
    Rng rng(9);
    const auto xs = random_sequence(rng, 5, 1);
    for (double p : forward_sequence(net, xs, nullptr))
        CHECK(p == doctest::Approx(0.37).epsilon(1e-15));
}

TEST_CASE("stacked forward matches the unrolled oracle to 1e-10") {
    Rng rng(41);
    auto net = StackedLstm::init(1, {3, 2}, rng);
    randomize(net, rng);
    const auto xs = random_sequence(rng, 4, 1);
    const auto got = forward_sequence(net, xs, nullptr);
    const auto want = oracle::lstm_forward(net, xs);
    REQUIRE(got.size() == want.size());
    for (std::size_t t = 0; t < got.size(); ++t) CHECK(std::fabs(got[t] - want[t]) < 1e-10);
}

TEST_CASE("zero loss gradient gives zero parameter gradients") {
    Rng rng(13);
    auto net = StackedLstm::init(1, {2}, rng);
    LstmTrace trace;
    const auto xs = random_sequence(rng, 3, 1);
    forward_sequence(net, xs, &trace);
    auto grads = StackedLstm::zeros_like(net);
    backward(net, trace, std::vector<double>(3, 0.0), grads);
    for (double g : oracle::flatten_params(grads)) CHECK(g == 0.0);
}

TEST_CASE("lstm gradients match finite differences (single layer)") {
    Rng rng(17);
    auto net = StackedLstm::init(1, {1}, rng);  // 14 parameters
    CHECK(net.num_params() == 14);
    const auto xs = random_sequence(rng, 5, 1);
    check_gradients<StackedLstm, LstmTrace>(net, xs, {0.0, 0.0, 0.0, 0.0, 1.0});
    check_gradients<StackedLstm, LstmTrace>(net, xs, {0.3, -0.7, 1.2, 0.1, -0.5});
}

TEST_CASE("lstm gradients match finite differences (two-layer, 50 params)") {
    Rng rng(19);
    auto net = StackedLstm::init(1, {2, 1}, rng);
    CHECK(net.num_params() == 50);
    const auto xs = random_sequence(rng, 6, 1);
    check_gradients<StackedLstm, LstmTrace>(net, xs, {0, 0, 0, 0, 0, 1.0});
}

TEST_CASE("duplicated example doubles the gradient exactly") {
    Rng rng(23);
    auto net = StackedLstm::init(1, {2}, rng);
    const auto xs = random_sequence(rng, 4, 1);
    const std::vector<double> dpreds = {0.0, 0.0, 0.0, 0.8};

    LstmTrace trace;
    forward_sequence(net, xs, &trace);
    auto once = StackedLstm::zeros_like(net);
    backward(net, trace, dpreds, once);
    auto twice = StackedLstm::zeros_like(net);
    backward(net, trace, dpreds, twice);
    backward(net, trace, dpreds, twice);

    const auto g1 = oracle::flatten_params(once);
    const auto g2 = oracle::flatten_params(twice);
    for (std::size_t i = 0; i < g1.size(); ++i)
        CHECK(g2[i] == doctest::Approx(2.0 * g1[i]).epsilon(1e-12));
}

TEST_CASE("rnn: zero parameters give h = tanh(b) everywhere") {
    StackedRnn net;
    net.layers.emplace_back(1, 3);
    net.layers[0].b = {0.5, -0.5, 0.0};
    net.head.w = {1.0, 1.0, 1.0};
    net.head.b = 0.0;
    Rng rng(2);
    const auto xs = random_sequence(rng, 4, 1);
    const double expect = std::tanh(0.5) + std::tanh(-0.5) + std::tanh(0.0);
    const auto preds = forward_sequence(net, xs, nullptr);
    // after the first step h feeds back through w_h = 0, so every step matches
    for (double p : preds) CHECK(p == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("rnn gradients match finite differences") {
    Rng rng(29);
    auto net = StackedRnn::init(1, {3}, rng);  // 19 parameters
    CHECK(net.num_params() == 19);
    const auto xs = random_sequence(rng, 6, 1);
    check_gradients<StackedRnn, RnnTrace>(net, xs, {0, 0, 0, 0, 0, 1.0});
    check_gradients<StackedRnn, RnnTrace>(net, xs, {0.2, 0.0, -0.4, 0.9, 0.0, 1.0});
}

TEST_CASE("parameter counts follow 4*(h*d + h^2 + h) per layer plus head") {
    Rng rng(1);
    const auto n1 = StackedLstm::init(1, {64}, rng);
    CHECK(n1.num_params() == 4 * (64 * 1 + 64 * 64 + 64) + 64 + 1);
    const auto n2 = StackedLstm::init(1, {64, 32}, rng);
    CHECK(n2.num_params() ==
          4 * (64 + 64 * 64 + 64) + 4 * (32 * 64 + 32 * 32 + 32) + 32 + 1);
    const auto n3 = StackedLstm::init(1, {64, 16}, rng);
    CHECK(n3.num_params() ==
          4 * (64 + 64 * 64 + 64) + 4 * (16 * 64 + 16 * 16 + 16) + 16 + 1);
}
