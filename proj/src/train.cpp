#include "iovsim/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "iovsim/errors.hpp"
#include "iovsim/metrics.hpp"

namespace iovsim {

void TrainConfig::validate() const {
    if (batch_size == 0) throw ConfigError("batch_size must be positive");
    if (n_epochs == 0) throw ConfigError("n_epochs must be positive");
    if (hidden_sizes.empty()) throw ConfigError("at least one hidden layer required");
    if (learning_rate <= 0.0) throw ConfigError("learning_rate must be positive");
    if (seq_len == 0) throw ConfigError("seq_len must be positive");
    if (horizon == 0) throw ConfigError("horizon must be positive");
    if (!(split > 0.0 && split < 1.0)) throw ConfigError("split must be in (0,1)");
    if (accuracy_tol <= 0.0) throw ConfigError("accuracy_tol must be positive");
}

const char* model_kind_name(ModelKind kind) { return kind == ModelKind::Lstm ? "lstm" : "rnn"; }

ModelKind model_kind_from_name(const std::string& name) {
    if (name == "lstm") return ModelKind::Lstm;
    if (name == "rnn") return ModelKind::Rnn;
    throw DataError("unknown model kind: " + name);
}

namespace {

// Adam with bias correction and global-norm gradient clipping.
template <class Net>
struct Adam {
    Net m;
    Net v;
    double lr, beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    int64_t t = 0;

    Adam(const Net& shape, double lr_in)
        : m(Net::zeros_like(shape)), v(Net::zeros_like(shape)), lr(lr_in) {}

    void step(Net& params, Net& grads, double clip_norm) {
        double sq = 0.0;
        visit_params(grads, [&](double* g, std::size_t n) {
            for (std::size_t i = 0; i < n; ++i) sq += g[i] * g[i];
        });
        const double norm = std::sqrt(sq);
        const double scale = (clip_norm > 0.0 && norm > clip_norm) ? clip_norm / norm : 1.0;

        t += 1;
        const double bc1 = 1.0 - std::pow(beta1, double(t));
        const double bc2 = 1.0 - std::pow(beta2, double(t));

        // walk the three structures in lockstep through the fixed visit order
        std::vector<std::pair<double*, std::size_t>> pb, mb, vb;
        visit_params(params, [&](double* p, std::size_t n) { pb.emplace_back(p, n); });
        visit_params(m, [&](double* p, std::size_t n) { mb.emplace_back(p, n); });
        visit_params(v, [&](double* p, std::size_t n) { vb.emplace_back(p, n); });
        std::size_t k = 0;
        visit_params(grads, [&](double* g, std::size_t n) {
            double* p = pb[k].first;
            double* mm = mb[k].first;
            double* vv = vb[k].first;
            for (std::size_t i = 0; i < n; ++i) {
                const double gi = g[i] * scale;
                mm[i] = beta1 * mm[i] + (1.0 - beta1) * gi;
                vv[i] = beta2 * vv[i] + (1.0 - beta2) * gi * gi;
                p[i] -= lr * (mm[i] / bc1) / (std::sqrt(vv[i] / bc2) + eps);
            }
            ++k;
        });
    }
};

struct WindowSet {
    std::vector<std::size_t> train_targets;  // target index in the series
    std::vector<std::size_t> test_targets;
};

WindowSet build_windows(std::size_t n, const TrainConfig& cfg) {
    if (n < cfg.seq_len + cfg.horizon + 1)
        throw InsufficientData("series too short for seq_len + horizon");
    WindowSet ws;
    const auto train_end = static_cast<std::size_t>(std::floor(cfg.split * double(n)));
    for (std::size_t target = cfg.seq_len - 1 + cfg.horizon; target < n; ++target) {
        if (target < train_end) ws.train_targets.push_back(target);
        else ws.test_targets.push_back(target);
    }
    if (ws.train_targets.empty() || ws.test_targets.empty())
        throw InsufficientData("split leaves an empty train or test window set");
    return ws;
}

struct SeriesView {
    std::span<const double> values;   // normalized
    std::span<const double> tod;      // normalized time of day, may be empty
    std::size_t input_dim() const { return tod.empty() ? 1 : 2; }

    // window of inputs ending at target - horizon
    void materialize(std::size_t target, const TrainConfig& cfg, std::vector<Vector>& xs) const {
        const std::size_t end = target - cfg.horizon;  // inclusive
        const std::size_t start = end + 1 - cfg.seq_len;
        xs.resize(cfg.seq_len);
        for (std::size_t k = 0; k < cfg.seq_len; ++k) {
            auto& x = xs[k];
            x.resize(input_dim());
            x[0] = values[start + k];
            if (!tod.empty()) x[1] = tod[start + k];
        }
    }
};

template <class Net, class Trace>
struct EvalBuffers {
    std::vector<Vector> xs;
    Trace trace;
    std::vector<double> preds_y;
    std::vector<double> targets_y;
};

template <class Net, class Trace>
EpochMetrics evaluate(const Net& net, const SeriesView& sv, const WindowSet& ws,
                      const Normalization& norm, const TrainConfig& cfg, std::size_t epoch,
                      std::size_t* excluded_out) {
    EvalBuffers<Net, Trace> buf;
    EpochMetrics em;
    em.epoch = epoch;

    auto run_split = [&](const std::vector<std::size_t>& targets, double& out_rmse,
                         double& out_rmspe, double& out_acc, bool record_excluded) {
        buf.preds_y.clear();
        buf.targets_y.clear();
        for (std::size_t target : targets) {
            sv.materialize(target, cfg, buf.xs);
            const auto preds = forward_sequence(net, buf.xs, nullptr);
            buf.preds_y.push_back(norm.denormalize(preds.back()));
            buf.targets_y.push_back(norm.denormalize(sv.values[target]));
        }
        out_rmse = rmse(buf.targets_y, buf.preds_y);
        const auto rp = rmspe(buf.targets_y, buf.preds_y);
        out_rmspe = rp.value;
        if (record_excluded && excluded_out) *excluded_out = rp.excluded_zeros;
        out_acc = accuracy(buf.targets_y, buf.preds_y, cfg.accuracy_tol);
    };
    run_split(ws.train_targets, em.train_rmse, em.train_rmspe, em.train_acc, false);
    run_split(ws.test_targets, em.test_rmse, em.test_rmspe, em.test_acc, true);
    return em;
}

template <class Net, class Trace>
Trained<Net> train_impl(std::span<const double> series, const TrainConfig& cfg,
                        std::span<const double> times_s) {
    cfg.validate();
    if (cfg.use_time_feature && times_s.size() != series.size())
        throw InsufficientData("time feature requested but timestamps are missing");

    const WindowSet ws = build_windows(series.size(), cfg);
    const auto train_end = static_cast<std::size_t>(std::floor(cfg.split * double(series.size())));

    Trained<Net> out;
    out.cfg = cfg;

    // normalization statistics from the training region only
    double lo = series[0], hi = series[0];
    for (std::size_t i = 0; i < train_end; ++i) {
        lo = std::min(lo, series[i]);
        hi = std::max(hi, series[i]);
    }
    out.norm = Normalization{lo, hi};

    std::vector<double> values(series.size());
    for (std::size_t i = 0; i < series.size(); ++i) values[i] = out.norm.normalize(series[i]);
    std::vector<double> tod;
    if (cfg.use_time_feature) {
        tod.resize(times_s.size());
        for (std::size_t i = 0; i < times_s.size(); ++i)
            tod[i] = std::fmod(times_s[i], 86400.0) / 86400.0;
    }
    SeriesView sv{values, tod};

    // 70th percentile of the training-region series, for the scheduler
    {
        std::vector<double> sorted(series.begin(), series.begin() + long(train_end));
        std::sort(sorted.begin(), sorted.end());
        out.threshold_hint = sorted[static_cast<std::size_t>(0.7 * double(sorted.size() - 1))];
    }

    Rng rng(cfg.seed);
    out.net = Net::init(sv.input_dim(), cfg.hidden_sizes, rng);
    Net grads = Net::zeros_like(out.net);
    Adam<Net> adam(out.net, cfg.learning_rate);

    std::vector<std::size_t> order = ws.train_targets;
    std::vector<Vector> xs;
    Trace trace;
    std::vector<double> dpreds(cfg.seq_len, 0.0);

    for (std::size_t epoch = 1; epoch <= cfg.n_epochs; ++epoch) {
        // Fisher-Yates with the run RNG keeps epochs reproducible
        for (std::size_t i = order.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(rng.uniform_int(uint64_t{0}, uint64_t(i - 1)));
            std::swap(order[i - 1], order[j]);
        }
        std::size_t pos = 0;
        while (pos < order.size()) {
            const std::size_t batch = std::min(cfg.batch_size, order.size() - pos);
            visit_params(grads, [](double* g, std::size_t n) { std::fill(g, g + n, 0.0); });
            for (std::size_t bi = 0; bi < batch; ++bi) {
                const std::size_t target = order[pos + bi];
                sv.materialize(target, cfg, xs);
                const auto preds = forward_sequence(out.net, xs, &trace);
                // MSE on the final step, averaged over the batch
                std::fill(dpreds.begin(), dpreds.end(), 0.0);
                dpreds.back() = 2.0 * (preds.back() - sv.values[target]) / double(batch);
                backward(out.net, trace, dpreds, grads);
            }
            adam.step(out.net, grads, cfg.clip_norm);
            pos += batch;
        }
        out.history.push_back(evaluate<Net, Trace>(out.net, sv, ws, out.norm, cfg, epoch,
                                                   &out.rmspe_excluded_test));
    }
    return out;
}

template <class Net, class Trace>
double predict_impl(const Trained<Net>& model, std::span<const double> window,
                    std::span<const double> window_times_s) {
    if (window.size() != model.cfg.seq_len) throw DimensionMismatch("predict: window length");
    const bool want_time = model.net.input_dim() == 2;
    if (want_time && window_times_s.size() != window.size())
        throw DimensionMismatch("predict: timestamps required for this model");
    std::vector<Vector> xs(window.size());
    for (std::size_t k = 0; k < window.size(); ++k) {
        xs[k].resize(want_time ? 2 : 1);
        xs[k][0] = model.norm.normalize(window[k]);
        if (want_time) xs[k][1] = std::fmod(window_times_s[k], 86400.0) / 86400.0;
    }
    const auto preds = forward_sequence(model.net, xs, nullptr);
    return model.norm.denormalize(preds.back());
}

}  // namespace

Trained<StackedLstm> train_lstm(std::span<const double> series, const TrainConfig& cfg,
                                std::span<const double> times_s) {
    return train_impl<StackedLstm, LstmTrace>(series, cfg, times_s);
}

Trained<StackedRnn> train_rnn(std::span<const double> series, const TrainConfig& cfg,
                              std::span<const double> times_s) {
    return train_impl<StackedRnn, RnnTrace>(series, cfg, times_s);
}

double predict(const Trained<StackedLstm>& model, std::span<const double> window,
               std::span<const double> window_times_s) {
    return predict_impl<StackedLstm, LstmTrace>(model, window, window_times_s);
}

double predict(const Trained<StackedRnn>& model, std::span<const double> window,
               std::span<const double> window_times_s) {
    return predict_impl<StackedRnn, RnnTrace>(model, window, window_times_s);
}

void write_metrics_csv(const std::vector<EpochMetrics>& history,
                       const std::filesystem::path& file) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw IoError("cannot write " + file.string());
    out << "epoch,train_rmse,test_rmse,train_rmspe,test_rmspe,train_acc,test_acc\n";
    char buf[256];
    for (const auto& em : history) {
        std::snprintf(buf, sizeof buf, "%zu,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n", em.epoch,
                      em.train_rmse, em.test_rmse, em.train_rmspe, em.test_rmspe, em.train_acc,
                      em.test_acc);
        out << buf;
    }
}

}  // namespace iovsim
