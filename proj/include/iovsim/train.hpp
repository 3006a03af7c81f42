#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "iovsim/lstm.hpp"
#include "iovsim/rnn.hpp"

namespace iovsim {

struct TrainConfig {
    std::size_t batch_size = 64;
    std::size_t n_epochs = 200;
    std::vector<std::size_t> hidden_sizes = {64};
    double learning_rate = 1e-3;
    std::size_t seq_len = 32;
    std::size_t horizon = 1;
    double split = 0.7;  // train fraction, time-ordered
    double accuracy_tol = 0.10;
    double clip_norm = 5.0;
    uint64_t seed = 1;
    bool use_time_feature = false;  // optional second input: time of day

    void validate() const;
};

struct EpochMetrics {
    std::size_t epoch = 0;
    double train_rmse = 0.0;
    double test_rmse = 0.0;
    double train_rmspe = 0.0;
    double test_rmspe = 0.0;
    double train_acc = 0.0;
    double test_acc = 0.0;
};

/// Min-max scaling to [0,1] fit on the training split only.
struct Normalization {
    double min = 0.0;
    double max = 1.0;

    double denom() const { return max - min != 0.0 ? max - min : 1.0; }
    double normalize(double v) const { return (v - min) / denom(); }
    double denormalize(double v) const { return v * denom() + min; }
};

enum class ModelKind { Lstm, Rnn };

const char* model_kind_name(ModelKind kind);
ModelKind model_kind_from_name(const std::string& name);

/// A trained forecaster plus everything needed to use and reproduce it.
template <class Net>
struct Trained {
    Net net;
    Normalization norm;
    TrainConfig cfg;
    std::vector<EpochMetrics> history;
    double threshold_hint = 0.0;  // 70th percentile of the training CongDiff
    std::size_t rmspe_excluded_test = 0;  // zero targets dropped in the last test RMSPE
};

/// Sliding-window training on a scalar series with mini-batch Adam.
/// Deterministic given cfg.seed. Throws InsufficientData when the series
/// cannot produce at least one train and one test window. Optional
/// `times_s` supplies the per-entry timestamps for the time-of-day feature.
Trained<StackedLstm> train_lstm(std::span<const double> series, const TrainConfig& cfg,
                                std::span<const double> times_s = {});
Trained<StackedRnn> train_rnn(std::span<const double> series, const TrainConfig& cfg,
                              std::span<const double> times_s = {});

/// Denormalized prediction for the value `horizon` steps past the window
/// end. Window length must equal cfg.seq_len.
double predict(const Trained<StackedLstm>& model, std::span<const double> window,
               std::span<const double> window_times_s = {});
double predict(const Trained<StackedRnn>& model, std::span<const double> window,
               std::span<const double> window_times_s = {});

void write_metrics_csv(const std::vector<EpochMetrics>& history,
                       const std::filesystem::path& file);

}  // namespace iovsim
