// iovsim — congestion dataset generation, forecasting, packet clustering
// and proactive-scheduling evaluation for simulated vehicular networks.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include <CLI11.hpp>

#include "iovsim/checkpoint.hpp"
#include "iovsim/clusterer.hpp"
#include "iovsim/config.hpp"
#include "iovsim/errors.hpp"
#include "iovsim/manifest.hpp"
#include "iovsim/metrics.hpp"
#include "iovsim/scheduler.hpp"
#include "iovsim/simulator.hpp"
#include "iovsim/train.hpp"

namespace fs = std::filesystem;
using namespace iovsim;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitInternal = 4;

std::vector<std::size_t> parse_layers(const std::string& spec) {
    std::vector<std::size_t> out;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            const long v = std::stol(item);
            if (v <= 0) throw std::invalid_argument(item);
            out.push_back(std::size_t(v));
        } catch (const std::exception&) {
            throw ConfigError("bad --layers entry: '" + item + "'");
        }
    }
    if (out.empty()) throw ConfigError("--layers must name at least one width");
    return out;
}

SimConfig load_config(const std::string& path) {
    if (path.empty()) return SimConfig{};
    if (!fs::exists(path)) throw ConfigError("config file not found: " + path);
    return parse_config_file(path);
}

struct TrainFlags {
    std::string dataset;
    std::string out_dir;
    std::string layers = "64";
    std::string kind = "lstm";
    uint64_t seed = 1;
    std::size_t batch = 64;
    std::size_t epochs = 200;
    std::size_t seq_len = 32;
    std::size_t horizon = 1;
    double lr = 1e-3;
    double split = 0.7;
    bool time_feature = false;
};

std::vector<double> cong_diff_series(const std::vector<CongestionRecord>& records,
                                     std::vector<double>* times) {
    std::vector<double> series;
    series.reserve(records.size());
    for (const auto& r : records) {
        series.push_back(double(r.cong_diff));
        if (times) times->push_back(r.cong_act_time_s);
    }
    return series;
}

template <class Net>
void write_predictions_csv(const Trained<Net>& model, std::span<const double> series,
                           std::span<const double> times, const fs::path& file) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw IoError("cannot write " + file.string());
    out << "target_index,actual,predicted\n";
    const auto& cfg = model.cfg;
    const auto train_end = static_cast<std::size_t>(std::floor(cfg.split * double(series.size())));
    char buf[128];
    for (std::size_t target = cfg.seq_len - 1 + cfg.horizon; target < series.size(); ++target) {
        if (target < train_end) continue;  // test split only
        const std::size_t end = target - cfg.horizon;
        const std::size_t start = end + 1 - cfg.seq_len;
        const std::span<const double> window(series.data() + start, cfg.seq_len);
        const std::span<const double> wt =
            times.empty() ? std::span<const double>{}
                          : std::span<const double>(times.data() + start, cfg.seq_len);
        const double pred = predict(model, window, wt);
        std::snprintf(buf, sizeof buf, "%zu,%.6f,%.6f\n", target, series[target], pred);
        out << buf;
    }
}

int cmd_gen_dataset(const std::string& config_path, const std::string& out_dir, uint64_t seed,
                    bool seed_given, int64_t slots_override) {
    SimConfig cfg = load_config(config_path);
    if (seed_given) cfg.seed = seed;
    if (slots_override >= 0) cfg.n_slots = slots_override;
    cfg.validate();
    if (cfg.n_slots == 0) std::cerr << "warning: n_slots = 0, emitting empty dataset\n";

    const RunResult result = run(cfg);
    fs::create_directories(out_dir);
    export_dataset(result.records, result.trace, out_dir);

    RunManifest m;
    m.command = "gen-dataset";
    m.config_path = config_path;
    m.seed = cfg.seed;
    m.outputs["congestion_csv"] = (fs::path(out_dir) / "congestion.csv").string();
    m.outputs["packets_csv"] = (fs::path(out_dir) / "packets.csv").string();
    m.parameters["n_slots"] = std::to_string(cfg.n_slots);
    write_manifest(m, out_dir);

    double mean_cong = 0.0;
    for (const auto& r : result.records) mean_cong += double(r.cong_diff);
    if (!result.records.empty()) mean_cong /= double(result.records.size());
    int64_t delivered = 0;
    for (const auto& p : result.trace) delivered += p.outcome.delivered ? 1 : 0;
    const double ratio =
        result.trace.empty() ? 1.0 : double(delivered) / double(result.trace.size());
    std::printf("gen-dataset: slots=%lld windows=%zu packets=%zu mean_cong_diff=%.2f "
                "delivery_ratio=%.4f\n",
                static_cast<long long>(cfg.n_slots), result.records.size(), result.trace.size(),
                mean_cong, ratio);
    return 0;
}

TrainConfig to_train_config(const TrainFlags& f) {
    TrainConfig cfg;
    cfg.batch_size = f.batch;
    cfg.n_epochs = f.epochs;
    cfg.hidden_sizes = parse_layers(f.layers);
    cfg.learning_rate = f.lr;
    cfg.seq_len = f.seq_len;
    cfg.horizon = f.horizon;
    cfg.split = f.split;
    cfg.seed = f.seed;
    cfg.use_time_feature = f.time_feature;
    cfg.validate();
    return cfg;
}

int cmd_train(const TrainFlags& f) {
    if (!fs::exists(f.dataset)) throw DataError("dataset not found: " + f.dataset);
    const auto records = import_congestion_csv(f.dataset);
    std::vector<double> times;
    const auto series = cong_diff_series(records, &times);
    const TrainConfig cfg = to_train_config(f);

    fs::create_directories(f.out_dir);
    const fs::path out(f.out_dir);
    const ModelKind kind = model_kind_from_name(f.kind);

    EpochMetrics last{};
    std::size_t params = 0;
    if (kind == ModelKind::Lstm) {
        auto model = train_lstm(series, cfg, cfg.use_time_feature ? times : std::vector<double>{});
        save_checkpoint(model, out / "checkpoint.txt");
        write_metrics_csv(model.history, out / "metrics.csv");
        write_predictions_csv(model, series, cfg.use_time_feature ? times : std::vector<double>{},
                              out / "predictions.csv");
        last = model.history.back();
        params = model.net.num_params();
    } else {
        auto model = train_rnn(series, cfg, cfg.use_time_feature ? times : std::vector<double>{});
        save_checkpoint(model, out / "checkpoint.txt");
        write_metrics_csv(model.history, out / "metrics.csv");
        write_predictions_csv(model, series, cfg.use_time_feature ? times : std::vector<double>{},
                              out / "predictions.csv");
        last = model.history.back();
        params = model.net.num_params();
    }

    RunManifest m;
    m.command = "train";
    m.seed = f.seed;
    m.inputs["dataset"] = f.dataset;
    m.outputs["checkpoint"] = (out / "checkpoint.txt").string();
    m.outputs["metrics_csv"] = (out / "metrics.csv").string();
    m.outputs["predictions_csv"] = (out / "predictions.csv").string();
    m.parameters["kind"] = f.kind;
    m.parameters["layers"] = f.layers;
    m.parameters["batch"] = std::to_string(f.batch);
    m.parameters["epochs"] = std::to_string(f.epochs);
    m.parameters["seq_len"] = std::to_string(f.seq_len);
    m.parameters["horizon"] = std::to_string(f.horizon);
    write_manifest(m, out);

    std::printf("train: kind=%s layers=%s params=%zu epochs=%zu\n", f.kind.c_str(),
                f.layers.c_str(), params, cfg.n_epochs);
    std::printf("train: final train_rmse=%.4f test_rmse=%.4f train_rmspe=%.2f%% "
                "test_rmspe=%.2f%% train_acc=%.2f%% test_acc=%.2f%%\n",
                last.train_rmse, last.test_rmse, last.train_rmspe, last.test_rmspe, last.train_acc,
                last.test_acc);
    return 0;
}

struct SweepRow {
    std::size_t batch;
    std::size_t paper_epochs;
    std::vector<std::size_t> layers;
};

int cmd_sweep(const std::string& dataset, const std::string& out_dir, uint64_t seed,
              std::size_t epochs_base) {
    if (!fs::exists(dataset)) throw DataError("dataset not found: " + dataset);
    const auto records = import_congestion_csv(dataset);
    const auto series = cong_diff_series(records, nullptr);

    // the nine model-structure rows of the categorical study
    const std::vector<SweepRow> rows = {
        {32, 1000, {64}}, {64, 1000, {64}},      {128, 1000, {64}},
        {32, 350, {64}},  {32, 750, {64}},       {32, 1000, {64}},
        {64, 1000, {64}}, {64, 1000, {64, 32}},  {64, 1000, {64, 16}},
    };

    fs::create_directories(out_dir);
    std::ofstream out(fs::path(out_dir) / "sweep.csv", std::ios::binary);
    if (!out) throw IoError("cannot write sweep.csv");
    out << "batch_size,n_epochs,layers,train_acc,test_acc,rmse\n";

    char buf[256];
    for (const auto& row : rows) {
        TrainConfig cfg;
        cfg.batch_size = row.batch;
        cfg.n_epochs = std::max<std::size_t>(
            1, std::size_t(std::llround(double(row.paper_epochs) * double(epochs_base) / 1000.0)));
        cfg.hidden_sizes = row.layers;
        cfg.seed = seed;
        const auto model = train_lstm(series, cfg);
        const auto& em = model.history.back();
        std::string layer_str;
        for (std::size_t i = 0; i < row.layers.size(); ++i)
            layer_str += (i ? "-" : "") + std::to_string(row.layers[i]);
        std::snprintf(buf, sizeof buf, "%zu,%zu,%s,%.4f,%.4f,%.6f\n", row.batch, row.paper_epochs,
                      layer_str.c_str(), em.train_acc, em.test_acc, em.test_rmse);
        out << buf;
        std::printf("sweep: batch=%zu epochs=%zu layers=%s test_rmse=%.4f\n", row.batch,
                    cfg.n_epochs, layer_str.c_str(), em.test_rmse);
    }

    RunManifest m;
    m.command = "sweep";
    m.seed = seed;
    m.inputs["dataset"] = dataset;
    m.outputs["sweep_csv"] = (fs::path(out_dir) / "sweep.csv").string();
    m.parameters["epochs_base"] = std::to_string(epochs_base);
    write_manifest(m, out_dir);
    return 0;
}

int cmd_cluster(const std::string& packets, const std::string& out_dir, uint64_t seed,
                std::size_t k, std::size_t silhouette_sample) {
    if (!fs::exists(packets)) throw DataError("packet trace not found: " + packets);
    const auto trace = import_packets_csv(packets);
    if (trace.size() < k)
        throw TooFewPoints("need at least " + std::to_string(k) + " packets, got " +
                           std::to_string(trace.size()));

    std::vector<FeaturePoint> points;
    points.reserve(trace.size());
    for (const auto& p : trace) {
        const auto f = criticality_features(p.hdr);
        points.push_back({f[0], f[1]});
    }

    Rng rng(seed);
    const FitResult res = fit(points, k, rng);

    // silhouette on a seeded subsample (exact score is O(N^2))
    std::vector<FeaturePoint> sample;
    std::vector<int> sample_labels;
    if (points.size() <= silhouette_sample) {
        for (const auto& p : points) sample.push_back(res.model.normalize(p));
        sample_labels = res.labels;
    } else {
        Rng srng = rng.fork(7);
        for (std::size_t i = 0; i < silhouette_sample; ++i) {
            const auto idx = std::size_t(srng.uniform_int(uint64_t{0}, uint64_t(points.size() - 1)));
            sample.push_back(res.model.normalize(points[idx]));
            sample_labels.push_back(res.labels[idx]);
        }
    }
    const double sil = silhouette(sample, sample_labels);

    fs::create_directories(out_dir);
    const fs::path out(out_dir);
    save_cluster_model(res.model, out / "cluster_model.txt");
    {
        std::ofstream rep(out / "cluster_report.csv", std::ios::binary);
        if (!rep) throw IoError("cannot write cluster_report.csv");
        rep << "packet_id,ttl,priority,label,distance_to_centroid\n";
        char buf[160];
        for (std::size_t i = 0; i < trace.size(); ++i) {
            const auto norm = res.model.normalize(points[i]);
            const auto c = res.model.centroids[std::size_t(res.labels[i])];
            const double d0 = norm[0] - c[0];
            const double d1 = norm[1] - c[1];
            const char* label = std::size_t(res.labels[i]) == res.model.critical_index
                                    ? "Critical"
                                    : "NonCritical";
            std::snprintf(buf, sizeof buf, "%llu,%d,%d,%s,%.6f\n",
                          static_cast<unsigned long long>(trace[i].hdr.packet_id),
                          trace[i].hdr.ttl, trace[i].hdr.priority, label,
                          std::sqrt(d0 * d0 + d1 * d1));
            rep << buf;
        }
    }
    {
        std::ofstream sf(out / "silhouette.txt", std::ios::binary);
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.6f\n", sil);
        sf << buf;
    }

    RunManifest m;
    m.command = "cluster";
    m.seed = seed;
    m.inputs["packets"] = packets;
    m.outputs["cluster_model"] = (out / "cluster_model.txt").string();
    m.outputs["cluster_report"] = (out / "cluster_report.csv").string();
    m.outputs["silhouette"] = (out / "silhouette.txt").string();
    m.parameters["k"] = std::to_string(k);
    write_manifest(m, out_dir);

    std::printf("cluster: k=%zu points=%zu wcss=%.4f iterations=%zu silhouette=%.4f\n", k,
                points.size(), res.wcss, res.iterations, sil);
    return 0;
}

class CheckpointPredictor final : public CongPredictor {
public:
    explicit CheckpointPredictor(Checkpoint ck) : ck_(std::move(ck)) {
        const bool time_feature = ck_.kind == ModelKind::Lstm ? ck_.lstm.cfg.use_time_feature
                                                              : ck_.rnn.cfg.use_time_feature;
        if (time_feature)
            throw ConfigError("evaluate requires a univariate checkpoint (no time feature)");
    }
    std::size_t window_length() const override { return ck_.seq_len(); }
    double predict_next(std::span<const double> trailing) override {
        return ck_.kind == ModelKind::Lstm ? predict(ck_.lstm, trailing)
                                           : predict(ck_.rnn, trailing);
    }

private:
    Checkpoint ck_;
};

int cmd_evaluate(const std::string& config_path, const std::string& checkpoint_path,
                 const std::string& cluster_path, const std::string& out_dir, uint64_t seed,
                 bool seed_given, const std::string& threshold_str) {
    SimConfig cfg = load_config(config_path);
    if (seed_given) cfg.seed = seed;
    if (!fs::exists(checkpoint_path)) throw DataError("checkpoint not found: " + checkpoint_path);
    if (!fs::exists(cluster_path)) throw DataError("cluster model not found: " + cluster_path);

    const Checkpoint ck = load_checkpoint(checkpoint_path);
    CheckpointPredictor predictor(ck);  // pure; shared by both runs
    const ClusterModel clusters = load_cluster_model(cluster_path);

    double threshold;
    if (threshold_str == "auto") {
        threshold = ck.threshold_hint();
    } else {
        try {
            threshold = std::stod(threshold_str);
        } catch (const std::exception&) {
            throw ConfigError("--threshold must be a number or 'auto'");
        }
    }

    if (cfg.slot_capacity_packets == 0)
        std::cerr << "warning: slot_capacity_packets = 0 (unlimited); policies will not differ\n";

    SchedulerPolicy fifo{SchedMode::Fifo, threshold, 1};
    SchedulerPolicy prio{SchedMode::ProactivePriority, threshold, 1};

    const auto run_fifo = run_managed(cfg, &predictor, &clusters, fifo);
    const auto run_prio = run_managed(cfg, &predictor, &clusters, prio);
    const auto cmp = compare_policies(run_prio, run_fifo);

    fs::create_directories(out_dir);
    const fs::path out(out_dir);
    export_slot_reports(run_fifo.slots, out / "slots_fifo.csv");
    export_slot_reports(run_prio.slots, out / "slots_priority.csv");
    export_comparison(cmp, out / "comparison.csv", out / "comparison.txt");

    RunManifest m;
    m.command = "evaluate";
    m.config_path = config_path;
    m.seed = cfg.seed;
    m.inputs["checkpoint"] = checkpoint_path;
    m.inputs["cluster_model"] = cluster_path;
    m.outputs["slots_fifo"] = (out / "slots_fifo.csv").string();
    m.outputs["slots_priority"] = (out / "slots_priority.csv").string();
    m.outputs["comparison_csv"] = (out / "comparison.csv").string();
    m.outputs["comparison_txt"] = (out / "comparison.txt").string();
    char tb[48];
    std::snprintf(tb, sizeof tb, "%.6f", threshold);
    m.parameters["threshold"] = tb;
    write_manifest(m, out_dir);

    std::printf("evaluate: threshold=%.2f safety_delivery_delta=%.6f safety_delay_delta=%.6f "
                "pred_rmse=%.4f\n",
                threshold, cmp.safety.delivery_ratio_delta, cmp.safety.mean_delay_delta_s,
                cmp.prediction_rmse_a);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"IoV congestion management toolkit"};
    app.require_subcommand(1);

    // gen-dataset
    std::string g_config, g_out;
    uint64_t g_seed = 1;
    int64_t g_slots = -1;
    auto* gen = app.add_subcommand("gen-dataset", "simulate and export the congestion dataset");
    gen->add_option("--config", g_config, "run configuration file");
    gen->add_option("--out", g_out, "output directory")->required();
    auto* g_seed_opt = gen->add_option("--seed", g_seed, "master seed");
    gen->add_option("--slots", g_slots, "override n_slots");

    // train
    TrainFlags tf;
    auto* train = app.add_subcommand("train", "train a congestion forecaster");
    train->add_option("--dataset", tf.dataset, "congestion.csv from gen-dataset")->required();
    train->add_option("--out", tf.out_dir, "output directory")->required();
    train->add_option("--seed", tf.seed, "training seed");
    train->add_option("--layers", tf.layers, "hidden layer widths, e.g. 64,16");
    train->add_option("--kind", tf.kind, "lstm or rnn")
        ->check(CLI::IsMember({"lstm", "rnn"}));
    train->add_option("--batch", tf.batch, "batch size");
    train->add_option("--epochs", tf.epochs, "training epochs");
    train->add_option("--seq-len", tf.seq_len, "input window length");
    train->add_option("--horizon", tf.horizon, "prediction offset in windows");
    train->add_option("--lr", tf.lr, "learning rate");
    train->add_option("--split", tf.split, "train fraction");
    train->add_flag("--time-feature", tf.time_feature, "add time-of-day input feature");

    // sweep
    std::string s_dataset, s_out;
    uint64_t s_seed = 1;
    std::size_t s_epochs = 60;
    auto* sweep = app.add_subcommand("sweep", "train the nine model-structure variants");
    sweep->add_option("--dataset", s_dataset, "congestion.csv")->required();
    sweep->add_option("--out", s_out, "output directory")->required();
    sweep->add_option("--seed", s_seed, "training seed");
    sweep->add_option("--epochs", s_epochs, "desk-scale epochs equivalent to the study's 1000");

    // cluster
    std::string c_packets, c_out;
    uint64_t c_seed = 1;
    std::size_t c_k = 2, c_sample = 4096;
    auto* cluster = app.add_subcommand("cluster", "k-means packet criticality model");
    cluster->add_option("--packets", c_packets, "packets.csv")->required();
    cluster->add_option("--out", c_out, "output directory")->required();
    cluster->add_option("--seed", c_seed, "seeding RNG");
    cluster->add_option("--k", c_k, "number of clusters");
    cluster->add_option("--silhouette-sample", c_sample, "points sampled for the silhouette");

    // evaluate
    std::string e_config, e_ckpt, e_cluster, e_out, e_threshold = "auto";
    uint64_t e_seed = 1;
    auto* eval = app.add_subcommand("evaluate", "compare Fifo vs proactive priority policies");
    eval->add_option("--config", e_config, "run configuration file");
    eval->add_option("--checkpoint", e_ckpt, "trained forecaster")->required();
    eval->add_option("--cluster-model", e_cluster, "fitted cluster model")->required();
    eval->add_option("--out", e_out, "output directory")->required();
    auto* e_seed_opt = eval->add_option("--seed", e_seed, "master seed");
    eval->add_option("--threshold", e_threshold, "CongDiff threshold or 'auto'");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (gen->parsed())
            return cmd_gen_dataset(g_config, g_out, g_seed, g_seed_opt->count() > 0, g_slots);
        if (train->parsed()) return cmd_train(tf);
        if (sweep->parsed()) return cmd_sweep(s_dataset, s_out, s_seed, s_epochs);
        if (cluster->parsed()) return cmd_cluster(c_packets, c_out, c_seed, c_k, c_sample);
        if (eval->parsed())
            return cmd_evaluate(e_config, e_ckpt, e_cluster, e_out, e_seed,
                                e_seed_opt->count() > 0, e_threshold);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kExitInternal;
    }
    return kExitUsage;
}
