#include "iovsim/checkpoint.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "iovsim/errors.hpp"

namespace iovsim {

namespace {

std::string g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

template <class Net>
void save_impl(const Trained<Net>& model, ModelKind kind, const std::filesystem::path& file) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw IoError("cannot write " + file.string());
    const TrainConfig& cfg = model.cfg;
    out << "iovsim-checkpoint v1\n";
    out << "kind " << model_kind_name(kind) << '\n';
    out << "input_dim " << model.net.input_dim() << '\n';
    out << "hidden";
    for (const auto& layer : model.net.layers) out << ' ' << layer.hidden_dim;
    out << '\n';
    out << "seq_len " << cfg.seq_len << '\n';
    out << "horizon " << cfg.horizon << '\n';
    out << "batch_size " << cfg.batch_size << '\n';
    out << "n_epochs " << cfg.n_epochs << '\n';
    out << "learning_rate " << g17(cfg.learning_rate) << '\n';
    out << "split " << g17(cfg.split) << '\n';
    out << "accuracy_tol " << g17(cfg.accuracy_tol) << '\n';
    out << "clip_norm " << g17(cfg.clip_norm) << '\n';
    out << "seed " << cfg.seed << '\n';
    out << "use_time_feature " << (cfg.use_time_feature ? 1 : 0) << '\n';
    out << "norm_min " << g17(model.norm.min) << '\n';
    out << "norm_max " << g17(model.norm.max) << '\n';
    out << "threshold_hint " << g17(model.threshold_hint) << '\n';

    std::size_t count = 0;
    visit_params(const_cast<Net&>(model.net), [&](double*, std::size_t n) { count += n; });
    out << "params " << count << '\n';
    std::size_t col = 0;
    visit_params(const_cast<Net&>(model.net), [&](double* p, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) {
            out << g17(p[i]);
            if (++col % 8 == 0) out << '\n';
            else out << ' ';
        }
    });
    if (col % 8 != 0) out << '\n';
    out << "end\n";
}

template <class Net>
void load_net(std::istream& in, Trained<Net>& model, std::size_t input_dim,
              const std::vector<std::size_t>& hidden, std::size_t expected) {
    Rng dummy(0);
    model.net = Net::init(input_dim, hidden, dummy);
    std::size_t count = 0;
    bool bad = false;
    visit_params(model.net, [&](double* p, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) {
            if (!(in >> p[i])) bad = true;
            ++count;
        }
    });
    if (bad || count != expected) throw DataError("checkpoint: parameter block truncated");
}

}  // namespace

void save_checkpoint(const Trained<StackedLstm>& model, const std::filesystem::path& file) {
    save_impl(model, ModelKind::Lstm, file);
}

void save_checkpoint(const Trained<StackedRnn>& model, const std::filesystem::path& file) {
    save_impl(model, ModelKind::Rnn, file);
}

Checkpoint load_checkpoint(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint: " + file.string());
    std::string line;
    if (!std::getline(in, line) || line != "iovsim-checkpoint v1")
        throw DataError("not an iovsim checkpoint: " + file.string());

    Checkpoint ck;
    TrainConfig cfg;
    std::size_t input_dim = 1;
    std::vector<std::size_t> hidden;
    Normalization norm;
    double threshold_hint = 0.0;
    std::size_t param_count = 0;

    std::string key;
    while (in >> key) {
        if (key == "kind") {
            std::string v;
            in >> v;
            ck.kind = model_kind_from_name(v);
        } else if (key == "input_dim") in >> input_dim;
        else if (key == "hidden") {
            std::getline(in, line);
            std::istringstream ss(line);
            std::size_t h;
            hidden.clear();
            while (ss >> h) hidden.push_back(h);
        } else if (key == "seq_len") in >> cfg.seq_len;
        else if (key == "horizon") in >> cfg.horizon;
        else if (key == "batch_size") in >> cfg.batch_size;
        else if (key == "n_epochs") in >> cfg.n_epochs;
        else if (key == "learning_rate") in >> cfg.learning_rate;
        else if (key == "split") in >> cfg.split;
        else if (key == "accuracy_tol") in >> cfg.accuracy_tol;
        else if (key == "clip_norm") in >> cfg.clip_norm;
        else if (key == "seed") in >> cfg.seed;
        else if (key == "use_time_feature") {
            int v;
            in >> v;
            cfg.use_time_feature = v != 0;
        } else if (key == "norm_min") in >> norm.min;
        else if (key == "norm_max") in >> norm.max;
        else if (key == "threshold_hint") in >> threshold_hint;
        else if (key == "params") {
            in >> param_count;
            break;
        } else {
            throw DataError("checkpoint: unknown key '" + key + "'");
        }
        if (!in) throw DataError("checkpoint: malformed value after '" + key + "'");
    }
    if (hidden.empty()) throw DataError("checkpoint: missing hidden sizes");
    cfg.hidden_sizes = hidden;

    if (ck.kind == ModelKind::Lstm) {
        ck.lstm.cfg = cfg;
        ck.lstm.norm = norm;
        ck.lstm.threshold_hint = threshold_hint;
        load_net(in, ck.lstm, input_dim, hidden, param_count);
    } else {
        ck.rnn.cfg = cfg;
        ck.rnn.norm = norm;
        ck.rnn.threshold_hint = threshold_hint;
        load_net(in, ck.rnn, input_dim, hidden, param_count);
    }
    std::string tail;
    in >> tail;
    if (tail != "end") throw DataError("checkpoint: missing end marker");
    return ck;
}

}  // namespace iovsim
