#pragma once

#include <filesystem>

#include "iovsim/train.hpp"

namespace iovsim {

/// Either kind of trained forecaster, as loaded from disk.
struct Checkpoint {
    ModelKind kind = ModelKind::Lstm;
    Trained<StackedLstm> lstm;
    Trained<StackedRnn> rnn;

    std::size_t seq_len() const { return kind == ModelKind::Lstm ? lstm.cfg.seq_len : rnn.cfg.seq_len; }
    double threshold_hint() const {
        return kind == ModelKind::Lstm ? lstm.threshold_hint : rnn.threshold_hint;
    }
};

// Self-describing text format ("iovsim-checkpoint v1"): dimensions, train
// config, normalization extrema and every parameter in visit order at full
// double precision. Byte-stable for identical training runs.
void save_checkpoint(const Trained<StackedLstm>& model, const std::filesystem::path& file);
void save_checkpoint(const Trained<StackedRnn>& model, const std::filesystem::path& file);
Checkpoint load_checkpoint(const std::filesystem::path& file);

}  // namespace iovsim
