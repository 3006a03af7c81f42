#pragma once

#include <cstdint>
#include <deque>
#include <span>
#include <vector>

#include "iovsim/clusterer.hpp"
#include "iovsim/config.hpp"
#include "iovsim/simulator.hpp"

namespace iovsim {

enum class SchedMode { Fifo, ProactivePriority };

struct SchedulerPolicy {
    SchedMode mode = SchedMode::Fifo;
    double congestion_threshold = 0.0;  // predicted CongDiff above which priority mode engages
    int64_t horizon = 1;                // prediction offset, in CongDiff windows
};

/// Per-slot evaluation record of a managed run. Safety/normal split is the
/// ground-truth packet class (size <= 100 bytes).
struct SlotReport {
    int64_t slot_index = 0;
    double predicted_cong = 0.0;
    int64_t actual_cong = 0;  // CongDiff of the most recently completed window
    double safety_delivery_ratio = 1.0;
    double normal_delivery_ratio = 1.0;
    double safety_mean_delay_s = 0.0;
    double normal_mean_delay_s = 0.0;
    // attempt counters backing the ratios (kept for weighting, not in the CSV schema)
    int64_t safety_sent = 0;
    int64_t safety_delivered = 0;
    int64_t normal_sent = 0;
    int64_t normal_delivered = 0;
};

/// (prediction made at the previous window boundary, realized CongDiff)
struct WindowPrediction {
    int64_t window_index = 0;
    double predicted = 0.0;
    int64_t actual = 0;
};

/// Source of next-window CongDiff predictions; implemented by the trained
/// forecaster. Predictions must be pure (no RNG, no feedback within a run).
class CongPredictor {
public:
    virtual ~CongPredictor() = default;
    virtual std::size_t window_length() const = 0;
    virtual double predict_next(std::span<const double> trailing_cong_diff) = 0;
};

/// Transmit queue with the policy ordering. Under active priority mode,
/// Critical precedes NonCritical and ties order by (priority, ttl,
/// gen_time, id); otherwise strict arrival order. A bounded queue drops
/// the lowest-ordered tail entry on overflow.
struct QueueEntry {
    uint64_t packet_index = 0;  // into the engine's packet table
    PacketClass cls = PacketClass::NonCritical;
    int priority = 0;
    int ttl = 0;
    double gen_time_s = 0.0;
    uint64_t arrival_seq = 0;
    bool is_retx = false;
};

/// Strict-weak ordering used under active priority mode.
bool priority_order(const QueueEntry& a, const QueueEntry& b);

class TxQueue {
public:
    explicit TxQueue(int64_t capacity = 0) : capacity_(capacity) {}  // 0 = unlimited

    /// Returns the overflow victim, if the capacity forced one out.
    std::optional<QueueEntry> enqueue(const QueueEntry& e, bool priority_active);

    /// Next packet to transmit under the current mode: the best-ordered
    /// entry when priority mode is active, the oldest arrival otherwise.
    QueueEntry pop(bool priority_active);

    bool empty() const { return entries_.empty(); }
    std::size_t size() const { return entries_.size(); }
    std::deque<QueueEntry>& entries() { return entries_; }

private:
    std::deque<QueueEntry> entries_;  // kept in arrival order
    int64_t capacity_;
};

struct ManagedRunResult {
    std::vector<SlotReport> slots;
    std::vector<WindowPrediction> window_log;
    RunResult sim;
};

/// Managed simulation: same engine as simulator::run plus a service-capacity
/// queue, per-slot predictions, and the policy ordering. With
/// SchedMode::Fifo (or a never-exceeded threshold) outcomes match the
/// unmanaged run exactly under identical seeds and capacity.
ManagedRunResult run_managed(const SimConfig& cfg, CongPredictor* predictor,
                             const ClusterModel* clusters, const SchedulerPolicy& policy);

struct ClassDelta {
    double delivery_ratio_delta = 0.0;  // a minus b, attempt-weighted
    double mean_delay_delta_s = 0.0;    // a minus b, delivery-weighted
};

struct PolicyComparison {
    ClassDelta safety;
    ClassDelta normal;
    double prediction_rmse_a = 0.0;
    double prediction_rmse_b = 0.0;
    int64_t slots = 0;
};

/// Paired comparison of two managed runs over the same scenario.
/// Throws LengthMismatch when slot counts differ.
PolicyComparison compare_policies(const ManagedRunResult& a, const ManagedRunResult& b);

void export_slot_reports(const std::vector<SlotReport>& slots, const std::filesystem::path& file);
void export_comparison(const PolicyComparison& cmp, const std::filesystem::path& csv_file,
                       const std::filesystem::path& text_file);

}  // namespace iovsim
