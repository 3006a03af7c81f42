#include "iovsim/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "engine.hpp"
#include "iovsim/errors.hpp"

namespace iovsim {

bool priority_order(const QueueEntry& a, const QueueEntry& b) {
    if (a.cls != b.cls) return a.cls == PacketClass::Critical;
    if (a.priority != b.priority) return a.priority < b.priority;
    if (a.ttl != b.ttl) return a.ttl < b.ttl;
    if (a.gen_time_s != b.gen_time_s) return a.gen_time_s < b.gen_time_s;
    return a.arrival_seq < b.arrival_seq;
}

std::optional<QueueEntry> TxQueue::enqueue(const QueueEntry& e, bool priority_active) {
    entries_.push_back(e);
    if (capacity_ > 0 && int64_t(entries_.size()) > capacity_) {
        // evict the lowest-ordered entry: worst under the active ordering,
        // the newest arrival otherwise
        auto victim = entries_.end() - 1;
        if (priority_active) {
            victim = entries_.begin();
            for (auto it = entries_.begin() + 1; it != entries_.end(); ++it) {
                if (!priority_order(*it, *victim)) victim = it;
            }
        }
        const QueueEntry v = *victim;
        entries_.erase(victim);
        return v;
    }
    return std::nullopt;
}

QueueEntry TxQueue::pop(bool priority_active) {
    if (entries_.empty()) throw InternalError("pop from empty transmit queue");
    auto best = entries_.begin();
    if (priority_active) {
        for (auto it = entries_.begin() + 1; it != entries_.end(); ++it) {
            if (priority_order(*it, *best)) best = it;
        }
    }
    const QueueEntry e = *best;
    entries_.erase(best);
    return e;
}

ManagedRunResult run_managed(const SimConfig& cfg, CongPredictor* predictor,
                             const ClusterModel* clusters, const SchedulerPolicy& policy) {
    detail::EngineOptions opt;
    opt.policy = policy;
    opt.predictor = predictor;
    opt.clusters = clusters;
    opt.collect_slots = true;
    return detail::run_engine(cfg, opt);
}

PolicyComparison compare_policies(const ManagedRunResult& a, const ManagedRunResult& b) {
    if (a.slots.size() != b.slots.size())
        throw LengthMismatch("policy comparison needs equal slot counts");
    PolicyComparison cmp;
    cmp.slots = int64_t(a.slots.size());

    // attempt-weighted per-slot deltas; weights are the combined per-slot attempts
    double num[2] = {0, 0}, den[2] = {0, 0};
    double dnum[2] = {0, 0}, dden[2] = {0, 0};
    for (std::size_t i = 0; i < a.slots.size(); ++i) {
        const SlotReport& ra = a.slots[i];
        const SlotReport& rb = b.slots[i];
        const double ws = double(ra.safety_sent + rb.safety_sent);
        const double wn = double(ra.normal_sent + rb.normal_sent);
        num[0] += ws * (ra.safety_delivery_ratio - rb.safety_delivery_ratio);
        num[1] += wn * (ra.normal_delivery_ratio - rb.normal_delivery_ratio);
        den[0] += ws;
        den[1] += wn;
        const double ds = double(ra.safety_delivered + rb.safety_delivered);
        const double dn = double(ra.normal_delivered + rb.normal_delivered);
        dnum[0] += ds * (ra.safety_mean_delay_s - rb.safety_mean_delay_s);
        dnum[1] += dn * (ra.normal_mean_delay_s - rb.normal_mean_delay_s);
        dden[0] += ds;
        dden[1] += dn;
    }
    cmp.safety.delivery_ratio_delta = den[0] > 0 ? num[0] / den[0] : 0.0;
    cmp.normal.delivery_ratio_delta = den[1] > 0 ? num[1] / den[1] : 0.0;
    cmp.safety.mean_delay_delta_s = dden[0] > 0 ? dnum[0] / dden[0] : 0.0;
    cmp.normal.mean_delay_delta_s = dden[1] > 0 ? dnum[1] / dden[1] : 0.0;

    auto pred_rmse = [](const std::vector<WindowPrediction>& log) {
        if (log.empty()) return 0.0;
        double acc = 0.0;
        for (const auto& w : log) {
            const double d = w.predicted - double(w.actual);
            acc += d * d;
        }
        return std::sqrt(acc / double(log.size()));
    };
    cmp.prediction_rmse_a = pred_rmse(a.window_log);
    cmp.prediction_rmse_b = pred_rmse(b.window_log);
    return cmp;
}

namespace {

std::string f6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

}  // namespace

void export_slot_reports(const std::vector<SlotReport>& slots, const std::filesystem::path& file) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw IoError("cannot write " + file.string());
    out << "slot_index,predicted_cong,actual_cong,safety_delivery_ratio,normal_delivery_ratio,"
           "safety_mean_delay_s,normal_mean_delay_s\n";
    for (const auto& s : slots) {
        out << s.slot_index << ',' << f6(s.predicted_cong) << ',' << s.actual_cong << ','
            << f6(s.safety_delivery_ratio) << ',' << f6(s.normal_delivery_ratio) << ','
            << f6(s.safety_mean_delay_s) << ',' << f6(s.normal_mean_delay_s) << '\n';
    }
}

void export_comparison(const PolicyComparison& cmp, const std::filesystem::path& csv_file,
                       const std::filesystem::path& text_file) {
    {
        std::ofstream out(csv_file, std::ios::binary);
        if (!out) throw IoError("cannot write " + csv_file.string());
        out << "class,delivery_ratio_delta,mean_delay_delta_s\n";
        out << "safety," << f6(cmp.safety.delivery_ratio_delta) << ','
            << f6(cmp.safety.mean_delay_delta_s) << '\n';
        out << "normal," << f6(cmp.normal.delivery_ratio_delta) << ','
            << f6(cmp.normal.mean_delay_delta_s) << '\n';
        out << "prediction_rmse_a," << f6(cmp.prediction_rmse_a) << ",\n";
        out << "prediction_rmse_b," << f6(cmp.prediction_rmse_b) << ",\n";
    }
    {
        std::ofstream out(text_file, std::ios::binary);
        if (!out) throw IoError("cannot write " + text_file.string());
        char buf[256];
        out << "policy comparison (A - B) over " << cmp.slots << " slots\n";
        std::snprintf(buf, sizeof buf, "%-8s %22s %22s\n", "class", "delivery_ratio_delta",
                      "mean_delay_delta_s");
        out << buf;
        std::snprintf(buf, sizeof buf, "%-8s %22.6f %22.6f\n", "safety",
                      cmp.safety.delivery_ratio_delta, cmp.safety.mean_delay_delta_s);
        out << buf;
        std::snprintf(buf, sizeof buf, "%-8s %22.6f %22.6f\n", "normal",
                      cmp.normal.delivery_ratio_delta, cmp.normal.mean_delay_delta_s);
        out << buf;
        std::snprintf(buf, sizeof buf, "prediction rmse: A=%.6f B=%.6f\n", cmp.prediction_rmse_a,
                      cmp.prediction_rmse_b);
        out << buf;
    }
}

}  // namespace iovsim
