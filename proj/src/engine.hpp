#pragma once

#include "iovsim/scheduler.hpp"

namespace iovsim::detail {

struct EngineOptions {
    SchedulerPolicy policy;                   // Fifo with threshold 0 by default
    CongPredictor* predictor = nullptr;       // optional
    const ClusterModel* clusters = nullptr;   // optional; without it every packet is NonCritical
    bool collect_slots = false;
};

/// The discrete-event loop shared by simulator::run and run_managed.
ManagedRunResult run_engine(const SimConfig& cfg, const EngineOptions& opt);

}  // namespace iovsim::detail
