#include "iovsim/metrics.hpp"

#include <cmath>

#include "iovsim/errors.hpp"

namespace iovsim {

namespace {

void check_lengths(std::span<const double> y, std::span<const double> yhat) {
    if (y.size() != yhat.size()) throw LengthMismatch("metric inputs have different lengths");
    if (y.empty()) throw EmptyInput("metric inputs are empty");
}

}  // namespace

double rmse(std::span<const double> y, std::span<const double> yhat) {
    check_lengths(y, yhat);
    double acc = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double d = y[i] - yhat[i];
        acc += d * d;
    }
    return std::sqrt(acc / double(y.size()));
}

RmspeResult rmspe(std::span<const double> y, std::span<const double> yhat) {
    check_lengths(y, yhat);
    RmspeResult res;
    double acc = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] == 0.0) {
            res.excluded_zeros += 1;
            continue;
        }
        const double r = (y[i] - yhat[i]) / y[i];
        acc += r * r;
        n += 1;
    }
    if (n == 0) throw EmptyInput("rmspe: every target is zero");
    res.value = std::sqrt(acc / double(n)) * 100.0;
    return res;
}

double accuracy(std::span<const double> y, std::span<const double> yhat, double tol) {
    check_lengths(y, yhat);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double denom = std::max(std::fabs(y[i]), 1.0);
        if (std::fabs(y[i] - yhat[i]) / denom <= tol) hits += 1;
    }
    return 100.0 * double(hits) / double(y.size());
}

}  // namespace iovsim
