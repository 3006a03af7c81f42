#pragma once

#include <cstddef>
#include <span>

namespace iovsim {

/// sqrt(mean((y - yhat)^2)). Throws EmptyInput / LengthMismatch.
double rmse(std::span<const double> y, std::span<const double> yhat);

struct RmspeResult {
    double value = 0.0;          // percent
    std::size_t excluded_zeros = 0;  // targets dropped because y_i == 0
};

/// sqrt(mean(((y - yhat)/y)^2)) * 100 over the nonzero targets.
RmspeResult rmspe(std::span<const double> y, std::span<const double> yhat);

/// Percent of predictions with |y - yhat| / max(|y|, 1) <= tol.
double accuracy(std::span<const double> y, std::span<const double> yhat, double tol);

}  // namespace iovsim
