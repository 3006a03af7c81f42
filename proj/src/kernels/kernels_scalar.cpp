#include "iovsim/kernels.hpp"

#include <cmath>

// Reference kernels. Deliberately plain loops: these define the semantics
// the vectorized variants are tested against.

namespace iovsim::kern::scalar {

void matvec_acc(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y) {
    for (std::size_t i = 0; i < rows; ++i) {
        const double* row = a + i * cols;
        double acc = 0.0;
        for (std::size_t j = 0; j < cols; ++j) acc += row[j] * x[j];
        y[i] += acc;
    }
}

void matvec_t_acc(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y) {
    for (std::size_t i = 0; i < rows; ++i) {
        const double* row = a + i * cols;
        const double xi = x[i];
        for (std::size_t j = 0; j < cols; ++j) y[j] += xi * row[j];
    }
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double dot(const double* x, const double* y, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

void vexp(const double* in, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = std::exp(in[i]);
}

void vsigmoid(const double* in, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const double x = in[i];
        // exp of a non-positive argument only; no overflow for large |x|
        const double t = std::exp(-std::fabs(x));
        out[i] = (x >= 0.0) ? 1.0 / (1.0 + t) : t / (1.0 + t);
    }
}

void vtanh(const double* in, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = std::tanh(in[i]);
}

}  // namespace iovsim::kern::scalar
