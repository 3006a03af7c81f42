#pragma once

#include <cstddef>

// Data-parallel arithmetic kernels behind the forecaster's inner loops.
//
// Each kernel exists as a scalar reference implementation and, on x86-64
// hosts with AVX2+FMA, a vectorized variant. The backend is chosen once at
// runtime (overridable via set_backend() or IOVSIM_BACKEND=scalar|avx2);
// the two variants are equivalence-tested against each other.

namespace iovsim::kern {

enum class Backend { Scalar, Avx2 };

Backend active_backend();
bool backend_supported(Backend b);
/// Force a backend; throws ConfigError if unsupported on this host.
void set_backend(Backend b);
const char* backend_name(Backend b);

/// y += A * x for row-major A (rows x cols), |x| = cols, |y| = rows.
void matvec_acc(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y);

/// y += A^T * x for row-major A (rows x cols), |x| = rows, |y| = cols.
void matvec_t_acc(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y);

/// y += alpha * x
void axpy(double alpha, const double* x, double* y, std::size_t n);

double dot(const double* x, const double* y, std::size_t n);

/// out[i] = exp(in[i])
void vexp(const double* in, double* out, std::size_t n);

/// out[i] = 1 / (1 + exp(-in[i]))
void vsigmoid(const double* in, double* out, std::size_t n);

/// out[i] = tanh(in[i])
void vtanh(const double* in, double* out, std::size_t n);

namespace scalar {
void matvec_acc(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y);
void matvec_t_acc(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double dot(const double* x, const double* y, std::size_t n);
void vexp(const double* in, double* out, std::size_t n);
void vsigmoid(const double* in, double* out, std::size_t n);
void vtanh(const double* in, double* out, std::size_t n);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
void matvec_acc(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y);
void matvec_t_acc(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double dot(const double* x, const double* y, std::size_t n);
void vexp(const double* in, double* out, std::size_t n);
void vsigmoid(const double* in, double* out, std::size_t n);
void vtanh(const double* in, double* out, std::size_t n);
}  // namespace avx2
#endif

}  // namespace iovsim::kern
