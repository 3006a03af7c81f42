#include "iovsim/kernels.hpp"

#include <cstdlib>
#include <cstring>

#include "iovsim/errors.hpp"

namespace iovsim::kern {

namespace {

struct Ops {
    decltype(&scalar::matvec_acc) matvec_acc;
    decltype(&scalar::matvec_t_acc) matvec_t_acc;
    decltype(&scalar::axpy) axpy;
    decltype(&scalar::dot) dot;
    decltype(&scalar::vexp) vexp;
    decltype(&scalar::vsigmoid) vsigmoid;
    decltype(&scalar::vtanh) vtanh;
};

constexpr Ops kScalarOps = {&scalar::matvec_acc, &scalar::matvec_t_acc, &scalar::axpy,
                            &scalar::dot,        &scalar::vexp,         &scalar::vsigmoid,
                            &scalar::vtanh};

#if defined(__x86_64__) || defined(_M_X64)
constexpr Ops kAvx2Ops = {&avx2::matvec_acc, &avx2::matvec_t_acc, &avx2::axpy, &avx2::dot,
                          &avx2::vexp,       &avx2::vsigmoid,     &avx2::vtanh};
#endif

bool host_has_avx2() {
#if defined(__x86_64__) || defined(_M_X64)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Backend pick_default() {
    if (const char* env = std::getenv("IOVSIM_BACKEND")) {
        if (std::strcmp(env, "scalar") == 0) return Backend::Scalar;
        if (std::strcmp(env, "avx2") == 0 && host_has_avx2()) return Backend::Avx2;
    }
    return host_has_avx2() ? Backend::Avx2 : Backend::Scalar;
}

Backend g_backend = pick_default();

const Ops& ops() {
#if defined(__x86_64__) || defined(_M_X64)
    if (g_backend == Backend::Avx2) return kAvx2Ops;
#endif
    return kScalarOps;
}

}  // namespace

Backend active_backend() { return g_backend; }

bool backend_supported(Backend b) { return b == Backend::Scalar || host_has_avx2(); }

void set_backend(Backend b) {
    if (!backend_supported(b)) throw ConfigError("kernel backend not supported on this host");
    g_backend = b;
}

const char* backend_name(Backend b) { return b == Backend::Avx2 ? "avx2" : "scalar"; }

void matvec_acc(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y) {
    ops().matvec_acc(a, rows, cols, x, y);
}

void matvec_t_acc(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y) {
    ops().matvec_t_acc(a, rows, cols, x, y);
}

void axpy(double alpha, const double* x, double* y, std::size_t n) { ops().axpy(alpha, x, y, n); }

double dot(const double* x, const double* y, std::size_t n) { return ops().dot(x, y, n); }

void vexp(const double* in, double* out, std::size_t n) { ops().vexp(in, out, n); }

void vsigmoid(const double* in, double* out, std::size_t n) { ops().vsigmoid(in, out, n); }

void vtanh(const double* in, double* out, std::size_t n) { ops().vtanh(in, out, n); }

}  // namespace iovsim::kern
