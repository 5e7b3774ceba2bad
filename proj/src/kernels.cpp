#include "fastlink/kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <numbers>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fastlink::kernels {

int max_threads() {
  if (const char* env = std::getenv("FASTLINK_THREADS")) {
    try {
      int n = std::stoi(env);
      if (n >= 1) return n;
    } catch (...) {
      // fall through to the OpenMP default
    }
  }
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

Backend default_backend() { return max_threads() > 1 ? Backend::Parallel : Backend::Serial; }

namespace {

// One output row of C = op(A)*op(B). Row-level granularity keeps the
// accumulation order identical between backends.
inline void row_nn(const double* a, const double* b, double* c, int i, int k, int n) {
  const double* ai = a + static_cast<std::size_t>(i) * k;
  double* ci = c + static_cast<std::size_t>(i) * n;
  for (int j = 0; j < n; ++j) ci[j] = 0.0;
  for (int p = 0; p < k; ++p) {
    const double aip = ai[p];
    const double* bp = b + static_cast<std::size_t>(p) * n;
    for (int j = 0; j < n; ++j) ci[j] += aip * bp[j];
  }
}

inline void row_nt(const double* a, const double* b, double* c, int i, int k, int n) {
  const double* ai = a + static_cast<std::size_t>(i) * k;
  double* ci = c + static_cast<std::size_t>(i) * n;
  for (int j = 0; j < n; ++j) {
    const double* bj = b + static_cast<std::size_t>(j) * k;
    double acc = 0.0;
    for (int p = 0; p < k; ++p) acc += ai[p] * bj[p];
    ci[j] = acc;
  }
}

inline void row_tn(const double* a, const double* b, double* c, int i, int k, int m, int n) {
  // A is k x m row-major; column i of A is a[p*m + i].
  double* ci = c + static_cast<std::size_t>(i) * n;
  for (int j = 0; j < n; ++j) ci[j] = 0.0;
  for (int p = 0; p < k; ++p) {
    const double aip = a[static_cast<std::size_t>(p) * m + i];
    const double* bp = b + static_cast<std::size_t>(p) * n;
    for (int j = 0; j < n; ++j) ci[j] += aip * bp[j];
  }
}

}  // namespace

void matmul_nn(const double* a, const double* b, double* c, int m, int k, int n, Backend backend) {
  if (backend == Backend::Parallel) {
#pragma omp parallel for schedule(static) num_threads(max_threads())
    for (int i = 0; i < m; ++i) row_nn(a, b, c, i, k, n);
  } else {
    for (int i = 0; i < m; ++i) row_nn(a, b, c, i, k, n);
  }
}

void matmul_nt(const double* a, const double* b, double* c, int m, int k, int n, Backend backend) {
  if (backend == Backend::Parallel) {
#pragma omp parallel for schedule(static) num_threads(max_threads())
    for (int i = 0; i < m; ++i) row_nt(a, b, c, i, k, n);
  } else {
    for (int i = 0; i < m; ++i) row_nt(a, b, c, i, k, n);
  }
}

void matmul_tn(const double* a, const double* b, double* c, int m, int k, int n, Backend backend) {
  if (backend == Backend::Parallel) {
#pragma omp parallel for schedule(static) num_threads(max_threads())
    for (int i = 0; i < m; ++i) row_tn(a, b, c, i, k, m, n);
  } else {
    for (int i = 0; i < m; ++i) row_tn(a, b, c, i, k, m, n);
  }
}

void affine(const double* w, const double* x, const double* b, double* y, int m, int k,
            Backend backend) {
  auto row = [&](int i) {
    const double* wi = w + static_cast<std::size_t>(i) * k;
    double acc = b ? b[i] : 0.0;
    for (int p = 0; p < k; ++p) acc += wi[p] * x[p];
    y[i] = acc;
  };
  if (backend == Backend::Parallel) {
#pragma omp parallel for schedule(static) num_threads(max_threads())
    for (int i = 0; i < m; ++i) row(i);
  } else {
    for (int i = 0; i < m; ++i) row(i);
  }
}

void sos_fill(int num_paths, double doppler_fd, double sample_period, const double* amp_i,
              const double* amp_q, const double* alpha, const double* phi, const double* psi,
              long long n0, int count, cplx* out, Backend backend) {
  const double norm = 1.0 / std::sqrt(static_cast<double>(num_paths));
  const double w = 2.0 * std::numbers::pi * doppler_fd * sample_period;
  auto sample = [&](int i) {
    const double t = w * static_cast<double>(n0 + i);
    double re = 0.0, im = 0.0;
    for (int m = 0; m < num_paths; ++m) {
      const double theta = (t + psi[m]) * std::cos(alpha[m]) + phi[m];
      re += amp_i[m] * std::cos(theta);
      im += amp_q[m] * std::sin(theta);
    }
    out[i] = cplx(norm * re, norm * im);
  };
  if (backend == Backend::Parallel) {
#pragma omp parallel for schedule(static) num_threads(max_threads())
    for (int i = 0; i < count; ++i) sample(i);
  } else {
    for (int i = 0; i < count; ++i) sample(i);
  }
}

}  // namespace fastlink::kernels
