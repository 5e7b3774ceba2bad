#pragma once

#include <complex>
#include <cstddef>

#include "fastlink/common.hpp"

namespace fastlink::kernels {

/// Serial is the reference implementation; Parallel is the OpenMP variant.
/// Both produce bit-identical results (no reordered reductions).
enum class Backend { Serial, Parallel };

/// Threads available to parallel kernels; honors FASTLINK_THREADS when set.
int max_threads();

/// Parallel unless FASTLINK_THREADS=1 or OpenMP reports a single thread.
Backend default_backend();

// Dense row-major GEMM variants. No aliasing between C and A/B.
//   nn: C(m,n)  = A(m,k) * B(k,n)
//   nt: C(m,n)  = A(m,k) * B(n,k)^T
//   tn: C(m,n)  = A(k,m)^T * B(k,n)
void matmul_nn(const double* a, const double* b, double* c, int m, int k, int n,
               Backend backend = default_backend());
void matmul_nt(const double* a, const double* b, double* c, int m, int k, int n,
               Backend backend = default_backend());
void matmul_tn(const double* a, const double* b, double* c, int m, int k, int n,
               Backend backend = default_backend());

/// y(m) = W(m,k) x(k) + b(m); b may be null.
void affine(const double* w, const double* x, const double* b, double* y, int m, int k,
            Backend backend = default_backend());

/// Sum-of-sinusoids waveform synthesis:
///   out[i] = (1/sqrt(M)) * sum_m a[m]*cos(theta) + j*b[m]*sin(theta),
///   theta  = (2*pi*fd*(n0+i)*ts + psi[m])*cos(alpha[m]) + phi[m].
/// Each output sample is independent, so the parallel variant is bit-exact.
void sos_fill(int num_paths, double doppler_fd, double sample_period, const double* amp_i,
              const double* amp_q, const double* alpha, const double* phi, const double* psi,
              long long n0, int count, cplx* out, Backend backend = default_backend());

}  // namespace fastlink::kernels
