#pragma once

#include <cstdint>
#include <vector>

#include "fastlink/common.hpp"
#include "fastlink/kernels.hpp"

#include <Eigen/Dense>

namespace fastlink::fading {

using MatC = Eigen::MatrixXcd;

/// Enhanced sum-of-sinusoids parameters for one Rayleigh link.
/// Per-path amplitudes are N(0,1); angles and phases are uniform on
/// [-pi, pi), all drawn deterministically from rng_seed.
struct SosParams {
  int num_paths = 0;        // M
  double doppler_fd = 0.0;  // Hz
  double sample_period = 0.0;  // Ts, seconds
  std::vector<double> amp_i;   // a_m
  std::vector<double> amp_q;   // b_m
  std::vector<double> alpha;   // arrival angles
  std::vector<double> phi;     // phase shifts
  std::vector<double> psi;     // auxiliary phases
  std::uint64_t rng_seed = 0;

  /// Draws all per-path randomness from the seed. Throws ConfigError on
  /// M < 1, Ts <= 0, or fd < 0.
  static SosParams make(int num_paths, double doppler_fd, double sample_period,
                        std::uint64_t seed);
};

/// Channel state over t slots: one complex gain per slot (SISO) or one
/// Nr x Nt matrix per slot (MIMO). Exactly one of the two is populated.
struct CsiSequence {
  std::vector<cplx> gains;     // SISO: length t
  std::vector<MatC> matrices;  // MIMO: t entries, all Nr x Nt
  double slot_period = 0.0;

  bool is_mimo() const { return !matrices.empty(); }
  int slots() const {
    return is_mimo() ? static_cast<int>(matrices.size()) : static_cast<int>(gains.size());
  }
};

/// Circular complex AWGN, variance sigma^2 total per complex sample
/// (sigma^2/2 per real dimension). variance == 0 yields exact zeros,
/// used for noiseless reference runs.
struct NoiseModel {
  double variance = 0.0;
  std::uint64_t rng_seed = 0;
};

/// h_n = (1/sqrt(M)) sum_m [I_m(n Ts) + j Q_m(n Ts)], n = 0..t-1, with
/// I_m = a_m cos((2 pi fd n Ts + psi_m) cos(alpha_m) + phi_m) and
/// Q_m = b_m sin(same argument). Unit average power by construction.
CsiSequence sos_generate(const SosParams& params, int t,
                         kernels::Backend backend = kernels::default_backend());

/// Nr*Nt mutually independent SOS links, link (r,c) seeded by a fixed
/// mix of (seed, r, c); assembled into per-slot Nr x Nt matrices.
CsiSequence mimo_generate(const SosParams& tmpl, int t, int nr, int nt, std::uint64_t seed,
                          kernels::Backend backend = kernels::default_backend());

/// y = h * x + n with n i.i.d. CN(0, sigma^2).
std::vector<cplx> apply_siso(const std::vector<cplx>& x, cplx h, const NoiseModel& noise);

/// Y = H X + N, X is Nt x m, N i.i.d. per entry.
MatC apply_mimo(const MatC& x, const MatC& h, const NoiseModel& noise);

}  // namespace fastlink::fading
