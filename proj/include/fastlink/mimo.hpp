#pragma once

#include <vector>

#include "fastlink/common.hpp"
#include "fastlink/fading.hpp"

#include <Eigen/Dense>

namespace fastlink::mimo {

using MatC = Eigen::MatrixXcd;
using VecC = Eigen::VectorXcd;

/// Linear MMSE receive filter G = H^H (H H^H + (sigma^2/P) I)^{-1}.
struct Equalizer {
  MatC g;  // Nt x Nr
  MatC h;  // Nr x Nt, the channel G was built for
  double power = 0.0;     // P
  double noise_var = 0.0; // sigma^2
};

/// Full SVD H = U D V^H with singular values sorted descending. Column
/// phases are fixed so each U column's largest-magnitude entry is real
/// and nonnegative (V co-rotated), making decompositions reproducible.
struct SvdTriple {
  MatC u;  // Nr x Nr
  MatC v;  // Nt x Nt
  std::vector<double> lambda;  // min(Nr, Nt) values, descending
};

/// Cap applied when a stream sees zero interference and zero noise.
inline constexpr double kSinrCapDb = 300.0;

Equalizer mmse_equalizer(const MatC& h, double power, double noise_var);

/// Post-equalization SINR per transmit antenna:
///   SINR_j = P |g_j h_j|^2 / (P sum_{k!=j} |g_j h_k|^2 + |g_j|^2 sigma^2)
/// with g_j the j-th row of G and h_j the j-th column of H. A zero row
/// of G yields 0; an infinite ratio is capped at kSinrCapDb.
std::vector<double> sinr_per_tx(const Equalizer& eq);

SvdTriple svd_decompose(const MatC& h);

/// One MMSE-detected slot: x_hat = G (H x + n).
VecC transmit_mmse(const VecC& x, const MatC& h, const fading::NoiseModel& noise,
                   const Equalizer& eq, std::uint64_t noise_tag = 0);

/// One SVD-precoded slot over d <= min(Nr, Nt) parallel streams:
/// transmit V_bar x, receive y = H V_bar x + n, return the first d
/// entries of U^H y, i.e. lambda_k x_k + (U^H n)_k.
VecC transmit_svd(const VecC& x, const MatC& h, const SvdTriple& svd,
                  const fading::NoiseModel& noise, std::uint64_t noise_tag = 0);

}  // namespace fastlink::mimo
