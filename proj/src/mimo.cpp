#include "fastlink/mimo.hpp"

#include <cmath>

#include "fastlink/rng.hpp"

namespace fastlink::mimo {

Equalizer mmse_equalizer(const MatC& h, double power, double noise_var) {
  if (!(power > 0.0)) throw ConfigError("mmse_equalizer: power must be > 0");
  // noise_var == 0 is the zero-forcing limit; it only works for
  // invertible H H^H, which the LU check below enforces.
  if (!(noise_var >= 0.0)) throw ConfigError("mmse_equalizer: noise variance must be >= 0");

  const Eigen::Index nr = h.rows();
  MatC gram = h * h.adjoint();
  gram += (noise_var / power) * MatC::Identity(nr, nr);

  Eigen::FullPivLU<MatC> lu(gram);
  if (!lu.isInvertible())
    throw IntegrityError("mmse_equalizer: regularized Gram matrix is singular");

  Equalizer eq;
  eq.g = h.adjoint() * lu.inverse();
  eq.h = h;
  eq.power = power;
  eq.noise_var = noise_var;
  return eq;
}

std::vector<double> sinr_per_tx(const Equalizer& eq) {
  const Eigen::Index nt = eq.h.cols();
  const double cap = std::pow(10.0, kSinrCapDb / 10.0);
  std::vector<double> sinr(static_cast<std::size_t>(nt));
  for (Eigen::Index j = 0; j < nt; ++j) {
    const auto gj = eq.g.row(j);
    const double gj_norm2 = gj.squaredNorm();
    if (gj_norm2 == 0.0) {
      sinr[static_cast<std::size_t>(j)] = 0.0;
      continue;
    }
    const double signal = eq.power * std::norm((gj * eq.h.col(j))(0));
    double interference = 0.0;
    for (Eigen::Index k = 0; k < nt; ++k) {
      if (k == j) continue;
      interference += std::norm((gj * eq.h.col(k))(0));
    }
    const double denom = eq.power * interference + gj_norm2 * eq.noise_var;
    sinr[static_cast<std::size_t>(j)] = denom > 0.0 ? std::min(signal / denom, cap)
                                                    : (signal > 0.0 ? cap : 0.0);
  }
  return sinr;
}

SvdTriple svd_decompose(const MatC& h) {
  Eigen::JacobiSVD<MatC> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);

  SvdTriple out;
  out.u = svd.matrixU();
  out.v = svd.matrixV();
  const auto& sv = svd.singularValues();
  out.lambda.assign(sv.data(), sv.data() + sv.size());

  // Rotate each U column so its largest-magnitude entry is real >= 0,
  // co-rotating the matching V column to keep U D V^H unchanged.
  const Eigen::Index ncols = std::min(out.u.cols(), out.v.cols());
  for (Eigen::Index c = 0; c < out.u.cols(); ++c) {
    Eigen::Index imax = 0;
    double best = -1.0;
    for (Eigen::Index r = 0; r < out.u.rows(); ++r) {
      const double mag = std::abs(out.u(r, c));
      if (mag > best) {
        best = mag;
        imax = r;
      }
    }
    const cplx pivot = out.u(imax, c);
    if (std::abs(pivot) == 0.0) continue;
    const cplx rot = std::conj(pivot) / std::abs(pivot);
    out.u.col(c) *= rot;
    if (c < ncols) out.v.col(c) *= rot;
  }
  return out;
}

VecC transmit_mmse(const VecC& x, const MatC& h, const fading::NoiseModel& noise,
                   const Equalizer& eq, std::uint64_t noise_tag) {
  if (h.cols() != x.size()) throw ConfigError("transmit_mmse: x length must equal Nt");
  if (eq.g.cols() != h.rows()) throw ConfigError("transmit_mmse: equalizer/channel mismatch");

  VecC y = h * x;
  rng::Generator gen(rng::derive(noise.rng_seed, noise_tag));
  for (Eigen::Index r = 0; r < y.size(); ++r) y(r) += gen.cnormal(noise.variance);
  return eq.g * y;
}

VecC transmit_svd(const VecC& x, const MatC& h, const SvdTriple& svd,
                  const fading::NoiseModel& noise, std::uint64_t noise_tag) {
  const Eigen::Index d = x.size();
  const Eigen::Index n = static_cast<Eigen::Index>(svd.lambda.size());
  if (d > n) throw ConfigError("transmit_svd: stream count exceeds channel rank bound");

  const MatC v_bar = svd.v.leftCols(d);
  VecC y = h * (v_bar * x);
  rng::Generator gen(rng::derive(noise.rng_seed, noise_tag));
  for (Eigen::Index r = 0; r < y.size(); ++r) y(r) += gen.cnormal(noise.variance);
  return (svd.u.adjoint() * y).head(d);
}

}  // namespace fastlink::mimo
