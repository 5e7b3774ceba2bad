#include "fastlink/fading.hpp"

#include <cmath>
#include <numbers>

#include "fastlink/rng.hpp"

namespace fastlink::fading {

SosParams SosParams::make(int num_paths, double doppler_fd, double sample_period,
                          std::uint64_t seed) {
  if (num_paths < 1) throw ConfigError("SosParams: num_paths must be >= 1");
  if (!(sample_period > 0.0)) throw ConfigError("SosParams: sample_period must be > 0");
  if (!(doppler_fd >= 0.0)) throw ConfigError("SosParams: doppler_fd must be >= 0");

  SosParams p;
  p.num_paths = num_paths;
  p.doppler_fd = doppler_fd;
  p.sample_period = sample_period;
  p.rng_seed = seed;
  p.amp_i.resize(num_paths);
  p.amp_q.resize(num_paths);
  p.alpha.resize(num_paths);
  p.phi.resize(num_paths);
  p.psi.resize(num_paths);

  rng::Generator gen(seed);
  constexpr double pi = std::numbers::pi;
  for (int m = 0; m < num_paths; ++m) {
    p.amp_i[m] = gen.normal();
    p.amp_q[m] = gen.normal();
    p.alpha[m] = gen.uniform(-pi, pi);
    p.phi[m] = gen.uniform(-pi, pi);
    p.psi[m] = gen.uniform(-pi, pi);
  }
  return p;
}

CsiSequence sos_generate(const SosParams& params, int t, kernels::Backend backend) {
  if (params.num_paths < 1 || !(params.sample_period > 0.0))
    throw ConfigError("sos_generate: invalid SOS parameters");
  if (t < 1) throw ConfigError("sos_generate: slot count must be >= 1");

  CsiSequence seq;
  seq.slot_period = params.sample_period;
  seq.gains.resize(t);
  kernels::sos_fill(params.num_paths, params.doppler_fd, params.sample_period,
                    params.amp_i.data(), params.amp_q.data(), params.alpha.data(),
                    params.phi.data(), params.psi.data(), 0, t, seq.gains.data(), backend);
  return seq;
}

CsiSequence mimo_generate(const SosParams& tmpl, int t, int nr, int nt, std::uint64_t seed,
                          kernels::Backend backend) {
  if (nr < 1 || nt < 1) throw ConfigError("mimo_generate: Nr and Nt must be >= 1");

  // One independently seeded SOS process per (r, c) link.
  std::vector<CsiSequence> links(static_cast<std::size_t>(nr) * nt);
  for (int r = 0; r < nr; ++r) {
    for (int c = 0; c < nt; ++c) {
      SosParams p = SosParams::make(tmpl.num_paths, tmpl.doppler_fd, tmpl.sample_period,
                                    rng::derive(seed, static_cast<std::uint64_t>(r),
                                                static_cast<std::uint64_t>(c)));
      links[static_cast<std::size_t>(r) * nt + c] = sos_generate(p, t, backend);
    }
  }

  CsiSequence seq;
  seq.slot_period = tmpl.sample_period;
  seq.matrices.resize(t);
  for (int n = 0; n < t; ++n) {
    MatC h(nr, nt);
    for (int r = 0; r < nr; ++r)
      for (int c = 0; c < nt; ++c)
        h(r, c) = links[static_cast<std::size_t>(r) * nt + c].gains[n];
    seq.matrices[n] = std::move(h);
  }
  return seq;
}

std::vector<cplx> apply_siso(const std::vector<cplx>& x, cplx h, const NoiseModel& noise) {
  rng::Generator gen(noise.rng_seed);
  std::vector<cplx> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = h * x[i] + gen.cnormal(noise.variance);
  return y;
}

MatC apply_mimo(const MatC& x, const MatC& h, const NoiseModel& noise) {
  if (h.cols() != x.rows())
    throw ConfigError("apply_mimo: H columns must match X rows");
  MatC y = h * x;
  rng::Generator gen(noise.rng_seed);
  // Column-major fill so the draw order matches one-column-at-a-time use.
  for (Eigen::Index c = 0; c < y.cols(); ++c)
    for (Eigen::Index r = 0; r < y.rows(); ++r) y(r, c) += gen.cnormal(noise.variance);
  return y;
}

}  // namespace fastlink::fading
