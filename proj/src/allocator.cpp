#include "fastlink/allocator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fastlink/mimo.hpp"

namespace fastlink::alloc {

std::vector<int> argsort_desc(const std::vector<double>& v) {
  std::vector<int> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return v[a] > v[b]; });
  return idx;
}

namespace {

Allocation match(const codec::FeatureTensor& a, const std::vector<double>& omega,
                 std::vector<double> quality) {
  const int c = a.c;
  if (static_cast<int>(omega.size()) != c || static_cast<int>(quality.size()) != c)
    throw ConfigError("allocator: omega/quality length must equal feature count");
  if (static_cast<int>(a.values.size()) != a.size())
    throw ConfigError("allocator: malformed feature tensor");

  const std::vector<int> u = argsort_desc(quality);
  const std::vector<int> v = argsort_desc(omega);

  Allocation out;
  out.quality = std::move(quality);
  out.eta.assign(c, 0);
  out.organized.c = a.c;
  out.organized.h = a.h;
  out.organized.w = a.w;
  out.organized.values.resize(a.values.size());

  const int hw = a.h * a.w;
  for (int i = 0; i < c; ++i) {
    out.eta[u[i]] = v[i];
    std::copy_n(a.values.data() + static_cast<std::size_t>(v[i]) * hw, hw,
                out.organized.values.data() + static_cast<std::size_t>(u[i]) * hw);
  }
  return out;
}

}  // namespace

Allocation time_allocate(const codec::FeatureTensor& a, const std::vector<double>& omega,
                         const std::vector<cplx>& h_pred) {
  if (static_cast<int>(h_pred.size()) != a.c)
    throw ConfigError("time_allocate: need one predicted gain per feature");
  std::vector<double> q(h_pred.size());
  for (std::size_t i = 0; i < h_pred.size(); ++i) q[i] = std::abs(h_pred[i]);
  return match(a, omega, std::move(q));
}

Allocation st_allocate_mmse(const codec::FeatureTensor& a, const std::vector<double>& omega,
                            const std::vector<fading::MatC>& h_pred, double power,
                            double noise_var) {
  if (h_pred.empty()) throw ConfigError("st_allocate_mmse: empty channel prediction");
  const int nt = static_cast<int>(h_pred[0].cols());
  if (a.c % nt != 0) throw ConfigError("st_allocate_mmse: feature count not divisible by Nt");
  if (static_cast<int>(h_pred.size()) * nt != a.c)
    throw ConfigError("st_allocate_mmse: slot count must be c/Nt");

  std::vector<double> q(static_cast<std::size_t>(a.c));
  for (std::size_t slot = 0; slot < h_pred.size(); ++slot) {
    const auto eq = mimo::mmse_equalizer(h_pred[slot], power, noise_var);
    const std::vector<double> sinr = mimo::sinr_per_tx(eq);
    for (int j = 0; j < nt; ++j) q[slot * nt + j] = sinr[static_cast<std::size_t>(j)];
  }
  return match(a, omega, std::move(q));
}

Allocation st_allocate_svd(const codec::FeatureTensor& a, const std::vector<double>& omega,
                           const std::vector<fading::MatC>& h_pred) {
  if (h_pred.empty()) throw ConfigError("st_allocate_svd: empty channel prediction");
  const int n = static_cast<int>(std::min(h_pred[0].rows(), h_pred[0].cols()));
  if (a.c % n != 0) throw ConfigError("st_allocate_svd: feature count not divisible by N");
  if (static_cast<int>(h_pred.size()) * n != a.c)
    throw ConfigError("st_allocate_svd: slot count must be c/N");

  std::vector<double> q(static_cast<std::size_t>(a.c));
  for (std::size_t slot = 0; slot < h_pred.size(); ++slot) {
    const auto svd = mimo::svd_decompose(h_pred[slot]);
    for (int i = 0; i < n; ++i) q[slot * n + i] = svd.lambda[static_cast<std::size_t>(i)];
  }
  return match(a, omega, std::move(q));
}

codec::FeatureTensor inverse_allocate(const codec::FeatureTensor& received,
                                      const std::vector<int>& eta) {
  const int c = received.c;
  if (static_cast<int>(eta.size()) != c)
    throw IntegrityError("inverse_allocate: eta length must equal feature count");
  std::vector<bool> seen(static_cast<std::size_t>(c), false);
  for (int e : eta) {
    if (e < 0 || e >= c || seen[static_cast<std::size_t>(e)])
      throw IntegrityError("inverse_allocate: eta is not a permutation");
    seen[static_cast<std::size_t>(e)] = true;
  }

  codec::FeatureTensor out;
  out.c = received.c;
  out.h = received.h;
  out.w = received.w;
  out.values.resize(received.values.size());
  const int hw = received.h * received.w;
  for (int p = 0; p < c; ++p)
    std::copy_n(received.values.data() + static_cast<std::size_t>(p) * hw, hw,
                out.values.data() + static_cast<std::size_t>(eta[p]) * hw);
  return out;
}

int side_info_bits(int c) {
  if (c < 1) throw ConfigError("side_info_bits: feature count must be >= 1");
  if (c == 1) return 0;
  int bits = 0;
  while ((1 << bits) < c) ++bits;
  return c * bits;
}

}  // namespace fastlink::alloc
