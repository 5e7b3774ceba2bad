#pragma once

#include <vector>

#include "fastlink/codec.hpp"
#include "fastlink/common.hpp"
#include "fastlink/fading.hpp"

namespace fastlink::alloc {

/// Stable descending argsort; ties resolve to ascending original index.
std::vector<int> argsort_desc(const std::vector<double>& v);

/// Result of a forward allocation: the reorganized tensor, the feature
/// order eta (block p carries original feature eta[p]), and the flat
/// block-quality vector the sort keyed on.
struct Allocation {
  codec::FeatureTensor organized;
  std::vector<int> eta;
  std::vector<double> quality;
};

/// Time-domain allocation over c SISO slots, quality = |h_pred|. With
/// u = argsort_desc(quality) and v = argsort_desc(omega): eta[u[i]] =
/// v[i] and organized block u[i] = original block v[i] — the i-th best
/// slot carries the i-th most important feature.
Allocation time_allocate(const codec::FeatureTensor& a, const std::vector<double>& omega,
                         const std::vector<cplx>& h_pred);

/// Space-time allocation without precoding: per predicted slot matrix,
/// quality per transmit antenna is the post-MMSE SINR. The quality
/// matrix (rows = antennas, cols = slots) is flattened column by column,
/// i.e. q[slot*Nt + antenna], then matched exactly as time_allocate.
/// Requires c divisible by Nt.
Allocation st_allocate_mmse(const codec::FeatureTensor& a, const std::vector<double>& omega,
                            const std::vector<fading::MatC>& h_pred, double power,
                            double noise_var);

/// Space-time allocation with SVD precoding: quality per subchannel is
/// the singular value, q[slot*N + stream] with N = min(Nr, Nt).
/// Requires c divisible by N.
Allocation st_allocate_svd(const codec::FeatureTensor& a, const std::vector<double>& omega,
                           const std::vector<fading::MatC>& h_pred);

/// Undoes a forward allocation: recovered[eta[p]] = received[p].
/// Throws IntegrityError if eta is not a permutation of {0..c-1}.
codec::FeatureTensor inverse_allocate(const codec::FeatureTensor& received,
                                      const std::vector<int>& eta);

/// Side-information cost of shipping eta: c * ceil(log2(c)) bits.
int side_info_bits(int c);

}  // namespace fastlink::alloc
