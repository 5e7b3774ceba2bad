#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <vector>

#include <doctest.h>

#include "fastlink/allocator.hpp"
#include "fastlink/rng.hpp"
#include "fastlink/stats.hpp"

using fastlink::cplx;
namespace alloc = fastlink::alloc;
namespace codec = fastlink::codec;
namespace fading = fastlink::fading;
namespace rng = fastlink::rng;
namespace stats = fastlink::stats;

namespace {

codec::FeatureTensor make_tensor(int c, int h, int w, rng::Generator& gen) {
  codec::FeatureTensor a;
  a.c = c;
  a.h = h;
  a.w = w;
  a.values.resize(static_cast<std::size_t>(c) * h * w);
  for (auto& v : a.values) v = gen.normal();
  return a;
}

bool is_permutation_of_range(const std::vector<int>& eta) {
  std::vector<int> sorted = eta;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < static_cast<int>(sorted.size()); ++i)
    if (sorted[static_cast<std::size_t>(i)] != i) return false;
  return true;
}

// Block p of the organized tensor must equal original block eta[p].
void check_blocks_match(const alloc::Allocation& out, const codec::FeatureTensor& a) {
  const int hw = a.h * a.w;
  for (int p = 0; p < a.c; ++p) {
    const int src = out.eta[static_cast<std::size_t>(p)];
    for (int j = 0; j < hw; ++j)
      CHECK(out.organized.values[static_cast<std::size_t>(p) * hw + j] ==
            a.values[static_cast<std::size_t>(src) * hw + j]);
  }
}

// Rank matching: importance of the feature on block p follows the block
// quality ranking exactly (Spearman 1) whenever both are tie-free.
void check_rank_matching(const alloc::Allocation& out, const std::vector<double>& omega) {
  std::vector<double> assigned(out.eta.size());
  for (std::size_t p = 0; p < out.eta.size(); ++p)
    assigned[p] = omega[static_cast<std::size_t>(out.eta[p])];
  CHECK(stats::spearman(assigned, out.quality) == doctest::Approx(1.0).epsilon(1e-12));
}

}  // namespace

TEST_SUITE_BEGIN("allocator");

TEST_CASE("stable descending argsort with index tie-break") {
  CHECK(alloc::argsort_desc({0.2, 0.9, 0.5}) == std::vector<int>{1, 2, 0});
  CHECK(alloc::argsort_desc({1.2, 0.3, 0.8}) == std::vector<int>{0, 2, 1});
  CHECK(alloc::argsort_desc({0.5, 0.5, 0.5}) == std::vector<int>{0, 1, 2});
  CHECK(alloc::argsort_desc({0.1, 0.7, 0.7, 0.0}) == std::vector<int>{1, 2, 0, 3});
}

TEST_CASE("hand-traced time-domain case") {
  rng::Generator gen(41);
  const auto a = make_tensor(3, 2, 2, gen);
  const std::vector<double> omega = {0.2, 0.9, 0.5};
  const std::vector<cplx> h = {cplx(1.2, 0.0), cplx(0.0, -0.3), cplx(-0.8, 0.0)};

  const auto out = alloc::time_allocate(a, omega, h);
  CHECK(out.eta == std::vector<int>{1, 0, 2});
  check_blocks_match(out, a);

  // Quality vector is |h| in slot order.
  CHECK(out.quality[0] == doctest::Approx(1.2));
  CHECK(out.quality[1] == doctest::Approx(0.3));
  CHECK(out.quality[2] == doctest::Approx(0.8));

  // Round-trip restores the original tensor exactly.
  const auto back = alloc::inverse_allocate(out.organized, out.eta);
  CHECK(back.values == a.values);
}

TEST_CASE("aligned ranks give the identity order") {
  rng::Generator gen(42);
  const auto a = make_tensor(4, 1, 2, gen);
  const std::vector<double> omega = {0.9, 0.7, 0.4, 0.1};
  const std::vector<cplx> h = {cplx(2.0, 0), cplx(1.5, 0), cplx(1.0, 0), cplx(0.5, 0)};
  const auto out = alloc::time_allocate(a, omega, h);
  CHECK(out.eta == std::vector<int>{0, 1, 2, 3});
  CHECK(out.organized.values == a.values);
}

TEST_CASE("equal channel gains fall back to slot index order") {
  rng::Generator gen(43);
  const auto a = make_tensor(3, 1, 2, gen);
  const std::vector<double> omega = {0.2, 0.9, 0.5};
  const std::vector<cplx> h(3, cplx(0.7, 0.0));
  const auto out = alloc::time_allocate(a, omega, h);
  // u = [0,1,2] by tie-break, v = [1,2,0]: slot i carries v[i].
  CHECK(out.eta == std::vector<int>{1, 2, 0});
}

TEST_CASE("precoding-free allocation: hand-computed SINR ordering") {
  rng::Generator gen(44);
  const auto a = make_tensor(4, 1, 2, gen);
  const std::vector<double> omega = {0.1, 0.8, 0.3, 0.6};

  // Slot 0 favors antenna 0 (gain 2), slot 1 favors antenna 1 (gain 2).
  fading::MatC h1 = fading::MatC::Zero(2, 2);
  h1(0, 0) = 2.0;
  h1(1, 1) = 1.0;
  fading::MatC h2 = fading::MatC::Zero(2, 2);
  h2(0, 0) = 1.0;
  h2(1, 1) = 2.0;

  const auto out = alloc::st_allocate_mmse(a, omega, {h1, h2}, 1.0, 1e-6);
  // Blocks: [slot0-tx0, slot0-tx1, slot1-tx0, slot1-tx1] with SINR
  // ~ [4e6, 1e6, 1e6, 4e6]. Importance order: features 1, 3, 2, 0.
  // Gain-2 blocks carry the two most important features; the tie between
  // the two gain-1 blocks resolves to the lower block index.
  CHECK(out.eta == std::vector<int>{1, 2, 0, 3});
  check_blocks_match(out, a);

  // All-identity slots: qualities all equal, index-aligned matching.
  const fading::MatC eye = fading::MatC::Identity(2, 2);
  const auto tied = alloc::st_allocate_mmse(a, omega, {eye, eye}, 1.0, 1.0);
  for (double q : tied.quality) CHECK(q == doctest::Approx(1.0));
  CHECK(tied.eta == std::vector<int>{1, 3, 2, 0});  // v in block order

  // c not divisible by Nt is rejected.
  const auto odd = make_tensor(3, 1, 2, gen);
  CHECK_THROWS_AS(
      alloc::st_allocate_mmse(odd, {0.1, 0.2, 0.3}, {h1, h2}, 1.0, 1.0),
      fastlink::ConfigError);
}

TEST_CASE("precoding-based allocation keys on singular values") {
  rng::Generator gen(45);
  const auto a = make_tensor(6, 1, 2, gen);
  const std::vector<double> omega = {0.15, 0.95, 0.35, 0.75, 0.55, 0.05};

  fading::MatC d31 = fading::MatC::Zero(2, 2);
  d31(0, 0) = 3.0;
  d31(1, 1) = 1.0;
  const auto out = alloc::st_allocate_svd(a, omega, {d31, d31, d31});

  // Quality [3,1,3,1,3,1]: the three lambda=3 blocks (even positions)
  // carry the top-3 important features 1, 3, 4 in that order.
  CHECK(out.eta == std::vector<int>{1, 2, 3, 0, 4, 5});
  check_blocks_match(out, a);

  // Spherical channel: all singular values equal, index order fallback.
  fading::MatC sphere = 1.3 * fading::MatC::Identity(2, 2);
  const auto tied = alloc::st_allocate_svd(a, omega, {sphere, sphere, sphere});
  CHECK(tied.eta == std::vector<int>{1, 3, 4, 2, 0, 5});
}

TEST_CASE("single-antenna reductions agree with the time-domain path") {
  rng::Generator gen(46);
  for (int trial = 0; trial < 50; ++trial) {
    const int c = 6;
    const auto a = make_tensor(c, 2, 1, gen);
    std::vector<double> omega(static_cast<std::size_t>(c));
    for (auto& x : omega) x = gen.uniform();
    std::vector<cplx> h(static_cast<std::size_t>(c));
    std::vector<fading::MatC> hm(static_cast<std::size_t>(c));
    for (int i = 0; i < c; ++i) {
      h[static_cast<std::size_t>(i)] = gen.cnormal(1.0);
      hm[static_cast<std::size_t>(i)] = fading::MatC::Constant(1, 1, h[static_cast<std::size_t>(i)]);
    }

    const auto base = alloc::time_allocate(a, omega, h);
    // SISO SINR = P|h|^2/sigma^2 and the 1x1 singular value = |h| are both
    // monotone in |h|, so all three paths sort identically.
    const auto via_mmse = alloc::st_allocate_mmse(a, omega, hm, 1.0, 0.7);
    const auto via_svd = alloc::st_allocate_svd(a, omega, hm);
    CHECK(via_mmse.eta == base.eta);
    CHECK(via_svd.eta == base.eta);
  }
}

TEST_CASE("random property sweep across all allocators") {
  rng::Generator gen(47);
  for (int trial = 0; trial < 300; ++trial) {
    const int c = 2 * (1 + static_cast<int>(gen.next_u64() % 6));  // 2..12, even
    const auto a = make_tensor(c, 1, 2, gen);
    std::vector<double> omega(static_cast<std::size_t>(c));
    for (auto& x : omega) x = gen.uniform();

    const int kind = trial % 3;
    alloc::Allocation out;
    if (kind == 0) {
      std::vector<cplx> h(static_cast<std::size_t>(c));
      for (auto& g : h) g = gen.cnormal(1.0);
      out = alloc::time_allocate(a, omega, h);
    } else {
      const int slots = c / 2;
      std::vector<fading::MatC> hm(static_cast<std::size_t>(slots));
      for (auto& m : hm) {
        m = fading::MatC(2, 2);
        for (int r = 0; r < 2; ++r)
          for (int t = 0; t < 2; ++t) m(r, t) = gen.cnormal(1.0);
      }
      out = kind == 1 ? alloc::st_allocate_mmse(a, omega, hm, 1.0, 0.5)
                      : alloc::st_allocate_svd(a, omega, hm);
    }

    CHECK(is_permutation_of_range(out.eta));
    check_rank_matching(out, omega);
    const auto back = alloc::inverse_allocate(out.organized, out.eta);
    CHECK(back.values == a.values);
  }
}

TEST_CASE("inverse allocation validates its permutation") {
  rng::Generator gen(48);
  const auto a = make_tensor(3, 1, 2, gen);
  CHECK(alloc::inverse_allocate(a, {0, 1, 2}).values == a.values);

  CHECK_THROWS_AS(alloc::inverse_allocate(a, {0, 1, 1}), fastlink::IntegrityError);
  CHECK_THROWS_AS(alloc::inverse_allocate(a, {0, 1, 3}), fastlink::IntegrityError);
  CHECK_THROWS_AS(alloc::inverse_allocate(a, {0, 1}), fastlink::IntegrityError);
}

TEST_CASE("side information cost") {
  CHECK(alloc::side_info_bits(1) == 0);
  CHECK(alloc::side_info_bits(2) == 2);
  CHECK(alloc::side_info_bits(3) == 6);   // ceil(log2 3) = 2
  CHECK(alloc::side_info_bits(16) == 64); // 16 * 4
  CHECK(alloc::side_info_bits(24) == 120);  // ceil(log2 24) = 5
}

TEST_SUITE_END();
