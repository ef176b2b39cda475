#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "divmax/divergence.hpp"
#include "divmax/kernel_objective.hpp"
#include "support.hpp"

using namespace divmax;
using divmax::test_support::bundled;

namespace {

const std::vector<double> kU42 = [] {
  std::vector<double> u = {-5, 3, 3, -1, 3, -1, -1, -1, 3, -1, -1, -1, -1, -1, -1, 3};
  for (auto& v : u) v /= 15.0;
  return u;
}();

std::vector<double> random_kernel_vector(const KernelBasis& basis, std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  std::vector<double> u(n, 0.0);
  for (const auto& b : basis.vectors) {
    const double c = gauss(rng);
    for (std::size_t x = 0; x < n; ++x) u[x] += c * static_cast<double>(b[x]);
  }
  return u;
}

}  // namespace

TEST(Decompose, Examples) {
  std::vector<double> u = {1, -1, -1, 1};
  auto kp = decompose(u);
  EXPECT_EQ(kp.degree, 2.0);
  EXPECT_EQ(kp.p_plus, (std::vector<double>{0.5, 0, 0, 0.5}));
  EXPECT_EQ(kp.p_minus, (std::vector<double>{0, 0.5, 0.5, 0}));

  std::vector<double> two = {2, -2};
  auto kp2 = decompose(two);
  EXPECT_EQ(kp2.degree, 2.0);
  EXPECT_EQ(kp2.p_plus, (std::vector<double>{1, 0}));
  EXPECT_EQ(kp2.p_minus, (std::vector<double>{0, 1}));

  auto kp42 = decompose(kU42);
  EXPECT_NEAR(kp42.degree, 1.0, 1e-15);
  for (std::size_t x : {1, 2, 4, 8, 15}) EXPECT_NEAR(kp42.p_plus[x], 0.2, 1e-15);
}

TEST(Decompose, Errors) {
  std::vector<double> zero(4, 0.0), unbalanced = {1, 0, 0, 0};
  EXPECT_THROW(decompose(zero), std::invalid_argument);
  EXPECT_THROW(decompose(unbalanced), std::invalid_argument);
}

TEST(Dbar, Examples) {
  std::vector<double> ones4(4, 1.0), half = {0.5, -0.5, -0.5, 0.5};
  EXPECT_NEAR(dbar(ones4, half), 0.0, 1e-15);
  auto m42 = bundled("binary_4_2.json");
  EXPECT_NEAR(dbar(m42, kU42), std::log(3.0) - std::log(5.0) / 3.0, 1e-14);
  auto toy = bundled("three_state_toy.json");
  std::vector<double> u = {0, 1, -1};
  EXPECT_NEAR(dbar(toy, u), std::log(2.0), 1e-15);
}

TEST(Dbar, EqualsEntropyGapAtDegreeOne) {
  std::mt19937_64 rng(21);
  auto m = bundled("binary_4_2.json");
  auto basis = kernel_basis(m);
  for (int t = 0; t < 100; ++t) {
    auto kp = decompose(random_kernel_vector(basis, m.num_states(), rng));
    std::vector<double> unit(kp.u.size());
    for (std::size_t x = 0; x < unit.size(); ++x) unit[x] = kp.u[x] / kp.degree;
    EXPECT_NEAR(dbar(m, unit), h_r(m, kp.p_minus) - h_r(m, kp.p_plus), 1e-12);
  }
}

TEST(Dbar, Homogeneity) {
  std::mt19937_64 rng(22);
  auto m = bundled("binary_4_2.json");
  auto basis = kernel_basis(m);
  std::uniform_real_distribution<double> alpha(-3.0, 3.0);
  for (int t = 0; t < 200; ++t) {
    auto u = random_kernel_vector(basis, m.num_states(), rng);
    const double a = t == 0 ? -1.0 : alpha(rng);
    auto au = u;
    for (auto& v : au) v *= a;
    EXPECT_NEAR(dbar(m, au), a * dbar(m, u), 1e-12 * std::max(1.0, std::abs(dbar(m, u))));
  }
}

TEST(Dbar1, Examples) {
  auto m42 = bundled("binary_4_2.json");
  auto twice = kU42;
  for (auto& v : twice) v *= 2;
  EXPECT_NEAR(dbar1(m42, twice), 0.56213298, 1e-8);
  auto bi = bundled("binary_independence.json");
  std::vector<double> u = {1, -1, -1, 1};
  EXPECT_NEAR(dbar1(bi, u), 0.0, 1e-15);
  auto toy = bundled("three_state_toy.json");
  std::vector<double> v = {0, 3, -3};
  EXPECT_NEAR(dbar1(toy, v), std::log(2.0), 1e-15);
  std::vector<double> zero(3, 0.0);
  EXPECT_THROW(dbar1(toy, zero), std::invalid_argument);
}

TEST(OptimalMixture, Examples) {
  auto bi = bundled("binary_independence.json");
  std::vector<double> u = {1, -1, -1, 1};
  EXPECT_NEAR(optimal_mixture(bi, decompose(u)).mu, 0.5, 1e-15);

  auto m42 = bundled("binary_4_2.json");
  EXPECT_NEAR(optimal_mixture(m42, decompose(kU42)).mu, 1.0 / (1.0 + 3.0 * std::pow(5.0, -1.0 / 3.0)), 1e-12);

  auto toy = bundled("three_state_toy.json");
  std::vector<double> t = {0, 1, -1};
  auto mix = optimal_mixture(toy, decompose(t));
  EXPECT_NEAR(mix.mu, 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(mix.p_hat[1], 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(mix.p_hat[2], 2.0 / 3.0, 1e-15);
}

TEST(LemmaIdentities, BundledPairs) {
  auto bi = bundled("binary_independence.json");
  std::vector<double> u = {1, -1, -1, 1};
  EXPECT_LE(lemma_identities(bi, decompose(u)).max(), 1e-12);
  EXPECT_NEAR(divergence_via_pair(bi, decompose(u)), std::log(2.0), 1e-15);

  auto m42 = bundled("binary_4_2.json");
  EXPECT_NEAR(divergence_via_pair(m42, decompose(kU42)), 1.0132035, 1e-7);

  auto toy = bundled("three_state_toy.json");
  std::vector<double> t = {0, 1, -1};
  const double via_pair = divergence_via_pair(toy, decompose(t));
  EXPECT_NEAR(via_pair, std::log(3.0), 1e-15);
  std::vector<double> delta_b = {0, 1, 0};
  EXPECT_NEAR(via_pair, ri_project(toy, delta_b).divergence, 1e-9);
}

TEST(LemmaIdentities, PairFor233Maximizer) {
  auto m = bundled("independence_2_3_3.json");
  const double s2 = std::sqrt(2.0);
  std::vector<double> p(18, 0.0);
  p[5] = p[7] = 1 - s2 / 2;
  p[9] = s2 - 1;
  auto proj = ri_project(m, p);
  std::vector<double> u(18);
  double neg = 0;
  for (std::size_t x = 0; x < 18; ++x) {
    if (p[x] == 0) neg += proj.p_e[x];
  }
  for (std::size_t x = 0; x < 18; ++x) u[x] = p[x] > 0 ? p[x] : -proj.p_e[x] / neg;
  EXPECT_NEAR(divergence_via_pair(m, decompose(u)), std::log(3 + 2 * s2), 1e-9);
}

TEST(LemmaIdentities, RandomDisjointPairs) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 3 + t % 8;
    std::vector<double> r(n);
    for (auto& v : r) v = 0.25 + 3 * unit(rng);
    std::vector<double> u(n, 0.0);
    double pos = 0, neg = 0;
    for (std::size_t x = 0; x < n; ++x) {
      if (x == 0 || (x != 1 && unit(rng) < 0.5)) u[x] = unit(rng) + 1e-3, pos += u[x];
      else u[x] = -(unit(rng) + 1e-3), neg -= u[x];
    }
    for (auto& v : u) v = v > 0 ? v / pos : v / neg;
    EXPECT_LE(lemma_identities(r, decompose(u)).max(), 1e-10);
  }
}

TEST(DivergenceViaPair, RejectsPointOutsideKernel) {
  auto bi = bundled("binary_independence.json");
  std::vector<double> u = {1, -1, 1, -1};
  EXPECT_THROW(divergence_via_pair(bi, decompose(u)), std::invalid_argument);
}

TEST(DivergenceViaPair, LowerBoundsProjectedDivergence) {
  std::mt19937_64 rng(24);
  for (const char* file : {"binary_4_2.json", "independence_2_3_3.json"}) {
    auto m = bundled(file);
    auto basis = kernel_basis(m);
    for (int t = 0; t < 50; ++t) {
      auto kp = decompose(random_kernel_vector(basis, m.num_states(), rng));
      EXPECT_GE(ri_project(m, kp.p_plus).divergence, divergence_via_pair(m, kp) - 1e-8);
    }
  }
}

TEST(KernelResidual, Measures) {
  auto bi = bundled("binary_independence.json");
  std::vector<double> in = {1, -1, -1, 1}, out = {1, -1, 1, -1};
  EXPECT_EQ(kernel_residual(bi, in), 0.0);
  EXPECT_GT(kernel_residual(bi, out), 0.5);
}
