#include <gtest/gtest.h>

#include <map>
#include <random>

#include "divmax/sign_vectors.hpp"
#include "support.hpp"

using namespace divmax;
using divmax::test_support::bundled;

namespace {

SignVector sv(const char* s) { return SignVector::from_string(s); }

SignVector random_sign(std::mt19937_64& rng, std::size_t n) {
  std::uniform_int_distribution<int> d(-1, 1);
  std::vector<std::int8_t> e(n);
  for (auto& v : e) v = static_cast<std::int8_t>(d(rng));
  return SignVector(e);
}

std::vector<SignVector> classes_of(const ExponentialFamilyModel& m, EnumerationMode mode) {
  auto basis = kernel_basis(m);
  EnumerationOptions o;
  o.mode = mode;
  o.max_classes = 1000000;
  return enumerate_sign_vectors(m, circuits(m, basis), SymmetryGroup(m), o);
}

}  // namespace

TEST(SignVectorType, StringRoundTrip) {
  auto s = sv("+-0+");
  EXPECT_EQ(s.str(), "+-0+");
  EXPECT_EQ(s.positive_count(), 2u);
  EXPECT_EQ(s.negative_count(), 1u);
  EXPECT_EQ(s.support(), (std::vector<std::size_t>{0, 1, 3}));
  EXPECT_EQ((-s).str(), "-+0-");
  EXPECT_THROW(sv("+x"), std::invalid_argument);
}

TEST(Compose, Examples) {
  EXPECT_EQ(compose(sv("+0-"), sv("-++")).str(), "++-");
  auto s = sv("+0-+");
  EXPECT_EQ(compose(s, s), s);
  EXPECT_EQ(compose(s, sv("0000")), s);
  EXPECT_EQ(compose(sv("0000"), s), s);
  EXPECT_THROW(compose(sv("+-"), sv("+-0")), std::invalid_argument);
}

TEST(Compose, AssociativeAndIdempotent) {
  std::mt19937_64 rng(31);
  for (int t = 0; t < 500; ++t) {
    auto a = random_sign(rng, 9), b = random_sign(rng, 9), c = random_sign(rng, 9);
    EXPECT_EQ(compose(compose(a, b), c), compose(a, compose(b, c)));
    EXPECT_EQ(compose(a, a), a);
  }
}

TEST(Circuits, BinaryIndependence) {
  auto m = bundled("binary_independence.json");
  auto cs = circuits(m, kernel_basis(m));
  ASSERT_EQ(cs.circuits.size(), 1u);
  EXPECT_EQ(cs.circuits[0].sign.str(), "+--+");
  EXPECT_EQ(cs.circuits[0].vector, (exact::IntVector{1, -1, -1, 1}));
}

TEST(Circuits, FullRankHasNone) {
  auto doc = model_to_json(bundled("binary_independence.json"));
  doc["A"] = {{1, 1, 1, 1}, {1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}};
  doc["symmetry_generators"] = nlohmann::json::array();
  auto m = parse_model(doc);
  EXPECT_TRUE(circuits(m, kernel_basis(m)).circuits.empty());
}

TEST(Circuits, AreInclusionMinimalKernelVectors) {
  std::mt19937_64 rng(32);
  std::vector<ExponentialFamilyModel> models = {bundled("binary_4_2.json")};
  for (int t = 0; t < 10; ++t) models.push_back(oracles::random_model(rng, 7 + t % 3, 2 + t % 3));
  for (const auto& m : models) {
    auto cs = circuits(m, kernel_basis(m));
    ASSERT_FALSE(cs.circuits.empty());
    for (const auto& c : cs.circuits) {
      for (std::size_t i = 0; i < m.num_rows(); ++i) {
        std::int64_t s = 0;
        for (std::size_t x = 0; x < m.num_states(); ++x) s += m.a(i, x) * c.vector[x];
        EXPECT_EQ(s, 0);
      }
      EXPECT_EQ(SignVector::of(std::span<const std::int64_t>(c.vector)), c.sign);
      // Dropping any support element leaves no nonzero kernel vector.
      for (std::size_t drop : c.sign.support()) {
        std::vector<std::size_t> cols;
        for (std::size_t x : c.sign.support()) {
          if (x != drop) cols.push_back(x);
        }
        EXPECT_EQ(exact::rank(m.restricted_rational(cols), cols.size()), cols.size());
      }
    }
  }
}

TEST(Enumerate, BinaryIndependenceHasOneClass) {
  auto classes = classes_of(bundled("binary_independence.json"), EnumerationMode::closure);
  ASSERT_EQ(classes.size(), 1u);
  EXPECT_EQ(classes[0].str(), "-++-");
}

TEST(Enumerate, Model42Statistics) {
  auto m = bundled("binary_4_2.json");
  auto basis = kernel_basis(m);
  auto classes = classes_of(m, EnumerationMode::closure);
  EXPECT_EQ(classes.size(), 73u);
  std::map<std::size_t, std::size_t> by_support;
  std::size_t var0 = 0;
  for (const auto& s : classes) {
    if (filter_var0(basis, s)) {
      ++var0;
      ++by_support[s.support().size()];
    }
  }
  EXPECT_EQ(var0, 20u);
  EXPECT_EQ(by_support, (std::map<std::size_t, std::size_t>{{8, 2}, {12, 3}, {16, 15}}));
}

TEST(Enumerate, EveryClassIsRealizableAndCanonical) {
  auto m = bundled("binary_4_2.json");
  SymmetryGroup g(m);
  for (const auto& s : classes_of(m, EnumerationMode::closure)) {
    auto real = is_sign_vector(m, s);
    ASSERT_TRUE(real.realizable) << s.str();
    for (std::size_t x = 0; x < s.size(); ++x) EXPECT_EQ(sign(real.witness[x]), s[x]);
    EXPECT_TRUE(g.is_canonical(s));
    EXPECT_EQ(g.canonical(s), s);
  }
}

TEST(Enumerate, ScanMatchesClosureOnSmallModels) {
  std::mt19937_64 rng(33);
  for (int t = 0; t < 12; ++t) {
    const std::size_t n = 5 + t % 4;
    auto m = oracles::random_model(rng, n, 2 + t % 2);
    EXPECT_EQ(classes_of(m, EnumerationMode::closure), classes_of(m, EnumerationMode::scan)) << "model " << t;
  }
  auto bi = bundled("binary_independence.json");
  EXPECT_EQ(classes_of(bi, EnumerationMode::closure), classes_of(bi, EnumerationMode::scan));
}

TEST(Enumerate, ScanMatchesClosureOnTenStates) {
  std::mt19937_64 rng(34);
  auto m = oracles::random_model(rng, 10, 3);
  EXPECT_EQ(classes_of(m, EnumerationMode::closure), classes_of(m, EnumerationMode::scan));
}

TEST(Enumerate, CapCarriesPartialResult) {
  auto m = bundled("binary_4_2.json");
  auto basis = kernel_basis(m);
  EnumerationOptions o;
  o.max_classes = 10;
  try {
    enumerate_sign_vectors(m, circuits(m, basis), SymmetryGroup(m), o);
    FAIL() << "cap not enforced";
  } catch (const CapExceeded& e) {
    EXPECT_GE(e.partial().size(), 10u);
  }
}

TEST(IsSignVector, Examples) {
  auto m = bundled("binary_independence.json");
  auto yes = is_sign_vector(m, sv("+--+"));
  ASSERT_TRUE(yes.realizable);
  EXPECT_EQ(yes.witness[0], -yes.witness[1]);
  EXPECT_EQ(yes.witness[0], yes.witness[3]);
  EXPECT_FALSE(is_sign_vector(m, sv("++--")).realizable);
  auto zero = is_sign_vector(m, sv("0000"));
  EXPECT_TRUE(zero.realizable);
  for (const auto& w : zero.witness) EXPECT_EQ(w, 0);
}

TEST(Filters, Examples) {
  auto bi = bundled("binary_independence.json");
  auto bi_basis = kernel_basis(bi);
  EXPECT_TRUE(filter_var0(bi_basis, sv("+--+")));
  EXPECT_TRUE(filter_support_bound(bi, sv("+--+")));
  auto m233 = bundled("independence_2_3_3.json");
  EXPECT_FALSE(filter_support_bound(m233, sv("+++++++-------0000")));
  EXPECT_TRUE(filter_support_bound(m233, sv("++++++--------0000")));
}

TEST(Filters, Var0IsOrbitInvariant) {
  std::mt19937_64 rng(35);
  auto m = bundled("binary_4_2.json");
  auto basis = kernel_basis(m);
  SymmetryGroup g(m);
  std::uniform_int_distribution<std::size_t> pick(0, g.order() - 1);
  for (const auto& s : classes_of(m, EnumerationMode::closure)) {
    const bool base = filter_var0(basis, s);
    EXPECT_EQ(filter_var0(basis, -s), base);
    for (int t = 0; t < 10; ++t) {
      const auto& perm = g.elements()[pick(rng)];
      auto moved = g.apply<std::int8_t>(perm, std::span<const std::int8_t>(s.entries()));
      EXPECT_EQ(filter_var0(basis, SignVector(moved)), base);
    }
  }
}

TEST(Canonicalize, Examples) {
  std::mt19937_64 rng(36);
  auto m = oracles::random_model(rng, 6, 2);
  for (int t = 0; t < 50; ++t) {
    auto s = random_sign(rng, 6);
    auto c = canonicalize(m, s);
    EXPECT_TRUE(c == s || c == -s);
  }
  auto bi = bundled("binary_independence.json");
  EXPECT_EQ(canonicalize(bi, sv("+--+")).str(), "-++-");
  EXPECT_EQ(canonicalize(bi, sv("-++-")).str(), "-++-");
}

TEST(Canonicalize, GroupOrderCap) {
  std::vector<Permutation> gens = {{1, 2, 3, 4, 5, 0}, {1, 0, 2, 3, 4, 5}};
  EXPECT_EQ(SymmetryGroup(6, gens).order(), 720u);
  EXPECT_THROW(SymmetryGroup(6, gens, 100), GroupOrderExceeded);
}
