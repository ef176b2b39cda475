#include <gtest/gtest.h>

#include <random>

#include "divmax/exact.hpp"
#include "divmax/lp.hpp"
#include "divmax/model.hpp"
#include "support.hpp"

using namespace divmax;
using divmax::test_support::bundled;

namespace {

nlohmann::json tiny_model_json() {
  return nlohmann::json::parse(R"({
    "name": "tiny",
    "states": ["00", "01", "10", "11"],
    "A": [[1,1,0,0],[0,0,1,1],[1,0,1,0],[0,1,0,1]],
    "r": [1, 1, 1, 1],
    "symmetry_generators": [[0,2,1,3]]
  })");
}

ModelError::Kind rejection_kind(const nlohmann::json& doc) {
  try {
    parse_model(doc);
  } catch (const ModelError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "model was accepted";
  return ModelError::Kind::parse;
}

}  // namespace

TEST(Exact, RankAndNullspace) {
  exact::IntMatrix m = {{1, 2, 3}, {2, 4, 6}, {1, 0, 1}};
  EXPECT_EQ(exact::rank(m, 3), 2u);
  auto ns = exact::integer_nullspace(m, 3);
  ASSERT_EQ(ns.size(), 1u);
  for (const auto& row : m) {
    std::int64_t s = 0;
    for (std::size_t j = 0; j < 3; ++j) s += row[j] * ns[0][j];
    EXPECT_EQ(s, 0);
  }
  EXPECT_GT(ns[0][0], 0);
}

TEST(Exact, PrimitiveClearsDenominators) {
  exact::RationalVector v = {exact::Rational(-1, 2), exact::Rational(3, 4), exact::Rational(0)};
  EXPECT_EQ(exact::primitive(v), (exact::IntVector{2, -3, 0}));
}

TEST(Exact, ToRationalIsExact) {
  const double x = 0.1;
  EXPECT_EQ(static_cast<double>(exact::to_rational(x)), x);
}

TEST(Lp, FeasibleInfeasibleUnbounded) {
  // x1 + x2 = 1, maximize x1.
  auto r = lp::maximize({{1, 1}}, {1}, {1, 0});
  ASSERT_EQ(r.status, lp::Status::optimal);
  EXPECT_EQ(r.objective, 1);
  // x1 + x2 = -1 has no nonnegative solution.
  EXPECT_EQ(lp::feasible_point({{1, 1}}, {-1}).status, lp::Status::infeasible);
  // x1 - x2 = 0, maximize x1.
  EXPECT_EQ(lp::maximize({{1, -1}}, {0}, {1, 0}).status, lp::Status::unbounded);
}

TEST(ModelCore, LoadsBinaryIndependence) {
  auto m = bundled("binary_independence.json");
  EXPECT_EQ(m.num_states(), 4u);
  EXPECT_EQ(m.num_rows(), 4u);
  EXPECT_EQ(m.rank(), 3u);
}

TEST(ModelCore, Loads42Model) {
  auto m = bundled("binary_4_2.json");
  EXPECT_EQ(m.num_states(), 16u);
  EXPECT_EQ(m.rank(), 11u);
  EXPECT_EQ(m.kernel_dimension(), 5u);
}

TEST(ModelCore, RejectsZeroReferenceAndNamesState) {
  auto doc = tiny_model_json();
  doc["r"] = {1, 0, 1, 1};
  try {
    parse_model(doc);
    FAIL() << "accepted r with a zero";
  } catch (const ModelError& e) {
    EXPECT_EQ(e.kind(), ModelError::Kind::invalid);
    const std::string what = e.what();
    EXPECT_NE(what.find("reference measure must be strictly positive"), std::string::npos);
    EXPECT_NE(what.find("01"), std::string::npos);
  }
}

TEST(ModelCore, RejectsMissingConstantRow) {
  auto doc = tiny_model_json();
  doc["A"] = {{1, 1, 0, 0}, {1, 0, 1, 0}};
  EXPECT_EQ(rejection_kind(doc), ModelError::Kind::structural);
}

TEST(ModelCore, RejectsNonIntegerEntry) {
  auto doc = tiny_model_json();
  doc["A"][0][0] = 0.5;
  EXPECT_EQ(rejection_kind(doc), ModelError::Kind::invalid);
}

TEST(ModelCore, RejectsMalformedPermutation) {
  auto doc = tiny_model_json();
  doc["symmetry_generators"] = {{0, 0, 1, 3}};
  EXPECT_EQ(rejection_kind(doc), ModelError::Kind::invalid);
}

TEST(ModelCore, RejectsSymmetryThatBreaksKernel) {
  auto doc = tiny_model_json();
  doc["symmetry_generators"] = {{1, 0, 2, 3}};
  EXPECT_EQ(rejection_kind(doc), ModelError::Kind::structural);
}

TEST(ModelCore, MomentMapExamples) {
  auto m = bundled("binary_independence.json");
  std::vector<double> delta00 = {1, 0, 0, 0};
  std::vector<double> col;
  for (std::size_t i = 0; i < m.num_rows(); ++i) col.push_back(static_cast<double>(m.a(i, 0)));
  EXPECT_EQ(moment_map(m, delta00), col);
  std::vector<double> uniform(4, 0.25);
  for (double v : moment_map(m, uniform)) EXPECT_DOUBLE_EQ(v, 0.5);
  std::vector<double> zero(4, 0.0);
  for (double v : moment_map(m, zero)) EXPECT_EQ(v, 0.0);
  std::vector<double> wrong(3, 0.0);
  EXPECT_THROW(moment_map(m, wrong), std::invalid_argument);
}

TEST(ModelCore, KernelBasisOfBinaryIndependence) {
  auto b = kernel_basis(bundled("binary_independence.json"));
  ASSERT_EQ(b.dimension(), 1u);
  EXPECT_EQ(b.vectors[0], (exact::IntVector{1, -1, -1, 1}));
}

TEST(ModelCore, PublishedBasisOf42LiesInKernel) {
  auto m = bundled("binary_4_2.json");
  const exact::IntMatrix published = {
      {1, -1, -1, 1, -1, 1, 1, -1, -1, 1, 1, -1, 1, -1, -1, 1},
      {1, 0, -1, 0, -1, 0, 1, 0, -1, 0, 1, 0, 1, 0, -1, 0},
      {1, -1, 0, 0, -1, 1, 0, 0, -1, 1, 0, 0, 1, -1, 0, 0},
      {1, -1, -1, 1, 0, 0, 0, 0, -1, 1, 1, -1, 0, 0, 0, 0},
      {1, -1, -1, 1, -1, 1, 1, -1, 0, 0, 0, 0, 0, 0, 0, 0},
  };
  EXPECT_EQ(exact::rank(published, 16), 5u);
  for (const auto& u : published) {
    for (std::size_t i = 0; i < m.num_rows(); ++i) {
      std::int64_t s = 0;
      for (std::size_t x = 0; x < 16; ++x) s += m.a(i, x) * u[x];
      EXPECT_EQ(s, 0);
    }
  }
}

TEST(ModelCore, FullRankModelHasEmptyKernel) {
  auto doc = tiny_model_json();
  doc["A"] = {{1, 1, 1, 1}, {1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}};
  doc["symmetry_generators"] = nlohmann::json::array();
  auto m = parse_model(doc);
  EXPECT_EQ(kernel_basis(m).dimension(), 0u);
}

TEST(ModelCore, KernelInvariantsOnAllBundledModels) {
  for (const auto& g : oracles::bundled_models()) {
    const auto& m = g.model;
    auto b = kernel_basis(m);
    EXPECT_EQ(b.dimension() + m.rank(), m.num_states()) << m.name();
    for (const auto& v : b.vectors) {
      std::int64_t total = 0;
      for (auto e : v) total += e;
      EXPECT_EQ(total, 0);
      for (std::size_t i = 0; i < m.num_rows(); ++i) {
        std::int64_t s = 0;
        for (std::size_t x = 0; x < m.num_states(); ++x) s += m.a(i, x) * v[x];
        EXPECT_EQ(s, 0);
      }
    }
    exact::IntMatrix with_ones = m.a();
    with_ones.push_back(exact::IntVector(m.num_states(), 1));
    EXPECT_EQ(exact::rank(with_ones, m.num_states()), m.rank());
  }
}

TEST(ModelCore, FacialSupportExamples) {
  auto bi = bundled("binary_independence.json");
  std::vector<double> delta00 = {1, 0, 0, 0};
  EXPECT_EQ(facial_support(bi, moment_map(bi, delta00)), (std::vector<std::size_t>{0}));
  std::vector<double> uniform(4, 0.25);
  EXPECT_EQ(facial_support(bi, moment_map(bi, uniform)), (std::vector<std::size_t>{0, 1, 2, 3}));
  auto toy = bundled("three_state_toy.json");
  std::vector<double> delta_b = {0, 1, 0};
  EXPECT_EQ(facial_support(toy, moment_map(toy, delta_b)), (std::vector<std::size_t>{1, 2}));
}

TEST(ModelCore, FacialSupportOutsidePolytopeThrows) {
  auto bi = bundled("binary_independence.json");
  std::vector<double> b = {2, 0, 0, 0};
  EXPECT_THROW(facial_support(bi, b), std::domain_error);
}

TEST(ModelCore, FacialSupportContainsSupportOfP) {
  std::mt19937_64 rng(7);
  auto m = bundled("binary_4_2.json");
  for (int t = 0; t < 50; ++t) {
    auto p = divmax::test_support::random_distribution(rng, m.num_states(), 0.7);
    auto face = facial_support_of(m, p);
    for (std::size_t x = 0; x < p.size(); ++x) {
      if (p[x] > 0) EXPECT_TRUE(std::binary_search(face.begin(), face.end(), x));
    }
  }
}
