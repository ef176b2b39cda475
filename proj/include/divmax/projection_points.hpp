#pragma once

// Projection points through the monomial parameterization
//   u(x) = sigma_x r_Y(x) |alpha_0|^{[sigma_x < 0]} prod_{i >= 1} alpha_i^{A(i, x)},  x in Y = supp sigma,
// with r_Y a member of the family restricted to Y. Substituting into A u = 0
// gives a square system in log-parameters once d_u = 1 is imposed.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "divmax/kernel_objective.hpp"
#include "divmax/model.hpp"
#include "divmax/sign_vectors.hpp"

namespace divmax {

class NotFacial : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SigmaExtendedModel {
  SignVector sigma;
  exact::IntMatrix a_sigma;                    // (h + 1) x |Y|; row 0 is 1 - sigma_x
  std::vector<std::size_t> restricted_states;  // Y
  std::vector<double> r_y;
};

/// Throws NotFacial when Y is not the support of a point in the closure of E.
SigmaExtendedModel build_sigma_model(const ExponentialFamilyModel& model, const SignVector& sigma);

/// u on Y for parameters alpha (length h + 1). Requires alpha_0 < 0 and
/// alpha_i > 0 otherwise.
std::vector<double> monomial_param(const SigmaExtendedModel& sm, std::span<const double> alpha);

struct ProjectionRoot {
  KernelPoint u;                // full length, d_u = 1
  std::vector<double> alpha;    // length h + 1; alpha_0 = -mu / (1 - mu)
  double mu = 0.0;
  double residual = 0.0;        // max |A u|
  double projection_deviation = 0.0;
  bool projection_ok = false;
};

struct ProjectionSolveStats {
  std::size_t starts = 0;
  std::size_t converged = 0;
  std::size_t boundary = 0;
  std::size_t failed = 0;
};

std::vector<ProjectionRoot> solve_projection_points(const ExponentialFamilyModel& model,
                                                    const KernelBasis& basis, const SignVector& sigma,
                                                    int starts = 32, double tol = 1e-10,
                                                    std::uint64_t seed = 0,
                                                    ProjectionSolveStats* stats = nullptr);

struct ProjectionPropertyReport {
  double deviation = 0.0;   // max_{x in Z} |P(x) - P_E(x) / P_E(Z)|
  bool pass = false;
  std::vector<double> p_e;
};

ProjectionPropertyReport verify_projection_property(const ExponentialFamilyModel& model,
                                                    std::span<const double> p, double tol = 1e-8);

/// True when supp p_e is everything, or when some theta separates supp p_e
/// from its complement by two parallel hyperplanes (decided exactly).
bool verify_parallel_hyperplanes(const ExponentialFamilyModel& model, std::span<const double> p_e);

}  // namespace divmax
