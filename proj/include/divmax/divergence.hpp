#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "divmax/model.hpp"

namespace divmax {

/// The projection did not reach the moment tolerance within the iteration cap.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ProjectionOptions {
  double tolerance = 1e-12;   // max-norm of A P_E - A P
  int max_iterations = 500;
};

struct ProjectionResult {
  std::vector<double> p_e;
  std::vector<std::size_t> support;
  std::vector<double> theta;     // length h; P_E(x) = r(x) exp(theta . A_x) on the support
  double divergence = 0.0;       // D(P || E)
  int iterations = 0;
  double residual = 0.0;
};

/// H_r(Q) = -sum Q log(Q / r), with 0 log 0 = 0. Q need not be normalized.
double h_r(const ExponentialFamilyModel& model, std::span<const double> q);
double h_r(std::span<const double> r, std::span<const double> q);

/// D(P || Q); +infinity when supp P is not contained in supp Q.
double kl(std::span<const double> p, std::span<const double> q);

/// r(x) exp(theta . A_x), normalized.
std::vector<double> family_member(const ExponentialFamilyModel& model, std::span<const double> theta);

/// rI-projection of P onto the closure of the family: the face is located
/// exactly first, then H_r is maximized on it by damped Newton in the dual.
ProjectionResult ri_project(const ExponentialFamilyModel& model, std::span<const double> p,
                            const ProjectionOptions& options = {});

/// |D(P||Q) - D(P||P_E) - D(P_E||Q)| for Q in the family.
double pythagorean_check(const ExponentialFamilyModel& model, std::span<const double> p,
                         std::span<const double> q_in_family);
double pythagorean_check(const ExponentialFamilyModel& model, std::span<const double> p,
                         std::span<const double> q_in_family, const ProjectionResult& projection);

}  // namespace divmax
