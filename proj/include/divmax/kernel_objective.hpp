#pragma once

// Kernel elements u = d_u (P+ - P-) and the objective
//   Dbar_r(u) = sum_x u(x) log(|u(x)| / r(x)),
// whose maximizers over {d_u = 1} carry the maximizers of D(. || E) as their
// positive parts.

#include <span>
#include <vector>

#include "divmax/model.hpp"

namespace divmax {

struct KernelPoint {
  std::vector<double> u;
  std::vector<double> p_plus;
  std::vector<double> p_minus;
  double degree = 0.0;   // half the l1 norm of u
};

struct MixtureResult {
  double mu = 0.5;
  std::vector<double> p_hat;   // mu P+ + (1 - mu) P-
};

struct LemmaResiduals {
  double entropy_sum = 0.0;     // exp H(P^) vs exp H(P+) + exp H(P-)
  double odds = 0.0;            // mu / (1 - mu) vs exp(H(P+) - H(P-))
  double divergence = 0.0;      // D(P+||P^) vs log(1 + exp(H(P-) - H(P+)))
  double pair_sum = 0.0;        // exp(-D(P+||P^)) + exp(-D(P-||P^)) vs 1
  double max() const;
};

/// Splits u into its normalized positive and negative parts. Throws
/// std::invalid_argument when u = 0 or when the entries do not sum to zero.
KernelPoint decompose(std::span<const double> u, double sum_tolerance = 1e-12);

double dbar(std::span<const double> r, std::span<const double> u);
double dbar(const ExponentialFamilyModel& model, std::span<const double> u);

/// Dbar(u) / d_u; invariant under positive scaling.
double dbar1(const ExponentialFamilyModel& model, std::span<const double> u);

/// The H_r-maximizing point on the segment [P-, P+] in closed form.
MixtureResult optimal_mixture(std::span<const double> r, const KernelPoint& kp);
MixtureResult optimal_mixture(const ExponentialFamilyModel& model, const KernelPoint& kp);

LemmaResiduals lemma_identities(std::span<const double> r, const KernelPoint& kp);
LemmaResiduals lemma_identities(const ExponentialFamilyModel& model, const KernelPoint& kp);

/// log(1 + exp(H_r(P-) - H_r(P+))) = D(P+ || P^). A lower bound on D(P+ || E),
/// attained when P^ is the rI-projection. Throws when u is not in ker A.
double divergence_via_pair(const ExponentialFamilyModel& model, const KernelPoint& kp,
                           double kernel_tolerance = 1e-9);

/// max_i |(A u)_i|
double kernel_residual(const ExponentialFamilyModel& model, std::span<const double> u);

}  // namespace divmax
