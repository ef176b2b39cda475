#include "divmax/kernel_objective.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "divmax/divergence.hpp"

namespace divmax {

double LemmaResiduals::max() const { return std::max({entropy_sum, odds, divergence, pair_sum}); }

KernelPoint decompose(std::span<const double> u, double sum_tolerance) {
  double pos = 0, neg = 0, scale = 0;
  for (double v : u) {
    if (v > 0) pos += v;
    if (v < 0) neg -= v;
    scale = std::max(scale, std::abs(v));
  }
  if (scale == 0) throw std::invalid_argument("decompose: degenerate kernel point u = 0");
  if (std::abs(pos - neg) > sum_tolerance * std::max(1.0, pos + neg)) {
    throw std::invalid_argument("decompose: entries of u do not sum to zero");
  }
  KernelPoint kp;
  kp.u.assign(u.begin(), u.end());
  kp.degree = 0.5 * (pos + neg);
  kp.p_plus.assign(u.size(), 0.0);
  kp.p_minus.assign(u.size(), 0.0);
  for (std::size_t x = 0; x < u.size(); ++x) {
    if (u[x] > 0) kp.p_plus[x] = u[x] / pos;
    if (u[x] < 0) kp.p_minus[x] = -u[x] / neg;
  }
  return kp;
}

double dbar(std::span<const double> r, std::span<const double> u) {
  if (r.size() != u.size()) throw std::invalid_argument("dbar: length mismatch");
  double s = 0;
  for (std::size_t x = 0; x < u.size(); ++x) {
    if (u[x] != 0) s += u[x] * std::log(std::abs(u[x]) / r[x]);
  }
  return s;
}

double dbar(const ExponentialFamilyModel& model, std::span<const double> u) {
  return dbar(model.r(), u);
}

double dbar1(const ExponentialFamilyModel& model, std::span<const double> u) {
  double l1 = 0;
  for (double v : u) l1 += std::abs(v);
  if (l1 == 0) throw std::invalid_argument("dbar1: u = 0");
  return dbar(model, u) / (0.5 * l1);
}

MixtureResult optimal_mixture(std::span<const double> r, const KernelPoint& kp) {
  if (!(kp.degree > 0)) throw std::invalid_argument("optimal_mixture: degenerate kernel point");
  const double hp = h_r(r, kp.p_plus);
  const double hm = h_r(r, kp.p_minus);
  MixtureResult res;
  res.mu = 1.0 / (1.0 + std::exp(hm - hp));
  res.p_hat.resize(kp.p_plus.size());
  for (std::size_t x = 0; x < res.p_hat.size(); ++x) {
    res.p_hat[x] = res.mu * kp.p_plus[x] + (1.0 - res.mu) * kp.p_minus[x];
  }
  return res;
}

MixtureResult optimal_mixture(const ExponentialFamilyModel& model, const KernelPoint& kp) {
  return optimal_mixture(model.r(), kp);
}

namespace {
double rel_diff(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }
}  // namespace

LemmaResiduals lemma_identities(std::span<const double> r, const KernelPoint& kp) {
  const MixtureResult mix = optimal_mixture(r, kp);
  const double hp = h_r(r, kp.p_plus);
  const double hm = h_r(r, kp.p_minus);
  const double hhat = h_r(r, mix.p_hat);
  const double d_plus = kl(kp.p_plus, mix.p_hat);
  const double d_minus = kl(kp.p_minus, mix.p_hat);
  LemmaResiduals res;
  res.entropy_sum = rel_diff(std::exp(hhat), std::exp(hp) + std::exp(hm));
  res.odds = rel_diff(mix.mu / (1.0 - mix.mu), std::exp(hp - hm));
  res.divergence = std::max(rel_diff(d_plus, std::log1p(std::exp(hm - hp))),
                            rel_diff(d_plus, hhat - hp));
  res.pair_sum = std::abs(std::exp(-d_plus) + std::exp(-d_minus) - 1.0);
  return res;
}

LemmaResiduals lemma_identities(const ExponentialFamilyModel& model, const KernelPoint& kp) {
  return lemma_identities(model.r(), kp);
}

double kernel_residual(const ExponentialFamilyModel& model, std::span<const double> u) {
  const std::vector<double> au = moment_map(model, u);
  double worst = 0;
  for (double v : au) worst = std::max(worst, std::abs(v));
  return worst;
}

double divergence_via_pair(const ExponentialFamilyModel& model, const KernelPoint& kp,
                           double kernel_tolerance) {
  if (!(kp.degree > 0)) throw std::invalid_argument("divergence_via_pair: degenerate kernel point");
  if (kernel_residual(model, kp.u) > kernel_tolerance * std::max(1.0, kp.degree)) {
    throw std::invalid_argument("divergence_via_pair: u is not in ker A");
  }
  const double hp = h_r(model, kp.p_plus);
  const double hm = h_r(model, kp.p_minus);
  return std::log1p(std::exp(hm - hp));
}

}  // namespace divmax
