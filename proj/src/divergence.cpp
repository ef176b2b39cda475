#include "divmax/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

namespace divmax {

double h_r(std::span<const double> r, std::span<const double> q) {
  if (r.size() != q.size()) throw std::invalid_argument("h_r: length mismatch");
  double s = 0.0;
  for (std::size_t x = 0; x < q.size(); ++x) {
    if (q[x] < 0) throw std::invalid_argument("h_r: negative entry");
    if (q[x] > 0) s -= q[x] * std::log(q[x] / r[x]);
  }
  return s;
}

double h_r(const ExponentialFamilyModel& model, std::span<const double> q) {
  return h_r(model.r(), q);
}

double kl(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw std::invalid_argument("kl: length mismatch");
  double s = 0.0;
  for (std::size_t x = 0; x < p.size(); ++x) {
    if (p[x] <= 0) continue;
    if (q[x] <= 0) return std::numeric_limits<double>::infinity();
    s += p[x] * std::log(p[x] / q[x]);
  }
  return s;
}

std::vector<double> family_member(const ExponentialFamilyModel& model,
                                  std::span<const double> theta) {
  if (theta.size() != model.num_rows()) throw std::invalid_argument("family_member: length mismatch");
  const std::size_t n = model.num_states();
  std::vector<double> e(n);
  for (std::size_t x = 0; x < n; ++x) {
    double s = 0;
    for (std::size_t i = 0; i < theta.size(); ++i) s += theta[i] * static_cast<double>(model.a(i, x));
    e[x] = s;
  }
  const double shift = *std::max_element(e.begin(), e.end());
  std::vector<double> q(n);
  double z = 0;
  for (std::size_t x = 0; x < n; ++x) {
    q[x] = model.r()[x] * std::exp(e[x] - shift);
    z += q[x];
  }
  for (auto& v : q) v /= z;
  return q;
}

namespace {

// Rows of A whose restriction to `support` is a basis of the restricted row space.
std::vector<std::size_t> independent_rows(const ExponentialFamilyModel& model,
                                          std::span<const std::size_t> support) {
  exact::RationalMatrix transposed(support.size(), exact::RationalVector(model.num_rows()));
  for (std::size_t j = 0; j < support.size(); ++j) {
    for (std::size_t i = 0; i < model.num_rows(); ++i) transposed[j][i] = model.a(i, support[j]);
  }
  return exact::reduced_row_echelon(std::move(transposed), model.num_rows()).pivots;
}

}  // namespace

ProjectionResult ri_project(const ExponentialFamilyModel& model, std::span<const double> p,
                            const ProjectionOptions& options) {
  const std::size_t n = model.num_states();
  if (p.size() != n) throw std::invalid_argument("ri_project: length mismatch");
  double total = 0;
  for (double v : p) {
    if (!(v >= 0) || !std::isfinite(v)) throw std::invalid_argument("ri_project: input is not a probability vector");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("ri_project: input does not sum to one");

  ProjectionResult res;
  res.support = facial_support_of(model, p);
  const auto& support = res.support;
  const std::vector<std::size_t> rows = independent_rows(model, support);
  const std::size_t m = support.size();
  const std::size_t k = rows.size();

  Eigen::MatrixXd a(k, m);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < m; ++j) a(i, j) = static_cast<double>(model.a(rows[i], support[j]));
  }
  Eigen::VectorXd r(m);
  for (std::size_t j = 0; j < m; ++j) r(j) = model.r()[support[j]];
  const std::vector<double> b_full = moment_map(model, p);
  Eigen::VectorXd b(k);
  for (std::size_t i = 0; i < k; ++i) b(i) = b_full[rows[i]];

  auto primal = [&](const Eigen::VectorXd& theta) -> Eigen::VectorXd {
    Eigen::VectorXd e = a.transpose() * theta;
    return (r.array() * e.array().exp()).matrix();
  };
  auto objective = [&](const Eigen::VectorXd& theta, const Eigen::VectorXd& q) {
    return q.sum() - theta.dot(b);
  };
  auto full_residual = [&](const Eigen::VectorXd& q) {
    double worst = 0;
    for (std::size_t i = 0; i < model.num_rows(); ++i) {
      double s = 0;
      for (std::size_t j = 0; j < m; ++j) s += static_cast<double>(model.a(i, support[j])) * q(j);
      worst = std::max(worst, std::abs(s - b_full[i]));
    }
    return worst;
  };

  Eigen::VectorXd theta = Eigen::VectorXd::Zero(k);
  Eigen::VectorXd q = primal(theta);
  double resid = full_residual(q);
  int it = 0;
  while (resid > options.tolerance) {
    if (it >= options.max_iterations) {
      throw ConvergenceError("ri_project: no convergence within " + std::to_string(options.max_iterations) +
                             " iterations (moment residual " + std::to_string(resid) + ")");
    }
    ++it;
    Eigen::VectorXd grad = a * q - b;
    Eigen::MatrixXd hess = a * q.asDiagonal() * a.transpose();
    Eigen::VectorXd step = hess.ldlt().solve(-grad);
    const double slope = grad.dot(step);
    const double f0 = objective(theta, q);
    Eigen::VectorXd next_theta = theta + step;
    Eigen::VectorXd next_q = primal(next_theta);
    double f1 = objective(next_theta, next_q);
    // Near the optimum the dual objective sits at its rounding floor; the full
    // step is then judged by the moment residual instead.
    bool accepted = std::isfinite(f1) && (f1 <= f0 + 1e-4 * slope || full_residual(next_q) < 0.5 * resid);
    double t = 1.0;
    for (int ls = 0; !accepted && ls < 60; ++ls) {
      t *= 0.5;
      next_theta = theta + t * step;
      next_q = primal(next_theta);
      f1 = objective(next_theta, next_q);
      accepted = std::isfinite(f1) && f1 <= f0 + 1e-4 * t * slope;
    }
    if (!accepted) {
      throw ConvergenceError("ri_project: line search stalled at moment residual " + std::to_string(resid));
    }
    theta = next_theta;
    q = next_q;
    resid = full_residual(q);
  }

  res.p_e.assign(n, 0.0);
  for (std::size_t j = 0; j < m; ++j) res.p_e[support[j]] = q(j);
  res.theta.assign(model.num_rows(), 0.0);
  for (std::size_t i = 0; i < k; ++i) res.theta[rows[i]] = theta(i);
  res.iterations = it;
  res.residual = resid;
  res.divergence = kl(p, res.p_e);
  return res;
}

double pythagorean_check(const ExponentialFamilyModel& model, std::span<const double> p,
                         std::span<const double> q_in_family, const ProjectionResult& projection) {
  (void)model;
  const double lhs = kl(p, q_in_family);
  const double rhs = kl(p, projection.p_e) + kl(projection.p_e, q_in_family);
  if (std::isinf(lhs) && std::isinf(rhs)) return 0.0;
  return std::abs(lhs - rhs);
}

double pythagorean_check(const ExponentialFamilyModel& model, std::span<const double> p,
                         std::span<const double> q_in_family) {
  return pythagorean_check(model, p, q_in_family, ri_project(model, p));
}

}  // namespace divmax
