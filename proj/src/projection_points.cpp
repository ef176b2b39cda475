#include "divmax/projection_points.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "divmax/critical_solver.hpp"
#include "divmax/divergence.hpp"

namespace divmax {

SigmaExtendedModel build_sigma_model(const ExponentialFamilyModel& model, const SignVector& sigma) {
  if (sigma.is_zero()) throw std::invalid_argument("build_sigma_model: zero sign vector");
  SigmaExtendedModel sm;
  sm.sigma = sigma;
  sm.restricted_states = sigma.support();
  const auto& y = sm.restricted_states;
  sm.a_sigma.assign(model.num_rows() + 1, exact::IntVector(y.size()));
  for (std::size_t j = 0; j < y.size(); ++j) {
    sm.a_sigma[0][j] = 1 - sigma[y[j]];
    for (std::size_t i = 0; i < model.num_rows(); ++i) sm.a_sigma[i + 1][j] = model.a(i, y[j]);
  }
  if (sigma.full_support()) {
    sm.r_y = model.r();
    return sm;
  }
  std::vector<double> uniform(model.num_states(), 0.0);
  for (auto x : y) uniform[x] = 1.0 / static_cast<double>(y.size());
  const ProjectionResult proj = ri_project(model, uniform);
  if (proj.support != y) {
    throw NotFacial("support of " + sigma.str() + " is not a facial support set");
  }
  sm.r_y.resize(y.size());
  for (std::size_t j = 0; j < y.size(); ++j) sm.r_y[j] = proj.p_e[y[j]];
  return sm;
}

std::vector<double> monomial_param(const SigmaExtendedModel& sm, std::span<const double> alpha) {
  if (alpha.size() != sm.a_sigma.size()) throw std::invalid_argument("monomial_param: wrong parameter count");
  if (!(alpha[0] < 0)) throw std::domain_error("monomial_param: alpha_0 must be negative");
  for (std::size_t i = 1; i < alpha.size(); ++i) {
    if (!(alpha[i] > 0)) throw std::domain_error("monomial_param: alpha_i must be positive for i >= 1");
  }
  const auto& y = sm.restricted_states;
  std::vector<double> u(y.size());
  for (std::size_t j = 0; j < y.size(); ++j) {
    double v = sm.r_y[j];
    if (sm.a_sigma[0][j] != 0) v *= std::pow(-alpha[0], sm.a_sigma[0][j] / 2);
    for (std::size_t i = 1; i < alpha.size(); ++i) {
      const auto e = sm.a_sigma[i][j];
      if (e != 0) v *= std::pow(alpha[i], static_cast<double>(e));
    }
    u[j] = sm.sigma[y[j]] * v;
  }
  return u;
}

namespace {

std::vector<std::size_t> independent_rows(const ExponentialFamilyModel& model, std::span<const std::size_t> y) {
  exact::RationalMatrix t(y.size(), exact::RationalVector(model.num_rows()));
  for (std::size_t j = 0; j < y.size(); ++j) {
    for (std::size_t i = 0; i < model.num_rows(); ++i) t[j][i] = model.a(i, y[j]);
  }
  return exact::reduced_row_echelon(std::move(t), model.num_rows()).pivots;
}

}  // namespace

std::vector<ProjectionRoot> solve_projection_points(const ExponentialFamilyModel& model, const KernelBasis& basis,
                                                    const SignVector& sigma, int starts, double tol,
                                                    std::uint64_t seed, ProjectionSolveStats* stats) {
  ProjectionSolveStats local;
  const SigmaExtendedModel sm = build_sigma_model(model, sigma);
  const OrthantProblem prob = build_orthant_problem(model, basis, sigma);
  const auto& y = sm.restricted_states;
  const std::vector<std::size_t> rows = independent_rows(model, y);
  const std::size_t m = y.size();
  const std::size_t q = rows.size() + 1;

  // Design matrix of the exponent: column 0 is [sigma < 0], then A_R^T.
  Eigen::MatrixXd design(m, q);
  Eigen::VectorXd sgn(m), ry(m);
  for (std::size_t j = 0; j < m; ++j) {
    design(j, 0) = sigma[y[j]] < 0 ? 1.0 : 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) design(j, i + 1) = static_cast<double>(model.a(rows[i], y[j]));
    sgn(j) = sigma[y[j]];
    ry(j) = sm.r_y[j];
  }
  auto u_of = [&](const Eigen::VectorXd& beta) {
    return Eigen::VectorXd(sgn.array() * ry.array() * (design * beta).array().exp());
  };
  auto g_of = [&](const Eigen::VectorXd& u) {
    Eigen::VectorXd g(q);
    g.head(q - 1) = design.rightCols(q - 1).transpose() * u;
    g(q - 1) = sgn.dot(u) - 2.0;
    return g;
  };

  std::mt19937_64 rng(seed);
  std::vector<std::vector<double>> samples =
      prob.k_basis.empty() ? std::vector<std::vector<double>>(1)
                           : sample_orthant(prob, static_cast<std::size_t>(std::max(1, starts)), rng);

  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> fit(design);
  std::vector<ProjectionRoot> roots;
  for (const auto& lambda : samples) {
    ++local.starts;
    const std::vector<double> u0 = orthant_point(prob, lambda);
    Eigen::VectorXd target(m);
    for (std::size_t j = 0; j < m; ++j) target(j) = std::log(std::abs(u0[y[j]]) / ry(j));
    Eigen::VectorXd beta = fit.solve(target);
    Eigen::VectorXd u = u_of(beta);
    Eigen::VectorXd g = g_of(u);
    bool converged = false;
    for (int it = 0; it < 100 && g.allFinite(); ++it) {
      if (g.lpNorm<Eigen::Infinity>() <= tol) {
        converged = true;
        break;
      }
      Eigen::MatrixXd jac(q, q);
      jac.topRows(q - 1) = design.rightCols(q - 1).transpose() * u.asDiagonal() * design;
      jac.row(q - 1) = (sgn.array() * u.array()).matrix().transpose() * design;
      const Eigen::VectorXd delta = jac.fullPivLu().solve(-g);
      if (!delta.allFinite()) break;
      double t = 1.0;
      bool accepted = false;
      const double g0 = g.norm();
      for (int ls = 0; ls < 50; ++ls) {
        const Eigen::VectorXd nb = beta + t * delta;
        const Eigen::VectorXd nu = u_of(nb);
        const Eigen::VectorXd ng = g_of(nu);
        if (ng.allFinite() && ng.norm() < (1.0 - 1e-4 * t) * g0) {
          beta = nb;
          u = nu;
          g = ng;
          accepted = true;
          break;
        }
        t *= 0.5;
      }
      if (!accepted) break;
    }
    if (!converged && g.allFinite() && g.lpNorm<Eigen::Infinity>() <= tol) converged = true;
    if (!converged) {
      ++local.failed;
      continue;
    }
    const double umax = u.cwiseAbs().maxCoeff();
    if (u.cwiseAbs().minCoeff() < 1e-8 * umax) {
      ++local.boundary;
      continue;
    }
    ++local.converged;

    std::vector<double> full(model.num_states(), 0.0);
    for (std::size_t j = 0; j < m; ++j) full[y[j]] = u(j);
    double pos = 0, neg = 0;
    for (double v : full) (v > 0 ? pos : neg) += std::abs(v);
    const double d = 0.5 * (pos + neg);
    for (auto& v : full) v /= d;

    bool dup = false;
    for (const auto& r : roots) {
      double dist = 0;
      for (std::size_t x = 0; x < full.size(); ++x) dist = std::max(dist, std::abs(r.u.u[x] - full[x]));
      if (dist < 1e-6) dup = true;
    }
    if (dup) continue;

    ProjectionRoot root;
    root.u = decompose(full, 1e-9);
    root.alpha.assign(model.num_rows() + 1, 1.0);
    root.alpha[0] = -std::exp(beta(0));
    for (std::size_t i = 0; i < rows.size(); ++i) root.alpha[rows[i] + 1] = std::exp(beta(i + 1));
    root.mu = 1.0 / (1.0 + std::exp(-beta(0)));
    root.residual = kernel_residual(model, full);
    const ProjectionPropertyReport pp = verify_projection_property(model, root.u.p_plus, 1e-8);
    root.projection_deviation = pp.deviation;
    root.projection_ok = pp.pass;
    roots.push_back(std::move(root));
  }
  std::sort(roots.begin(), roots.end(),
            [](const ProjectionRoot& a, const ProjectionRoot& b) { return a.u.u < b.u.u; });
  if (stats) *stats = local;
  return roots;
}

ProjectionPropertyReport verify_projection_property(const ExponentialFamilyModel& model, std::span<const double> p,
                                                    double tol) {
  ProjectionPropertyReport rep;
  const ProjectionResult proj = ri_project(model, p);
  rep.p_e = proj.p_e;
  double mass = 0;
  for (std::size_t x = 0; x < p.size(); ++x) {
    if (p[x] > 0) mass += proj.p_e[x];
  }
  for (std::size_t x = 0; x < p.size(); ++x) {
    if (p[x] > 0) rep.deviation = std::max(rep.deviation, std::abs(p[x] - proj.p_e[x] / mass));
  }
  rep.pass = rep.deviation <= tol;
  return rep;
}

bool verify_parallel_hyperplanes(const ExponentialFamilyModel& model, std::span<const double> p_e) {
  const std::size_t n = model.num_states();
  const std::size_t h = model.num_rows();
  if (p_e.size() != n) throw std::invalid_argument("verify_parallel_hyperplanes: length mismatch");
  if (std::all_of(p_e.begin(), p_e.end(), [](double v) { return v > 0; })) return true;
  // theta . A_x - c1 = 0 on Y, theta . A_x - c2 = 0 off Y, c1 - c2 = 1.
  exact::RationalMatrix m(n + 1, exact::RationalVector(h + 2, exact::Rational(0)));
  exact::RationalVector b(n + 1, exact::Rational(0));
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t i = 0; i < h; ++i) m[x][i] = model.a(i, x);
    m[x][p_e[x] > 0 ? h : h + 1] = -1;
  }
  m[n][h] = 1;
  m[n][h + 1] = -1;
  b[n] = 1;
  return exact::solve(m, b, h + 2).has_value();
}

}  // namespace divmax
