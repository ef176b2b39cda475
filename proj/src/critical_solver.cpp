#include "divmax/critical_solver.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <set>
#include <thread>

#include <Eigen/Dense>

#include "divmax/divergence.hpp"
#include "divmax/projection_points.hpp"

namespace divmax {

using exact::IntMatrix;
using exact::IntVector;

std::vector<IntVector> orthant_directions(const ExponentialFamilyModel& model, const SignVector& sigma,
                                          std::vector<IntVector>* restricted) {
  const auto& y = sigma.support();
  const std::size_t n = model.num_states();
  IntMatrix sub(model.num_rows(), IntVector(y.size()));
  for (std::size_t i = 0; i < model.num_rows(); ++i) {
    for (std::size_t j = 0; j < y.size(); ++j) sub[i][j] = model.a(i, y[j]);
  }
  std::vector<IntVector> w;
  for (const auto& z : exact::integer_nullspace(sub, y.size())) {
    IntVector full(n, 0);
    for (std::size_t j = 0; j < y.size(); ++j) full[y[j]] = z[j];
    w.push_back(std::move(full));
  }
  if (restricted) *restricted = w;
  if (w.empty()) return {};

  auto degree = [&](const IntVector& v) {
    std::int64_t d = 0;
    for (std::size_t x = 0; x < n; ++x) {
      if (sigma[x] > 0) d += v[x];
    }
    return d;
  };
  std::vector<std::int64_t> d(w.size());
  std::size_t k = w.size();
  for (std::size_t i = 0; i < w.size(); ++i) {
    d[i] = degree(w[i]);
    if (d[i] != 0 && (k == w.size() || std::abs(d[i]) < std::abs(d[k]))) k = i;
  }
  if (k == w.size()) throw FlatOrthant("no direction of nonzero degree on " + sigma.str());

  std::vector<IntVector> out;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i == k) continue;
    const std::int64_t g = exact::gcd(d[k], d[i] == 0 ? d[k] : d[i]);
    const std::int64_t ck = d[k] / g;
    const std::int64_t ci = d[i] / g;
    IntVector v(n);
    for (std::size_t x = 0; x < n; ++x) v[x] = ck * w[i][x] - ci * w[k][x];
    out.push_back(exact::remove_content(std::move(v)));
  }
  return out;
}

OrthantProblem build_orthant_problem(const ExponentialFamilyModel& model, const KernelBasis& basis,
                                     const SignVector& sigma) {
  (void)basis;
  const Realization real = is_sign_vector(model, sigma);
  if (!real.realizable || sigma.is_zero()) {
    throw NotRealizable(sigma.str() + " is not a sign vector of ker A");
  }
  OrthantProblem prob;
  prob.sigma = sigma;
  prob.k_basis = orthant_directions(model, sigma, &prob.restricted_kernel);
  exact::Rational d = 0;
  for (std::size_t x = 0; x < sigma.size(); ++x) {
    if (sigma[x] > 0) d += real.witness[x];
  }
  prob.u0.resize(sigma.size());
  for (std::size_t x = 0; x < sigma.size(); ++x) {
    prob.u0[x] = static_cast<double>(exact::Rational(real.witness[x] / d));
  }
  return prob;
}

std::vector<double> orthant_point(const OrthantProblem& prob, std::span<const double> lambda) {
  std::vector<double> u(prob.u0);
  for (std::size_t j = 0; j < prob.k_basis.size(); ++j) {
    if (lambda[j] == 0) continue;
    for (std::size_t x = 0; x < u.size(); ++x) {
      if (prob.k_basis[j][x] != 0) u[x] += lambda[j] * static_cast<double>(prob.k_basis[j][x]);
    }
  }
  return u;
}

double var1_residual(const ExponentialFamilyModel& model, const std::vector<IntVector>& directions,
                     std::span<const double> u) {
  double worst = 0;
  for (const auto& v : directions) {
    double s = 0;
    for (std::size_t x = 0; x < u.size(); ++x) {
      if (v[x] != 0) s += static_cast<double>(v[x]) * std::log(std::abs(u[x]) / model.r()[x]);
    }
    worst = std::max(worst, std::abs(s));
  }
  return worst;
}

namespace {

// Largest t > 0 with sign(u + t w) = sign(u) on the support of sigma.
double step_to_boundary(const SignVector& sigma, std::span<const double> u, std::span<const double> w) {
  double t = std::numeric_limits<double>::infinity();
  for (auto x : sigma.support()) {
    const double a = sigma[x] * u[x];
    const double b = sigma[x] * w[x];
    if (b < 0) t = std::min(t, a / -b);
  }
  return t;
}

std::vector<double> direction_image(const OrthantProblem& prob, std::span<const double> delta) {
  std::vector<double> w(prob.u0.size(), 0.0);
  for (std::size_t j = 0; j < prob.k_basis.size(); ++j) {
    for (std::size_t x = 0; x < w.size(); ++x) w[x] += delta[j] * static_cast<double>(prob.k_basis[j][x]);
  }
  return w;
}

}  // namespace

std::vector<std::vector<double>> sample_orthant(const OrthantProblem& prob, std::size_t count,
                                                std::mt19937_64& rng) {
  const std::size_t p = prob.k_basis.size();
  std::vector<std::vector<double>> out;
  if (p == 0) {
    out.assign(count, {});
    return out;
  }
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif;
  std::vector<double> lambda(p, 0.0);
  std::vector<double> u = prob.u0;
  const std::size_t thin = 3 * p + 10;
  while (out.size() < count) {
    for (std::size_t s = 0; s < thin; ++s) {
      std::vector<double> delta(p);
      for (auto& v : delta) v = normal(rng);
      const std::vector<double> w = direction_image(prob, delta);
      std::vector<double> neg(w.size());
      for (std::size_t x = 0; x < w.size(); ++x) neg[x] = -w[x];
      const double hi = step_to_boundary(prob.sigma, u, w);
      const double lo = -step_to_boundary(prob.sigma, u, neg);
      const double t = lo + (hi - lo) * unif(rng);
      for (std::size_t j = 0; j < p; ++j) lambda[j] += t * delta[j];
      for (std::size_t x = 0; x < u.size(); ++x) u[x] += t * w[x];
    }
    // Resynchronize u with lambda to keep drift out of the samples.
    u = orthant_point(prob, lambda);
    out.push_back(lambda);
  }
  return out;
}

std::uint64_t sigma_seed(const SignVector& sigma, std::uint64_t global_seed) {
  std::uint64_t h = 14695981039346656037ull;
  for (char c : sigma.str()) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  return h ^ (global_seed * 0x9E3779B97F4A7C15ull);
}

namespace {

struct NewtonOutcome {
  enum class Kind { converged, boundary, failed } kind = Kind::failed;
  std::vector<double> u;
  double residual = 0.0;
};

NewtonOutcome newton_orthant(const ExponentialFamilyModel& model, const OrthantProblem& prob,
                             std::vector<double> lambda, double tol) {
  const auto& y = prob.sigma.support();
  const std::size_t p = prob.k_basis.size();
  Eigen::MatrixXd v(y.size(), p);
  for (std::size_t j = 0; j < p; ++j) {
    for (std::size_t i = 0; i < y.size(); ++i) v(i, j) = static_cast<double>(prob.k_basis[j][y[i]]);
  }
  auto residual_vec = [&](const std::vector<double>& u) {
    Eigen::VectorXd g(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) g(i) = std::log(std::abs(u[y[i]]) / model.r()[y[i]]);
    return Eigen::VectorXd(v.transpose() * g);
  };

  NewtonOutcome out;
  std::vector<double> u = orthant_point(prob, lambda);
  Eigen::VectorXd f = residual_vec(u);
  for (int it = 0; it < 100; ++it) {
    if (f.lpNorm<Eigen::Infinity>() <= tol) {
      double umax = 0, umin = std::numeric_limits<double>::infinity();
      for (auto x : y) {
        umax = std::max(umax, std::abs(u[x]));
        umin = std::min(umin, std::abs(u[x]));
      }
      out.kind = umin < 1e-8 * umax ? NewtonOutcome::Kind::boundary : NewtonOutcome::Kind::converged;
      out.u = std::move(u);
      out.residual = f.lpNorm<Eigen::Infinity>();
      return out;
    }
    Eigen::VectorXd inv_u(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) inv_u(i) = 1.0 / u[y[i]];
    const Eigen::MatrixXd jac = v.transpose() * inv_u.asDiagonal() * v;
    const Eigen::VectorXd delta = jac.fullPivLu().solve(-f);
    if (!delta.allFinite()) return out;
    const std::vector<double> w = direction_image(prob, std::span<const double>(delta.data(), p));
    double t = std::min(1.0, 0.99 * step_to_boundary(prob.sigma, u, w));
    const double f0 = f.norm();
    bool accepted = false;
    for (int ls = 0; ls < 50; ++ls) {
      std::vector<double> trial_lambda(lambda);
      for (std::size_t j = 0; j < p; ++j) trial_lambda[j] += t * delta(j);
      std::vector<double> trial_u = orthant_point(prob, trial_lambda);
      const Eigen::VectorXd trial_f = residual_vec(trial_u);
      if (trial_f.allFinite() && trial_f.norm() < (1.0 - 1e-4 * t) * f0) {
        lambda = std::move(trial_lambda);
        u = std::move(trial_u);
        f = trial_f;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;
  }
  double umax = 0, umin = std::numeric_limits<double>::infinity();
  for (auto x : y) {
    umax = std::max(umax, std::abs(u[x]));
    umin = std::min(umin, std::abs(u[x]));
  }
  if (umin < 1e-8 * umax) out.kind = NewtonOutcome::Kind::boundary;
  return out;
}

void normalize_degree(std::vector<double>& u) {
  double pos = 0, neg = 0;
  for (double v : u) (v > 0 ? pos : neg) += std::abs(v);
  const double d = 0.5 * (pos + neg);
  for (auto& v : u) v /= d;
}

double max_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

QuasiCriticalPoint make_point(const ExponentialFamilyModel& model, std::vector<double> u, double residual) {
  normalize_degree(u);
  QuasiCriticalPoint q;
  q.u = decompose(u, 1e-9);
  q.residual = residual;
  q.dbar_value = dbar(model, q.u.u);
  return q;
}

}  // namespace

std::vector<QuasiCriticalPoint> solve_orthant(const ExponentialFamilyModel& model, const OrthantProblem& prob,
                                              int starts, double tol, std::uint64_t seed,
                                              OrthantSolveStats* stats) {
  OrthantSolveStats local;
  std::vector<QuasiCriticalPoint> roots;
  if (prob.k_basis.empty()) {
    local.starts = 1;
    local.converged = 1;
    roots.push_back(make_point(model, prob.u0, 0.0));
    if (stats) *stats = local;
    return roots;
  }
  std::mt19937_64 rng(seed);
  const auto samples = sample_orthant(prob, static_cast<std::size_t>(std::max(1, starts)), rng);

  // Flat orthant: Var1 vanishes at u0 and at the first samples.
  bool flat = var1_residual(model, prob.k_basis, prob.u0) <= tol;
  for (std::size_t s = 0; flat && s < std::min<std::size_t>(3, samples.size()); ++s) {
    flat = var1_residual(model, prob.k_basis, orthant_point(prob, samples[s])) <= tol;
  }
  if (flat) {
    local.flat = true;
    local.starts = 1;
    local.converged = 1;
    roots.push_back(make_point(model, prob.u0, var1_residual(model, prob.k_basis, prob.u0)));
    if (stats) *stats = local;
    return roots;
  }

  for (const auto& lambda : samples) {
    ++local.starts;
    NewtonOutcome res = newton_orthant(model, prob, lambda, tol);
    if (res.kind == NewtonOutcome::Kind::failed) {
      ++local.failed;
      continue;
    }
    if (res.kind == NewtonOutcome::Kind::boundary) {
      ++local.boundary;
      continue;
    }
    ++local.converged;
    QuasiCriticalPoint q = make_point(model, std::move(res.u), res.residual);
    const bool dup = std::any_of(roots.begin(), roots.end(),
                                 [&](const QuasiCriticalPoint& r) { return max_dist(r.u.u, q.u.u) < 1e-6; });
    if (!dup) roots.push_back(std::move(q));
  }
  std::sort(roots.begin(), roots.end(), [](const QuasiCriticalPoint& a, const QuasiCriticalPoint& b) {
    return a.u.u < b.u.u;
  });
  if (stats) *stats = local;
  return roots;
}

QuasiCriticalReport verify_quasi_critical(const ExponentialFamilyModel& model, const KernelBasis& basis,
                                          std::span<const double> u, double tol) {
  double scale = 0;
  for (double v : u) scale = std::max(scale, std::abs(v));
  const SignVector sigma = SignVector::of(u, 1e-12 * scale);
  QuasiCriticalReport rep;
  rep.var0 = filter_var0(basis, sigma);
  try {
    rep.var1 = var1_residual(model, orthant_directions(model, sigma), u);
  } catch (const FlatOrthant&) {
    rep.var1 = 0.0;
  }
  rep.pass = rep.var0 && rep.var1 <= tol;
  return rep;
}

double gradient_check(const ExponentialFamilyModel& model, const OrthantProblem& prob,
                      std::span<const double> lambda, double h) {
  const std::vector<double> u = orthant_point(prob, lambda);
  const auto& sigma = prob.sigma;
  auto degree = [&](const std::vector<double>& w) {
    double d = 0;
    for (std::size_t x = 0; x < w.size(); ++x) {
      if (sigma[x] > 0) d += w[x];
    }
    return d;
  };
  auto objective = [&](const std::vector<double>& w) { return dbar(model, w) / degree(w); };

  std::vector<IntVector> dirs = prob.k_basis;
  dirs.insert(dirs.end(), prob.restricted_kernel.begin(), prob.restricted_kernel.end());
  const double d = degree(u);
  const double f = dbar(model, u);
  double worst = 0;
  for (const auto& iv : dirs) {
    double vmax = 0;
    for (auto e : iv) vmax = std::max(vmax, std::abs(static_cast<double>(e)));
    std::vector<double> v(iv.size());
    for (std::size_t x = 0; x < v.size(); ++x) v[x] = static_cast<double>(iv[x]) / vmax;
    if (step_to_boundary(sigma, u, v) <= h) throw std::domain_error("gradient_check: step leaves the orthant");
    std::vector<double> neg(v.size());
    for (std::size_t x = 0; x < v.size(); ++x) neg[x] = -v[x];
    if (step_to_boundary(sigma, u, neg) <= h) throw std::domain_error("gradient_check: step leaves the orthant");

    double df = 0, dd = 0;
    for (std::size_t x = 0; x < u.size(); ++x) {
      if (v[x] == 0) continue;
      df += v[x] * (std::log(std::abs(u[x]) / model.r()[x]) + 1.0);
      if (sigma[x] > 0) dd += v[x];
    }
    const double analytic = df / d - f * dd / (d * d);
    std::vector<double> up(u), dn(u);
    for (std::size_t x = 0; x < u.size(); ++x) {
      up[x] += h * v[x];
      dn[x] -= h * v[x];
    }
    const double numeric = (objective(up) - objective(dn)) / (2 * h);
    worst = std::max(worst, std::abs(analytic - numeric));
  }
  return worst;
}

// ---------------------------------------------------------------------------

Method resolve_method(const ExponentialFamilyModel& model, Method requested) {
  if (requested != Method::automatic) return requested;
  return model.kernel_dimension() <= model.family_dimension() ? Method::orthant : Method::projection;
}

std::string method_name(Method m) {
  switch (m) {
    case Method::orthant: return "orthant";
    case Method::projection: return "projection";
    case Method::automatic: return "auto";
  }
  return "auto";
}

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

struct RootSeed {
  std::vector<double> u;
  std::vector<double> alpha;
  bool flat = false;
};

struct OrthantOutcome {
  bool solved = false;
  bool rejected = false;
  bool flat = false;
  std::size_t starts = 0, nonconverged = 0, boundary = 0;
  std::vector<RootSeed> roots;
  std::string error;
};

OrthantOutcome solve_one(const ExponentialFamilyModel& model, const KernelBasis& basis, const SignVector& sigma,
                         Method method, const SearchOptions& options) {
  OrthantOutcome out;
  const std::uint64_t seed = sigma_seed(sigma, options.seed);
  try {
    if (method == Method::orthant) {
      const OrthantProblem prob = build_orthant_problem(model, basis, sigma);
      OrthantSolveStats st;
      for (auto& q : solve_orthant(model, prob, options.starts, options.tol, seed, &st)) {
        out.roots.push_back({q.u.u, {}, st.flat});
      }
      out.flat = st.flat;
      out.starts = st.starts;
      out.nonconverged = st.failed;
      out.boundary = st.boundary;
    } else {
      ProjectionSolveStats st;
      for (auto& q : solve_projection_points(model, basis, sigma, options.starts, options.tol, seed, &st)) {
        out.roots.push_back({q.u.u, q.alpha, false});
      }
      out.starts = st.starts;
      out.nonconverged = st.failed;
    }
    out.solved = true;
  } catch (const NotRealizable& e) {
    out.rejected = true;
    out.error = e.what();
  } catch (const NotFacial& e) {
    out.rejected = true;
    out.error = e.what();
  } catch (const FlatOrthant& e) {
    out.rejected = true;
    out.error = e.what();
  }
  return out;
}

std::vector<double> negated(const std::vector<double>& v) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] == 0 ? 0.0 : -v[i];
  return out;
}

CandidateReport evaluate(const ExponentialFamilyModel& model, const KernelBasis& basis, const RootSeed& seed,
                         std::vector<double> u, Method method, SearchResult& res) {
  CandidateReport c;
  c.method = method_name(method);
  c.u = u;
  c.flat = seed.flat;
  c.alpha = seed.alpha;
  double scale = 0;
  for (double v : u) scale = std::max(scale, std::abs(v));
  c.sigma = SignVector::of(u, 1e-12 * scale).str();
  const KernelPoint kp = decompose(u, 1e-9);
  c.p_plus = kp.p_plus;
  c.p_minus = kp.p_minus;
  c.dbar = dbar(model, u);
  c.kernel_residual = kernel_residual(model, u);
  const MixtureResult mix = optimal_mixture(model, kp);
  c.mu = mix.mu;
  try {
    c.divergence_pair = divergence_via_pair(model, kp, 1e-8);
  } catch (const std::invalid_argument& e) {
    c.divergence_pair = std::numeric_limits<double>::quiet_NaN();
    res.errors.push_back(std::string("candidate ") + c.sigma + ": " + e.what());
  }
  try {
    const ProjectionResult proj = ri_project(model, kp.p_plus);
    c.p_e = proj.p_e;
    c.divergence_projected = proj.divergence;
    for (std::size_t x = 0; x < u.size(); ++x) {
      c.phat_residual = std::max(c.phat_residual, std::abs(mix.p_hat[x] - proj.p_e[x]));
    }
    c.phat_is_projection = c.phat_residual <= 1e-8;
  } catch (const ConvergenceError& e) {
    res.nonconvergence = true;
    res.errors.push_back(std::string("candidate ") + c.sigma + ": " + e.what());
    c.divergence_projected = std::numeric_limits<double>::quiet_NaN();
  }
  const QuasiCriticalReport qc = verify_quasi_critical(model, basis, u, 1e-8);
  c.var0 = qc.var0;
  c.var1_residual = qc.var1;
  c.var1 = qc.var1 <= 1e-8;
  return c;
}

}  // namespace

SearchResult global_search(const ExponentialFamilyModel& model, const SearchOptions& options) {
  SearchResult res;
  res.method = resolve_method(model, options.method);
  const KernelBasis basis = kernel_basis(model);
  if (basis.dimension() == 0) return res;

  std::vector<SignVector> sigmas;
  auto t0 = Clock::now();
  if (options.sigmas) {
    for (const auto& s : *options.sigmas) {
      if (s.size() != model.num_states()) {
        throw std::invalid_argument("sign vector " + s.str() + " has the wrong length");
      }
      sigmas.push_back(s);
    }
    res.stats.sign_vectors = sigmas.size();
  } else {
    const CircuitSet cs = circuits(model, basis);
    const SymmetryGroup group(model);
    std::set<SignVector> circuit_classes;
    for (const auto& c : cs.circuits) circuit_classes.insert(group.canonical(c.sign));
    res.stats.circuits = circuit_classes.size();
    res.times.circuits = ms_since(t0);
    t0 = Clock::now();
    EnumerationOptions eo;
    eo.mode = options.mode;
    eo.threads = options.threads;
    eo.max_classes = options.allow_long ? std::numeric_limits<std::size_t>::max() : options.max_signvectors;
    if (options.mode == EnumerationMode::scan && !options.allow_long && model.num_states() > 12) {
      res.capped = true;
      res.errors.push_back("scan over 3^" + std::to_string(model.num_states()) +
                           " sign patterns requires --allow-long");
      return res;
    }
    try {
      sigmas = enumerate_sign_vectors(model, cs, group, eo);
    } catch (const CapExceeded& e) {
      res.capped = true;
      res.stats.sign_vectors = e.partial().size();
      res.errors.push_back(e.what());
      res.times.enumeration = ms_since(t0);
      return res;
    }
    res.stats.sign_vectors = sigmas.size();
    res.times.enumeration = ms_since(t0);
  }

  t0 = Clock::now();
  std::vector<SignVector> kept;
  for (const auto& s : sigmas) {
    if (options.use_var0 && !filter_var0(basis, s)) continue;
    ++res.stats.post_var0;
    if (options.use_bound && !filter_support_bound(model, s)) continue;
    ++res.stats.post_bound;
    kept.push_back(s);
  }
  res.times.filters = ms_since(t0);

  t0 = Clock::now();
  std::vector<OrthantOutcome> outcomes(kept.size());
  const std::size_t threads = std::max<std::size_t>(1, std::min(options.threads, kept.size()));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < kept.size(); i = next++) {
      outcomes[i] = solve_one(model, basis, kept[i], res.method, options);
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  res.times.solve = ms_since(t0);

  t0 = Clock::now();
  for (std::size_t i = 0; i < kept.size(); ++i) {
    const auto& o = outcomes[i];
    if (o.rejected) {
      ++res.stats.rejected_orthants;
      res.errors.push_back(o.error);
      continue;
    }
    ++res.stats.orthants_solved;
    res.stats.flat_orthants += o.flat ? 1 : 0;
    res.stats.starts += o.starts;
    res.stats.nonconverged_starts += o.nonconverged;
    res.stats.boundary_rejects += o.boundary;
    res.stats.roots_found += o.roots.size();
    for (const auto& root : o.roots) {
      res.candidates.push_back(evaluate(model, basis, root, root.u, res.method, res));
      RootSeed flipped = root;
      flipped.alpha.clear();   // parameters describe the unflipped orientation
      res.candidates.push_back(evaluate(model, basis, flipped, negated(root.u), res.method, res));
    }
  }
  std::sort(res.candidates.begin(), res.candidates.end(), [](const CandidateReport& a, const CandidateReport& b) {
    const long long ka = std::llround(a.dbar * 1e12), kb = std::llround(b.dbar * 1e12);
    if (ka != kb) return ka > kb;
    if (a.sigma != b.sigma) return a.sigma < b.sigma;
    return a.u < b.u;
  });
  if (!res.candidates.empty()) {
    const double top = res.candidates.front().dbar;
    for (auto& c : res.candidates) c.global_maximizer = c.dbar >= top - 1e-9;
  }
  if (res.stats.orthants_solved > 0 && res.candidates.empty()) res.nonconvergence = true;
  res.times.ranking = ms_since(t0);
  return res;
}

}  // namespace divmax
