#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "divmax/kernel_objective.hpp"
#include "divmax/model.hpp"
#include "divmax/sign_vectors.hpp"

namespace divmax {

/// Degree-1 slice of the open orthant of sigma inside ker A:
///   u = u0 + sum_j lambda_j k_basis[j].
/// k_basis spans K^sigma = {v in ker A : supp v in supp sigma, sum_{sigma>0} v = 0}.
struct OrthantProblem {
  SignVector sigma;
  std::vector<double> u0;
  std::vector<exact::IntVector> k_basis;
  std::vector<exact::IntVector> restricted_kernel;   // ker A restricted to supp sigma
};

class FlatOrthant : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotRealizable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct QuasiCriticalPoint {
  KernelPoint u;
  double residual = 0.0;
  double dbar_value = 0.0;
};

/// Integer basis of K^sigma. Throws FlatOrthant when sum_{sigma>0} v vanishes
/// on the whole restricted kernel.
std::vector<exact::IntVector> orthant_directions(const ExponentialFamilyModel& model,
                                                 const SignVector& sigma,
                                                 std::vector<exact::IntVector>* restricted = nullptr);

OrthantProblem build_orthant_problem(const ExponentialFamilyModel& model, const KernelBasis& basis,
                                     const SignVector& sigma);

/// u0 + V lambda.
std::vector<double> orthant_point(const OrthantProblem& prob, std::span<const double> lambda);

/// max_i |sum_x v_i(x) log(|u(x)| / r(x))| over the rows v_i.
double var1_residual(const ExponentialFamilyModel& model, const std::vector<exact::IntVector>& directions,
                     std::span<const double> u);

/// Hit-and-run samples from the interior of the orthant slice, as lambda vectors.
std::vector<std::vector<double>> sample_orthant(const OrthantProblem& prob, std::size_t count,
                                                std::mt19937_64& rng);

std::uint64_t sigma_seed(const SignVector& sigma, std::uint64_t global_seed);

struct OrthantSolveStats {
  std::size_t starts = 0;
  std::size_t converged = 0;
  std::size_t boundary = 0;
  std::size_t failed = 0;
  bool flat = false;
};

/// Multi-start damped Newton on the Var1 equations inside the open orthant.
/// A flat orthant (Var1 residual identically zero) yields one representative.
std::vector<QuasiCriticalPoint> solve_orthant(const ExponentialFamilyModel& model,
                                              const OrthantProblem& prob, int starts = 32,
                                              double tol = 1e-10, std::uint64_t seed = 0,
                                              OrthantSolveStats* stats = nullptr);

struct QuasiCriticalReport {
  bool var0 = false;
  double var1 = 0.0;
  bool pass = false;
};

QuasiCriticalReport verify_quasi_critical(const ExponentialFamilyModel& model, const KernelBasis& basis,
                                          std::span<const double> u, double tol = 1e-8);

/// Largest gap between the analytic directional derivative of Dbar / d_u and a
/// central difference with step h, over K^sigma and the restricted kernel.
/// Throws std::domain_error when u +- h v leaves the orthant.
double gradient_check(const ExponentialFamilyModel& model, const OrthantProblem& prob,
                      std::span<const double> lambda, double h = 1e-5);

enum class Method { orthant, projection, automatic };

struct SearchOptions {
  Method method = Method::automatic;
  int starts = 32;
  double tol = 1e-10;
  std::size_t threads = 1;
  std::uint64_t seed = 0;
  std::size_t max_signvectors = 50000;
  bool use_var0 = true;
  bool use_bound = true;
  EnumerationMode mode = EnumerationMode::closure;
  bool allow_long = false;
  std::optional<std::vector<SignVector>> sigmas;   // replaces enumeration when set
};

struct CandidateReport {
  std::string sigma;
  std::string method;
  std::vector<double> u;
  double dbar = 0.0;
  double divergence_pair = 0.0;
  double divergence_projected = 0.0;
  double mu = 0.0;
  std::vector<double> p_plus;
  std::vector<double> p_minus;
  std::vector<double> p_e;
  std::vector<double> alpha;   // projection method only
  bool var0 = false;
  bool var1 = false;
  bool phat_is_projection = false;
  bool flat = false;
  bool global_maximizer = false;
  double var1_residual = 0.0;
  double kernel_residual = 0.0;
  double phat_residual = 0.0;
};

struct StageStats {
  std::size_t circuits = 0;
  std::size_t sign_vectors = 0;
  std::size_t post_var0 = 0;
  std::size_t post_bound = 0;
  std::size_t orthants_solved = 0;
  std::size_t roots_found = 0;
  std::size_t flat_orthants = 0;
  std::size_t starts = 0;
  std::size_t nonconverged_starts = 0;
  std::size_t boundary_rejects = 0;
  std::size_t rejected_orthants = 0;
};

struct StageTimes {
  double circuits = 0, enumeration = 0, filters = 0, solve = 0, ranking = 0;
};

struct SearchResult {
  Method method = Method::orthant;
  StageStats stats;
  StageTimes times;
  std::vector<CandidateReport> candidates;   // dbar descending
  bool capped = false;
  bool nonconvergence = false;
  std::vector<std::string> errors;
};

Method resolve_method(const ExponentialFamilyModel& model, Method requested);
std::string method_name(Method m);

/// circuits -> sign vectors -> filters -> per-orthant roots -> ranked candidates.
SearchResult global_search(const ExponentialFamilyModel& model, const SearchOptions& options = {});

}  // namespace divmax
