#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "divmax/exact.hpp"

namespace divmax {

using Permutation = std::vector<std::size_t>;

/// Raised for every rejected model file. `structural()` separates violations
/// of the family's structure (constant row outside the row span, symmetries
/// that do not preserve the kernel) from plain malformed input.
class ModelError : public std::runtime_error {
 public:
  enum class Kind { parse, invalid, structural };
  ModelError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }
  bool structural() const noexcept { return kind_ == Kind::structural; }

 private:
  Kind kind_;
};

/// Discrete exponential family given by integer sufficient statistics A
/// (h rows, one column per state) and a strictly positive reference measure r.
/// Immutable once constructed.
class ExponentialFamilyModel {
 public:
  ExponentialFamilyModel(std::string name, std::vector<std::string> states, exact::IntMatrix a,
                         std::vector<exact::Rational> r, std::vector<Permutation> generators);

  const std::string& name() const noexcept { return name_; }
  const std::vector<std::string>& states() const noexcept { return states_; }
  const exact::IntMatrix& a() const noexcept { return a_; }
  std::int64_t a(std::size_t row, std::size_t state) const { return a_[row][state]; }
  const std::vector<exact::Rational>& r_exact() const noexcept { return r_exact_; }
  const std::vector<double>& r() const noexcept { return r_; }
  const std::vector<Permutation>& symmetry_generators() const noexcept { return generators_; }

  std::size_t num_states() const noexcept { return states_.size(); }
  std::size_t num_rows() const noexcept { return a_.size(); }
  std::size_t rank() const noexcept { return rank_; }
  std::size_t kernel_dimension() const noexcept { return num_states() - rank_; }
  /// dim E = rank(A) - 1 (the constant row only fixes normalization).
  std::size_t family_dimension() const noexcept { return rank_ - 1; }

  /// Rows of A restricted to `states`, as rationals.
  exact::RationalMatrix restricted_rational(std::span<const std::size_t> states) const;

 private:
  std::string name_;
  std::vector<std::string> states_;
  exact::IntMatrix a_;
  std::vector<exact::Rational> r_exact_;
  std::vector<double> r_;
  std::vector<Permutation> generators_;
  std::size_t rank_ = 0;
};

struct KernelBasis {
  std::vector<exact::IntVector> vectors;
  std::size_t rank_a = 0;
  std::size_t dimension() const noexcept { return vectors.size(); }
};

ExponentialFamilyModel load_model(const std::filesystem::path& path);
ExponentialFamilyModel parse_model(const nlohmann::json& doc);
nlohmann::json model_to_json(const ExponentialFamilyModel& model);

std::vector<double> moment_map(const ExponentialFamilyModel& model, std::span<const double> p);
exact::RationalVector moment_map(const ExponentialFamilyModel& model,
                                 const exact::RationalVector& p);

/// Content-1 integer basis of ker A; reduced in state order, first nonzero
/// entry of each vector positive.
KernelBasis kernel_basis(const ExponentialFamilyModel& model);

/// States x with max{Q(x) : AQ = b, Q >= 0, sum Q = 1} > 0, decided by exact LPs.
/// Throws std::domain_error when the fiber is empty.
std::vector<std::size_t> facial_support(const ExponentialFamilyModel& model,
                                        const exact::RationalVector& b);
std::vector<std::size_t> facial_support(const ExponentialFamilyModel& model,
                                        std::span<const double> b);

/// Facial support of the moments of p, computed from p itself so that the
/// fiber is known to contain p exactly.
std::vector<std::size_t> facial_support_of(const ExponentialFamilyModel& model,
                                           std::span<const double> p);

bool preserves_kernel(const ExponentialFamilyModel& model, const KernelBasis& basis,
                      const Permutation& g);

}  // namespace divmax
