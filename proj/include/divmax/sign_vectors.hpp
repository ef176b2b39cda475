#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "divmax/model.hpp"

namespace divmax {

/// Ternary vector over {-1, 0, +1}, one entry per state. Serialized as a
/// string over {+,-,0} in state order.
class SignVector {
 public:
  SignVector() = default;
  explicit SignVector(std::vector<std::int8_t> entries);
  static SignVector from_string(std::string_view s);
  /// Signs of u; entries with |u(x)| <= zero_tolerance map to 0.
  static SignVector of(std::span<const double> u, double zero_tolerance = 0.0);
  static SignVector of(std::span<const std::int64_t> u);

  int operator[](std::size_t x) const { return entries_[x]; }
  std::size_t size() const noexcept { return entries_.size(); }
  const std::vector<std::int8_t>& entries() const noexcept { return entries_; }
  const std::vector<std::size_t>& support() const noexcept { return support_; }
  std::size_t positive_count() const noexcept { return positive_; }
  std::size_t negative_count() const noexcept { return support_.size() - positive_; }
  bool is_zero() const noexcept { return support_.empty(); }
  bool full_support() const noexcept { return support_.size() == entries_.size(); }
  std::string str() const;

  SignVector operator-() const;
  bool operator==(const SignVector& o) const { return entries_ == o.entries_; }
  std::strong_ordering operator<=>(const SignVector& o) const { return entries_ <=> o.entries_; }

 private:
  std::vector<std::int8_t> entries_;
  std::vector<std::size_t> support_;
  std::size_t positive_ = 0;
};

/// (s1 o s2)_x = s1_x if nonzero, else s2_x.
SignVector compose(const SignVector& s1, const SignVector& s2);

class GroupOrderExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Finite permutation group generated by the model's symmetry generators,
/// acting on states by x -> g[x]. Canonical forms are lexicographic minima
/// over the group orbit times {+1, -1}.
class SymmetryGroup {
 public:
  explicit SymmetryGroup(const ExponentialFamilyModel& model, std::size_t order_cap = 200000);
  SymmetryGroup(std::size_t num_states, const std::vector<Permutation>& generators,
                std::size_t order_cap = 200000);

  std::size_t order() const noexcept { return elements_.size(); }
  const std::vector<Permutation>& elements() const noexcept { return elements_; }

  SignVector canonical(const SignVector& sigma) const;
  bool is_canonical(const SignVector& sigma) const;

  /// (g u)(g[x]) = u(x)
  template <class T>
  std::vector<T> apply(const Permutation& g, std::span<const T> u) const {
    std::vector<T> out(u.size());
    for (std::size_t x = 0; x < u.size(); ++x) out[g[x]] = u[x];
    return out;
  }

 private:
  std::size_t n_ = 0;
  std::vector<Permutation> elements_;
  std::vector<Permutation> inverses_;
};

struct Circuit {
  SignVector sign;
  exact::IntVector vector;   // content 1, first nonzero entry positive
};

struct CircuitSet {
  std::vector<Circuit> circuits;   // one representative per +- pair
};

/// All circuits of ker A. Each circuit is the kernel vector vanishing on a
/// hyperplane spanned by columns of the kernel basis matrix.
CircuitSet circuits(const ExponentialFamilyModel& model, const KernelBasis& basis);

enum class EnumerationMode { closure, scan };

struct EnumerationOptions {
  EnumerationMode mode = EnumerationMode::closure;
  std::size_t max_classes = 50000;
  std::size_t threads = 1;
};

class CapExceeded : public std::runtime_error {
 public:
  CapExceeded(const std::string& what, std::vector<SignVector> partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const std::vector<SignVector>& partial() const noexcept { return partial_; }

 private:
  std::vector<SignVector> partial_;
};

/// One canonical representative per (symmetry x +-) orbit of nonzero sign
/// vectors of ker A, sorted by support size then lexicographically. Throws
/// CapExceeded carrying the classes found so far.
std::vector<SignVector> enumerate_sign_vectors(const ExponentialFamilyModel& model,
                                               const CircuitSet& circuits,
                                               const SymmetryGroup& group,
                                               const EnumerationOptions& options = {});

struct Realization {
  bool realizable = false;
  std::vector<exact::Rational> witness;   // u in ker A with sgn(u) = sigma
};

/// Exact LP feasibility of {u in ker A : u >= 1 on sigma+, u <= -1 on sigma-,
/// u = 0 elsewhere}. The zero vector is realizable by convention (witness 0).
Realization is_sign_vector(const ExponentialFamilyModel& model, const SignVector& sigma);

/// sum_{x : sigma_x = 0} v(x) = 0 for every basis vector v.
bool filter_var0(const KernelBasis& basis, const SignVector& sigma);

/// min(|sigma+|, |sigma-|) <= dim E + 1.
bool filter_support_bound(const ExponentialFamilyModel& model, const SignVector& sigma);

SignVector canonicalize(const ExponentialFamilyModel& model, const SignVector& sigma);

}  // namespace divmax
