#pragma once

// Exact rational and integer linear algebra used for every rank, kernel and
// feasibility decision. Floating point only enters downstream.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <boost/multiprecision/gmp.hpp>

namespace divmax::exact {

using Integer = boost::multiprecision::mpz_int;
using Rational = boost::multiprecision::mpq_rational;

using RationalVector = std::vector<Rational>;
using RationalMatrix = std::vector<RationalVector>;
using IntVector = std::vector<std::int64_t>;
using IntMatrix = std::vector<IntVector>;

struct EchelonForm {
  RationalMatrix rows;               // nonzero rows of the reduced row echelon form
  std::vector<std::size_t> pivots;   // pivot column of each row
  std::size_t cols = 0;
};

RationalMatrix to_rational(const IntMatrix& m);
RationalVector to_rational(std::span<const double> v);

/// Exact conversion; every finite double is a dyadic rational.
Rational to_rational(double x);

EchelonForm reduced_row_echelon(RationalMatrix m, std::size_t cols);
std::size_t rank(const RationalMatrix& m, std::size_t cols);
std::size_t rank(const IntMatrix& m, std::size_t cols);

/// Scales a rational vector to coprime integers, first nonzero entry positive.
/// Throws std::overflow_error if an entry does not fit in 64 bits.
IntVector primitive(const RationalVector& v);

/// Content-1 integer basis of {x : m x = 0}, one vector per free column of the
/// reduced row echelon form, free columns taken in increasing order.
std::vector<IntVector> integer_nullspace(const IntMatrix& m, std::size_t cols);
std::vector<IntVector> integer_nullspace(const RationalMatrix& m, std::size_t cols);

/// Any solution of m x = b, or nullopt when the system is inconsistent.
std::optional<RationalVector> solve(const RationalMatrix& m, const RationalVector& b,
                                    std::size_t cols);

std::int64_t gcd(std::int64_t a, std::int64_t b);

/// Divides by the gcd of the entries (sign unchanged). Zero vector is returned as is.
IntVector remove_content(IntVector v);

}  // namespace divmax::exact
