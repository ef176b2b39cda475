#include "divmax/exact.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace divmax::exact {

RationalMatrix to_rational(const IntMatrix& m) {
  RationalMatrix out;
  out.reserve(m.size());
  for (const auto& row : m) {
    RationalVector r;
    r.reserve(row.size());
    for (auto v : row) r.emplace_back(v);
    out.push_back(std::move(r));
  }
  return out;
}

Rational to_rational(double x) {
  if (!std::isfinite(x)) throw std::domain_error("cannot convert non-finite value to a rational");
  if (x == 0.0) return Rational(0);
  int exponent = 0;
  double mantissa = std::frexp(x, &exponent);
  // mantissa * 2^53 is an exact integer
  auto scaled = static_cast<std::int64_t>(std::ldexp(mantissa, 53));
  Rational r(scaled);
  int shift = exponent - 53;
  Integer pow2 = 1;
  pow2 <<= static_cast<unsigned>(std::abs(shift));
  if (shift >= 0) {
    r *= Rational(pow2);
  } else {
    r /= Rational(pow2);
  }
  return r;
}

RationalVector to_rational(std::span<const double> v) {
  RationalVector out;
  out.reserve(v.size());
  for (double x : v) out.push_back(to_rational(x));
  return out;
}

EchelonForm reduced_row_echelon(RationalMatrix m, std::size_t cols) {
  EchelonForm form;
  form.cols = cols;
  std::size_t row = 0;
  const std::size_t rows = m.size();
  for (std::size_t col = 0; col < cols && row < rows; ++col) {
    std::size_t sel = row;
    while (sel < rows && m[sel][col] == 0) ++sel;
    if (sel == rows) continue;
    std::swap(m[sel], m[row]);
    Rational inv = 1 / m[row][col];
    for (std::size_t j = col; j < cols; ++j) m[row][j] *= inv;
    for (std::size_t i = 0; i < rows; ++i) {
      if (i == row || m[i][col] == 0) continue;
      Rational f = m[i][col];
      for (std::size_t j = col; j < cols; ++j) {
        if (m[row][j] != 0) m[i][j] -= f * m[row][j];
      }
    }
    form.pivots.push_back(col);
    ++row;
  }
  m.resize(row);
  form.rows = std::move(m);
  return form;
}

std::size_t rank(const RationalMatrix& m, std::size_t cols) {
  return reduced_row_echelon(m, cols).pivots.size();
}

std::size_t rank(const IntMatrix& m, std::size_t cols) { return rank(to_rational(m), cols); }

std::int64_t gcd(std::int64_t a, std::int64_t b) { return std::gcd(a, b); }

IntVector remove_content(IntVector v) {
  std::int64_t g = 0;
  for (auto x : v) g = std::gcd(g, x);
  if (g > 1) {
    for (auto& x : v) x /= g;
  }
  return v;
}

IntVector primitive(const RationalVector& v) {
  Integer lcm_den = 1;
  for (const auto& q : v) {
    if (q != 0) lcm_den = boost::multiprecision::lcm(lcm_den, Integer(denominator(q)));
  }
  std::vector<Integer> scaled;
  scaled.reserve(v.size());
  Integer g = 0;
  for (const auto& q : v) {
    Integer s = numerator(q) * (lcm_den / denominator(q));
    g = boost::multiprecision::gcd(g, s);
    scaled.push_back(std::move(s));
  }
  IntVector out(v.size(), 0);
  if (g == 0) return out;
  int sign = 0;
  for (const auto& s : scaled) {
    if (s != 0) {
      sign = s > 0 ? 1 : -1;
      break;
    }
  }
  const Integer lo = std::numeric_limits<std::int64_t>::min();
  const Integer hi = std::numeric_limits<std::int64_t>::max();
  for (std::size_t i = 0; i < scaled.size(); ++i) {
    Integer e = scaled[i] / g * sign;
    if (e < lo || e > hi) throw std::overflow_error("kernel vector entry exceeds 64-bit range");
    out[i] = static_cast<std::int64_t>(e);
  }
  return out;
}

std::vector<IntVector> integer_nullspace(const RationalMatrix& m, std::size_t cols) {
  EchelonForm form = reduced_row_echelon(m, cols);
  std::vector<bool> is_pivot(cols, false);
  for (auto p : form.pivots) is_pivot[p] = true;
  std::vector<IntVector> basis;
  for (std::size_t f = 0; f < cols; ++f) {
    if (is_pivot[f]) continue;
    RationalVector x(cols, Rational(0));
    x[f] = 1;
    for (std::size_t i = 0; i < form.rows.size(); ++i) x[form.pivots[i]] = -form.rows[i][f];
    basis.push_back(primitive(x));
  }
  return basis;
}

std::vector<IntVector> integer_nullspace(const IntMatrix& m, std::size_t cols) {
  return integer_nullspace(to_rational(m), cols);
}

std::optional<RationalVector> solve(const RationalMatrix& m, const RationalVector& b,
                                    std::size_t cols) {
  RationalMatrix aug = m;
  for (std::size_t i = 0; i < aug.size(); ++i) aug[i].push_back(b[i]);
  EchelonForm form = reduced_row_echelon(std::move(aug), cols + 1);
  if (!form.pivots.empty() && form.pivots.back() == cols) return std::nullopt;
  RationalVector x(cols, Rational(0));
  for (std::size_t i = 0; i < form.rows.size(); ++i) x[form.pivots[i]] = form.rows[i][cols];
  return x;
}

}  // namespace divmax::exact
