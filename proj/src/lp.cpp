#include "divmax/lp.hpp"

#include <stdexcept>

namespace divmax::lp {

using exact::Rational;
using exact::RationalMatrix;
using exact::RationalVector;

namespace {

struct Tableau {
  RationalMatrix t;                 // m rows, (cols + 1) entries, last is rhs
  std::vector<std::size_t> basis;   // basic column of each row
  std::size_t cols = 0;             // structural + artificial columns

  void pivot(std::size_t row, std::size_t col) {
    Rational inv = 1 / t[row][col];
    for (auto& e : t[row]) e *= inv;
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (i == row || t[i][col] == 0) continue;
      Rational f = t[i][col];
      for (std::size_t j = 0; j <= cols; ++j) {
        if (t[row][j] != 0) t[i][j] -= f * t[row][j];
      }
    }
    basis[row] = col;
  }

  // Bland's rule keeps this finite on degenerate problems.
  // Returns false when the objective is unbounded.
  bool run(const RationalVector& cost, std::size_t enterable) {
    const std::size_t m = t.size();
    std::vector<bool> basic(cols, false);
    for (;;) {
      std::fill(basic.begin(), basic.end(), false);
      for (auto b : basis) basic[b] = true;
      std::size_t entering = cols;
      for (std::size_t j = 0; j < enterable; ++j) {
        if (basic[j]) continue;
        Rational d = cost[j];
        for (std::size_t i = 0; i < m; ++i) {
          if (t[i][j] != 0 && cost[basis[i]] != 0) d -= cost[basis[i]] * t[i][j];
        }
        if (d > 0) {
          entering = j;
          break;
        }
      }
      if (entering == cols) return true;
      std::size_t leaving = m;
      Rational best_ratio;
      for (std::size_t i = 0; i < m; ++i) {
        if (t[i][entering] <= 0) continue;
        Rational ratio = t[i][cols] / t[i][entering];
        if (leaving == m || ratio < best_ratio ||
            (ratio == best_ratio && basis[i] < basis[leaving])) {
          leaving = i;
          best_ratio = ratio;
        }
      }
      if (leaving == m) return false;
      pivot(leaving, entering);
    }
  }
};

}  // namespace

Result maximize(const RationalMatrix& m, const RationalVector& b, const RationalVector& c) {
  const std::size_t rows = m.size();
  const std::size_t n = c.size();
  if (b.size() != rows) throw std::invalid_argument("lp: rhs length mismatch");
  for (const auto& row : m) {
    if (row.size() != n) throw std::invalid_argument("lp: row length mismatch");
  }

  Tableau tab;
  tab.cols = n + rows;
  tab.t.assign(rows, RationalVector(tab.cols + 1, Rational(0)));
  tab.basis.resize(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    const bool flip = b[i] < 0;
    for (std::size_t j = 0; j < n; ++j) tab.t[i][j] = flip ? Rational(-m[i][j]) : m[i][j];
    tab.t[i][n + i] = 1;
    tab.t[i][tab.cols] = flip ? Rational(-b[i]) : b[i];
    tab.basis[i] = n + i;
  }

  RationalVector phase1(tab.cols, Rational(0));
  for (std::size_t i = 0; i < rows; ++i) phase1[n + i] = -1;
  tab.run(phase1, tab.cols);
  Rational infeas = 0;
  for (std::size_t i = 0; i < rows; ++i) {
    if (tab.basis[i] >= n) infeas += tab.t[i][tab.cols];
  }
  Result res;
  if (infeas != 0) {
    res.status = Status::infeasible;
    return res;
  }
  // Drive zero-valued artificials out of the basis where possible; rows where
  // that fails are redundant and keep their artificial at zero.
  for (std::size_t i = 0; i < rows; ++i) {
    if (tab.basis[i] < n) continue;
    for (std::size_t j = 0; j < n; ++j) {
      bool basic = false;
      for (auto bj : tab.basis) basic = basic || bj == j;
      if (!basic && tab.t[i][j] != 0) {
        tab.pivot(i, j);
        break;
      }
    }
  }

  RationalVector phase2(tab.cols, Rational(0));
  for (std::size_t j = 0; j < n; ++j) phase2[j] = c[j];
  if (!tab.run(phase2, n)) {
    res.status = Status::unbounded;
    return res;
  }
  res.status = Status::optimal;
  res.x.assign(n, Rational(0));
  for (std::size_t i = 0; i < rows; ++i) {
    if (tab.basis[i] < n) res.x[tab.basis[i]] = tab.t[i][tab.cols];
  }
  for (std::size_t j = 0; j < n; ++j) res.objective += c[j] * res.x[j];
  return res;
}

Result feasible_point(const RationalMatrix& m, const RationalVector& b) {
  const std::size_t n = m.empty() ? 0 : m.front().size();
  return maximize(m, b, RationalVector(n, Rational(0)));
}

}  // namespace divmax::lp
