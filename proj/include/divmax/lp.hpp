#pragma once

// Dense two-phase simplex over the rationals with Bland's rule. Problems here
// are at most a few dozen rows and columns, so a tableau is adequate and every
// answer is exact.

#include "divmax/exact.hpp"

namespace divmax::lp {

enum class Status { optimal, infeasible, unbounded };

struct Result {
  Status status = Status::infeasible;
  exact::RationalVector x;   // primal solution when status == optimal
  exact::Rational objective = 0;
};

/// maximize c.x subject to m x = b, x >= 0.
Result maximize(const exact::RationalMatrix& m, const exact::RationalVector& b,
                const exact::RationalVector& c);

/// Any x >= 0 with m x = b.
Result feasible_point(const exact::RationalMatrix& m, const exact::RationalVector& b);

}  // namespace divmax::lp
