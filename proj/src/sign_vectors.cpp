#include "divmax/sign_vectors.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <set>
#include <thread>
#include <unordered_set>

#include "divmax/lp.hpp"

namespace divmax {

using exact::IntVector;
using exact::Rational;
using exact::RationalMatrix;
using exact::RationalVector;

SignVector::SignVector(std::vector<std::int8_t> entries) : entries_(std::move(entries)) {
  for (std::size_t x = 0; x < entries_.size(); ++x) {
    const int s = entries_[x];
    if (s < -1 || s > 1) throw std::invalid_argument("sign vector entries must lie in {-1, 0, +1}");
    if (s != 0) support_.push_back(x);
    if (s > 0) ++positive_;
  }
}

SignVector SignVector::from_string(std::string_view s) {
  std::vector<std::int8_t> e;
  e.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '+': e.push_back(1); break;
      case '-': e.push_back(-1); break;
      case '0': e.push_back(0); break;
      default: throw std::invalid_argument(std::string("invalid sign character '") + c + "'");
    }
  }
  return SignVector(std::move(e));
}

SignVector SignVector::of(std::span<const double> u, double zero_tolerance) {
  std::vector<std::int8_t> e(u.size(), 0);
  for (std::size_t x = 0; x < u.size(); ++x) {
    if (u[x] > zero_tolerance) e[x] = 1;
    if (u[x] < -zero_tolerance) e[x] = -1;
  }
  return SignVector(std::move(e));
}

SignVector SignVector::of(std::span<const std::int64_t> u) {
  std::vector<std::int8_t> e(u.size(), 0);
  for (std::size_t x = 0; x < u.size(); ++x) e[x] = static_cast<std::int8_t>((u[x] > 0) - (u[x] < 0));
  return SignVector(std::move(e));
}

std::string SignVector::str() const {
  std::string s;
  s.reserve(entries_.size());
  for (auto v : entries_) s.push_back(v > 0 ? '+' : (v < 0 ? '-' : '0'));
  return s;
}

SignVector SignVector::operator-() const {
  std::vector<std::int8_t> e(entries_);
  for (auto& v : e) v = static_cast<std::int8_t>(-v);
  return SignVector(std::move(e));
}

SignVector compose(const SignVector& s1, const SignVector& s2) {
  if (s1.size() != s2.size()) throw std::invalid_argument("compose: length mismatch");
  std::vector<std::int8_t> e(s1.entries());
  for (std::size_t x = 0; x < e.size(); ++x) {
    if (e[x] == 0) e[x] = static_cast<std::int8_t>(s2[x]);
  }
  return SignVector(std::move(e));
}

// ---------------------------------------------------------------------------

SymmetryGroup::SymmetryGroup(const ExponentialFamilyModel& model, std::size_t order_cap)
    : SymmetryGroup(model.num_states(), model.symmetry_generators(), order_cap) {}

SymmetryGroup::SymmetryGroup(std::size_t num_states, const std::vector<Permutation>& generators,
                             std::size_t order_cap)
    : n_(num_states) {
  Permutation id(n_);
  for (std::size_t x = 0; x < n_; ++x) id[x] = x;
  std::set<Permutation> seen{id};
  elements_.push_back(id);
  for (std::size_t head = 0; head < elements_.size(); ++head) {
    for (const auto& g : generators) {
      Permutation prod(n_);
      const Permutation& e = elements_[head];
      for (std::size_t x = 0; x < n_; ++x) prod[x] = g[e[x]];
      if (seen.insert(prod).second) {
        if (elements_.size() >= order_cap) {
          throw GroupOrderExceeded("symmetry group order exceeds cap of " + std::to_string(order_cap));
        }
        elements_.push_back(std::move(prod));
      }
    }
  }
  inverses_.reserve(elements_.size());
  for (const auto& g : elements_) {
    Permutation inv(n_);
    for (std::size_t x = 0; x < n_; ++x) inv[g[x]] = x;
    inverses_.push_back(std::move(inv));
  }
}

SignVector SymmetryGroup::canonical(const SignVector& sigma) const {
  const auto& s = sigma.entries();
  std::vector<std::int8_t> best(s);
  std::vector<std::int8_t> cand(n_);
  for (const auto& inv : inverses_) {
    for (int sign : {1, -1}) {
      // Lazy comparison: the image is materialized only when it beats `best`.
      int cmp = 0;
      std::size_t y = 0;
      for (; y < n_; ++y) {
        const int v = sign * s[inv[y]];
        if (v != best[y]) {
          cmp = v < best[y] ? -1 : 1;
          break;
        }
      }
      if (cmp < 0) {
        for (std::size_t z = 0; z < n_; ++z) best[z] = static_cast<std::int8_t>(sign * s[inv[z]]);
      }
    }
  }
  return SignVector(std::move(best));
}

bool SymmetryGroup::is_canonical(const SignVector& sigma) const {
  const auto& s = sigma.entries();
  for (const auto& inv : inverses_) {
    for (int sign : {1, -1}) {
      for (std::size_t y = 0; y < n_; ++y) {
        const int v = sign * s[inv[y]];
        if (v != s[y]) {
          if (v < s[y]) return false;
          break;
        }
      }
    }
  }
  return true;
}

SignVector canonicalize(const ExponentialFamilyModel& model, const SignVector& sigma) {
  return SymmetryGroup(model).canonical(sigma);
}

// ---------------------------------------------------------------------------

namespace {

constexpr __int128 kLimit = static_cast<__int128>(1) << 62;

// Fraction-free reduction of `row` against an echelon set; returns false if the
// row became zero. Throws std::overflow_error when entries leave 62 bits.
bool reduce_against(std::vector<__int128>& row, const std::vector<std::vector<__int128>>& rows,
                    const std::vector<std::size_t>& pivots) {
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::size_t p = pivots[i];
    if (row[p] == 0) continue;
    const __int128 a = rows[i][p];
    const __int128 b = row[p];
    __int128 g = 0;
    for (std::size_t j = 0; j < row.size(); ++j) {
      row[j] = a * row[j] - b * rows[i][j];
      if (row[j] > kLimit || row[j] < -kLimit) throw std::overflow_error("circuit elimination overflow");
      __int128 v = row[j] < 0 ? -row[j] : row[j];
      while (v != 0) {
        __int128 t = g % v;
        g = v;
        v = t;
      }
    }
    if (g > 1) {
      for (auto& e : row) e /= g;
    }
  }
  for (auto e : row) {
    if (e != 0) return true;
  }
  return false;
}

std::size_t first_nonzero(const std::vector<__int128>& row) {
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (row[j] != 0) return j;
  }
  return row.size();
}

struct CircuitSearch {
  const exact::IntMatrix& kmat;   // k x N kernel basis
  std::size_t k;
  std::size_t n;
  std::map<IntVector, Circuit> found;

  std::vector<std::vector<__int128>> rows;
  std::vector<std::size_t> pivots;

  std::vector<__int128> column(std::size_t x) const {
    std::vector<__int128> c(k);
    for (std::size_t i = 0; i < k; ++i) c[i] = kmat[i][x];
    return c;
  }

  void record_normal() {
    // Exactly one non-pivot coordinate remains; back-substitute in reverse
    // insertion order, where each row vanishes on all earlier pivots.
    std::vector<bool> is_pivot(k, false);
    for (auto p : pivots) is_pivot[p] = true;
    std::size_t free_col = 0;
    while (is_pivot[free_col]) ++free_col;
    RationalVector lambda(k, Rational(0));
    lambda[free_col] = 1;
    for (std::size_t r = rows.size(); r-- > 0;) {
      Rational s = 0;
      for (std::size_t j = 0; j < k; ++j) {
        if (j != pivots[r] && rows[r][j] != 0 && lambda[j] != 0) {
          s += Rational(static_cast<long long>(rows[r][j])) * lambda[j];
        }
      }
      lambda[pivots[r]] = -s / Rational(static_cast<long long>(rows[r][pivots[r]]));
    }
    IntVector l = exact::primitive(lambda);
    IntVector u(n, 0);
    for (std::size_t x = 0; x < n; ++x) {
      __int128 s = 0;
      for (std::size_t i = 0; i < k; ++i) s += static_cast<__int128>(l[i]) * kmat[i][x];
      if (s > kLimit || s < -kLimit) throw std::overflow_error("circuit vector overflow");
      u[x] = static_cast<std::int64_t>(s);
    }
    u = exact::remove_content(std::move(u));
    for (auto v : u) {
      if (v != 0) {
        if (v < 0) {
          for (auto& w : u) w = -w;
        }
        break;
      }
    }
    if (found.count(u)) return;
    Circuit c{SignVector::of(std::span<const std::int64_t>(u)), u};
    found.emplace(std::move(u), std::move(c));
  }

  void dfs(std::size_t start) {
    if (rows.size() + 1 == k) {
      record_normal();
      return;
    }
    const std::size_t need = k - 1 - rows.size();
    for (std::size_t x = start; x + need <= n; ++x) {
      std::vector<__int128> c = column(x);
      if (!reduce_against(c, rows, pivots)) continue;
      pivots.push_back(first_nonzero(c));
      rows.push_back(std::move(c));
      dfs(x + 1);
      rows.pop_back();
      pivots.pop_back();
    }
  }
};

}  // namespace

CircuitSet circuits(const ExponentialFamilyModel& model, const KernelBasis& basis) {
  CircuitSet out;
  const std::size_t k = basis.dimension();
  if (k == 0) return out;
  CircuitSearch search{basis.vectors, k, model.num_states(), {}, {}, {}};
  search.dfs(0);
  for (auto& [key, c] : search.found) out.circuits.push_back(std::move(c));
  std::sort(out.circuits.begin(), out.circuits.end(), [](const Circuit& a, const Circuit& b) {
    if (a.sign.support().size() != b.sign.support().size()) {
      return a.sign.support().size() < b.sign.support().size();
    }
    return a.sign < b.sign;
  });
  return out;
}

// ---------------------------------------------------------------------------

namespace {

std::string key_of(const SignVector& s) {
  std::string k(s.size(), '\0');
  for (std::size_t x = 0; x < s.size(); ++x) k[x] = static_cast<char>(s[x] + 1);
  return k;
}

void sort_classes(std::vector<SignVector>& v) {
  std::sort(v.begin(), v.end(), [](const SignVector& a, const SignVector& b) {
    if (a.support().size() != b.support().size()) return a.support().size() < b.support().size();
    return a < b;
  });
}

std::vector<SignVector> closure(const CircuitSet& cs, const SymmetryGroup& group,
                                const EnumerationOptions& options) {
  std::vector<SignVector> generators;
  for (const auto& c : cs.circuits) {
    generators.push_back(c.sign);
    generators.push_back(-c.sign);
  }
  std::unordered_set<std::string> seen;
  std::vector<SignVector> classes;
  std::vector<SignVector> frontier;
  auto admit = [&](SignVector s) {
    if (seen.insert(key_of(s)).second) {
      classes.push_back(s);
      frontier.push_back(std::move(s));
      if (classes.size() > options.max_classes) {
        sort_classes(classes);
        throw CapExceeded("sign-vector enumeration exceeded cap of " +
                              std::to_string(options.max_classes) + " classes",
                          classes);
      }
    }
  };
  for (const auto& c : cs.circuits) admit(group.canonical(c.sign));

  const std::size_t threads = std::max<std::size_t>(1, options.threads);
  while (!frontier.empty()) {
    std::vector<SignVector> level = std::move(frontier);
    frontier.clear();
    // Chunks bound the memory held by unmerged products; merging in chunk
    // order keeps the result independent of the thread count.
    constexpr std::size_t kChunk = 512;
    for (std::size_t begin = 0; begin < level.size(); begin += kChunk) {
      const std::size_t end = std::min(level.size(), begin + kChunk);
      std::vector<std::vector<SignVector>> produced(end - begin);
      auto expand = [&](std::size_t i) {
        const SignVector& s = level[i];
        // Only the circuit's restriction to the zero set of s matters.
        std::unordered_set<std::string> restrictions;
        std::unordered_set<std::string> local;
        for (const auto& g : generators) {
          std::string r;
          bool changes = false;
          for (std::size_t x = 0; x < s.size(); ++x) {
            if (s[x] == 0) {
              r.push_back(static_cast<char>(g[x] + 1));
              changes = changes || g[x] != 0;
            }
          }
          if (!changes || !restrictions.insert(r).second) continue;
          SignVector c = group.canonical(compose(s, g));
          if (local.insert(key_of(c)).second) produced[i - begin].push_back(std::move(c));
        }
      };
      if (threads == 1) {
        for (std::size_t i = begin; i < end; ++i) expand(i);
      } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < threads; ++t) {
          pool.emplace_back([&, t] {
            for (std::size_t i = begin + t; i < end; i += threads) expand(i);
          });
        }
        for (auto& th : pool) th.join();
      }
      for (auto& batch : produced) {
        for (auto& s : batch) admit(std::move(s));
      }
    }
  }
  sort_classes(classes);
  return classes;
}

std::vector<SignVector> scan(const ExponentialFamilyModel& model, const SymmetryGroup& group,
                             const EnumerationOptions& options) {
  const std::size_t n = model.num_states();
  std::vector<std::int8_t> digits(n, -1);
  std::vector<SignVector> classes;
  for (;;) {
    SignVector s(digits);
    if (!s.is_zero() && group.is_canonical(s) && is_sign_vector(model, s).realizable) {
      classes.push_back(std::move(s));
      if (classes.size() > options.max_classes) {
        sort_classes(classes);
        throw CapExceeded("sign-vector scan exceeded cap of " + std::to_string(options.max_classes) +
                              " classes",
                          classes);
      }
    }
    std::size_t pos = n;
    while (pos > 0) {
      --pos;
      if (digits[pos] < 1) {
        ++digits[pos];
        break;
      }
      digits[pos] = -1;
      if (pos == 0) {
        sort_classes(classes);
        return classes;
      }
    }
    if (n == 0) return classes;
  }
}

}  // namespace

std::vector<SignVector> enumerate_sign_vectors(const ExponentialFamilyModel& model,
                                               const CircuitSet& cs, const SymmetryGroup& group,
                                               const EnumerationOptions& options) {
  if (options.mode == EnumerationMode::scan) return scan(model, group, options);
  if (cs.circuits.empty()) return {};
  return closure(cs, group, options);
}

// ---------------------------------------------------------------------------

Realization is_sign_vector(const ExponentialFamilyModel& model, const SignVector& sigma) {
  if (sigma.size() != model.num_states()) throw std::invalid_argument("is_sign_vector: length mismatch");
  Realization res;
  const auto& y = sigma.support();
  if (y.empty()) {
    res.realizable = true;
    res.witness.assign(sigma.size(), Rational(0));
    return res;
  }
  // u(x) = sigma_x (1 + s_x), s >= 0:  sum_x A_ix sigma_x s_x = -sum_x A_ix sigma_x.
  RationalMatrix m(model.num_rows(), RationalVector(y.size()));
  RationalVector b(model.num_rows(), Rational(0));
  for (std::size_t i = 0; i < model.num_rows(); ++i) {
    for (std::size_t j = 0; j < y.size(); ++j) {
      const auto v = model.a(i, y[j]) * sigma[y[j]];
      m[i][j] = v;
      b[i] -= v;
    }
  }
  lp::Result lpres = lp::feasible_point(m, b);
  if (lpres.status != lp::Status::optimal) return res;
  res.realizable = true;
  res.witness.assign(sigma.size(), Rational(0));
  for (std::size_t j = 0; j < y.size(); ++j) res.witness[y[j]] = sigma[y[j]] * (1 + lpres.x[j]);
  return res;
}

bool filter_var0(const KernelBasis& basis, const SignVector& sigma) {
  for (const auto& v : basis.vectors) {
    __int128 s = 0;
    for (std::size_t x = 0; x < sigma.size(); ++x) {
      if (sigma[x] == 0) s += v[x];
    }
    if (s != 0) return false;
  }
  return true;
}

bool filter_support_bound(const ExponentialFamilyModel& model, const SignVector& sigma) {
  return std::min(sigma.positive_count(), sigma.negative_count()) <= model.family_dimension() + 1;
}

}  // namespace divmax
