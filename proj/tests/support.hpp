#pragma once

#include <random>
#include <string>
#include <vector>

#include "divmax/model.hpp"
#include "divmax/oracles.hpp"

namespace divmax::test_support {

inline ExponentialFamilyModel bundled(const std::string& file) {
  return load_model(oracles::data_dir() / file);
}

/// Random probability vector; each state is dropped with probability `zero_rate`
/// (at least one state is kept).
inline std::vector<double> random_distribution(std::mt19937_64& rng, std::size_t n, double zero_rate = 0.0) {
  std::exponential_distribution<double> expo(1.0);
  std::bernoulli_distribution drop(zero_rate);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::vector<double> p(n, 0.0);
  double total = 0;
  for (auto& v : p) {
    if (!drop(rng)) v = expo(rng);
    total += v;
  }
  if (total == 0) {
    p[pick(rng)] = 1.0;
    return p;
  }
  for (auto& v : p) v /= total;
  return p;
}

inline std::vector<double> as_double(const exact::IntVector& v) { return {v.begin(), v.end()}; }

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace divmax::test_support
