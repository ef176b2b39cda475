#pragma once

// Closed-form and brute-force reference values for tests, plus the bundled
// models with their known answers.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "divmax/model.hpp"

namespace divmax::oracles {

struct Codim1Result {
  double dbar_max = 0.0;
  double div_max = 0.0;
  std::vector<std::vector<double>> maximizers;   // positive parts; two on a tie
};

/// Requires dim ker A = 1.
Codim1Result codim1_oracle(const ExponentialFamilyModel& model);

/// Max of Dbar(u) / d_u over kernel coefficient vectors on the boundary of
/// [-1, 1]^k, sampled with spacing 2 / resolution. Requires 1 <= k <= 3.
/// Doubling the resolution refines the grid, so the estimate never drops.
double grid_oracle(const ExponentialFamilyModel& model, std::size_t resolution,
                   std::size_t threads = 1);

struct SignVectorCounts {
  std::size_t classes = 0;
  std::size_t post_var0 = 0;
  std::size_t post_bound = 0;
  std::vector<std::pair<std::size_t, std::size_t>> post_var0_by_support;   // (support size, count)
};

struct Expected {
  double dbar_max = 0.0;
  double div_max = 0.0;
  std::vector<std::vector<double>> maximizers;   // distributions, one per class
  std::optional<std::vector<double>> maximizer_u;
  std::optional<SignVectorCounts> counts;
};

struct GoldenModel {
  std::string file;
  ExponentialFamilyModel model;
  Expected expected;
};

std::filesystem::path data_dir();
std::vector<GoldenModel> bundled_models();
GoldenModel bundled_model(const std::string& name);

/// Random integer model with `states` states and kernel dimension
/// `kernel_dim`; reference measure drawn from {1/4, ..., 3}.
ExponentialFamilyModel random_model(std::mt19937_64& rng, std::size_t states, std::size_t kernel_dim,
                                    int max_entry = 2, bool uniform_r = false);

}  // namespace divmax::oracles
