#include "divmax/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

#include "divmax/divergence.hpp"
#include "divmax/kernel_objective.hpp"

namespace divmax::oracles {

Codim1Result codim1_oracle(const ExponentialFamilyModel& model) {
  const KernelBasis basis = kernel_basis(model);
  if (basis.dimension() != 1) throw std::invalid_argument("codim1_oracle: kernel dimension must be 1");
  std::vector<double> u(basis.vectors[0].begin(), basis.vectors[0].end());
  const KernelPoint kp = decompose(u);
  const double hp = h_r(model, kp.p_plus);
  const double hm = h_r(model, kp.p_minus);
  Codim1Result res;
  res.dbar_max = std::abs(hm - hp);
  res.div_max = std::log1p(std::exp(res.dbar_max));
  if (std::abs(hm - hp) <= 1e-12 * std::max(1.0, std::abs(hp))) {
    res.maximizers = {kp.p_plus, kp.p_minus};
  } else {
    res.maximizers = {hp < hm ? kp.p_plus : kp.p_minus};
  }
  return res;
}

double grid_oracle(const ExponentialFamilyModel& model, std::size_t resolution, std::size_t threads) {
  const KernelBasis basis = kernel_basis(model);
  const std::size_t k = basis.dimension();
  if (k == 0 || k > 3) throw std::invalid_argument("grid_oracle: kernel dimension must lie in 1..3");
  if (resolution == 0) throw std::invalid_argument("grid_oracle: resolution must be positive");
  const std::size_t n = model.num_states();
  std::vector<std::vector<double>> b(k, std::vector<double>(n));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t x = 0; x < n; ++x) b[i][x] = static_cast<double>(basis.vectors[i][x]);
  }
  const std::size_t side = k == 1 ? 1 : resolution + 1;
  std::size_t cells = 1;
  for (std::size_t i = 1; i < k; ++i) cells *= side;
  const double step = 2.0 / static_cast<double>(resolution);

  // Face f = 2 * axis + (sign < 0); the free coordinates walk the grid.
  auto eval_face = [&](std::size_t f) {
    const std::size_t axis = f / 2;
    const double fixed = f % 2 ? -1.0 : 1.0;
    std::vector<double> lambda(k), u(n);
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < cells; ++c) {
      std::size_t rest = c;
      for (std::size_t i = 0; i < k; ++i) {
        if (i == axis) {
          lambda[i] = fixed;
        } else {
          lambda[i] = -1.0 + step * static_cast<double>(rest % side);
          rest /= side;
        }
      }
      std::fill(u.begin(), u.end(), 0.0);
      for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t x = 0; x < n; ++x) u[x] += lambda[i] * b[i][x];
      }
      best = std::max(best, dbar1(model, u));
    }
    return best;
  };

  const std::size_t faces = 2 * k;
  std::vector<double> best(faces);
  const std::size_t workers = std::max<std::size_t>(1, std::min(threads, faces));
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < workers; ++t) {
    pool.emplace_back([&, t] {
      for (std::size_t f = t; f < faces; f += workers) best[f] = eval_face(f);
    });
  }
  for (auto& th : pool) th.join();
  return *std::max_element(best.begin(), best.end());
}

std::filesystem::path data_dir() { return DIVMAX_DATA_DIR; }

namespace {

std::vector<double> point_mass(std::size_t n, std::initializer_list<std::pair<std::size_t, double>> mass) {
  std::vector<double> p(n, 0.0);
  for (auto [x, v] : mass) p[x] = v;
  return p;
}

}  // namespace

std::vector<GoldenModel> bundled_models() {
  std::vector<GoldenModel> out;
  const auto dir = data_dir();

  {
    Expected e;
    e.dbar_max = 0.0;
    e.div_max = std::log(2.0);
    e.maximizers = {point_mass(4, {{0, 0.5}, {3, 0.5}}), point_mass(4, {{1, 0.5}, {2, 0.5}})};
    SignVectorCounts c;
    c.classes = 1;
    c.post_var0 = 1;
    c.post_bound = 1;
    c.post_var0_by_support = {{4, 1}};
    e.counts = c;
    out.push_back({"binary_independence.json", load_model(dir / "binary_independence.json"), e});
  }
  {
    Expected e;
    e.dbar_max = std::log(3.0) - std::log(5.0) / 3.0;
    e.div_max = std::log1p(3.0 * std::pow(5.0, -1.0 / 3.0));
    e.maximizers = {point_mass(16, {{1, 0.2}, {2, 0.2}, {4, 0.2}, {8, 0.2}, {15, 0.2}})};
    std::vector<double> u = {-5, 3, 3, -1, 3, -1, -1, -1, 3, -1, -1, -1, -1, -1, -1, 3};
    for (auto& v : u) v /= 15.0;
    e.maximizer_u = u;
    SignVectorCounts c;
    c.classes = 73;
    c.post_var0 = 20;
    c.post_bound = 20;
    c.post_var0_by_support = {{8, 2}, {12, 3}, {16, 15}};
    e.counts = c;
    out.push_back({"binary_4_2.json", load_model(dir / "binary_4_2.json"), e});
  }
  {
    Expected e;
    const double s2 = std::sqrt(2.0);
    e.dbar_max = std::log(2.0 * (1.0 + s2));
    e.div_max = std::log(3.0 + 2.0 * s2);
    e.maximizers = {point_mass(18, {{5, 1.0 - s2 / 2.0}, {7, 1.0 - s2 / 2.0}, {9, s2 - 1.0}})};
    SignVectorCounts c;
    // Orbits of nonzero realizable sign vectors under symmetry and global sign flip.
    c.classes = 365592;
    c.post_var0 = 975;
    c.post_bound = 240;
    e.counts = c;
    out.push_back({"independence_2_3_3.json", load_model(dir / "independence_2_3_3.json"), e});
  }
  {
    Expected e;
    e.dbar_max = std::log(2.0);
    e.div_max = std::log(3.0);
    e.maximizers = {point_mass(3, {{1, 1.0}})};
    e.maximizer_u = std::vector<double>{0.0, 1.0, -1.0};
    SignVectorCounts c;
    c.classes = 1;
    c.post_var0 = 1;
    c.post_bound = 1;
    c.post_var0_by_support = {{2, 1}};
    e.counts = c;
    out.push_back({"three_state_toy.json", load_model(dir / "three_state_toy.json"), e});
  }
  return out;
}

GoldenModel bundled_model(const std::string& name) {
  for (auto& g : bundled_models()) {
    if (g.model.name() == name || g.file == name || g.file == name + ".json") return g;
  }
  throw std::invalid_argument("no bundled model named " + name);
}

ExponentialFamilyModel random_model(std::mt19937_64& rng, std::size_t states, std::size_t kernel_dim,
                                    int max_entry, bool uniform_r) {
  if (kernel_dim == 0 || kernel_dim >= states) throw std::invalid_argument("random_model: bad kernel dimension");
  const std::size_t rows = states - kernel_dim;
  std::uniform_int_distribution<int> entry(0, max_entry);
  std::uniform_int_distribution<int> weight(1, 12);
  for (;;) {
    exact::IntMatrix a(rows, exact::IntVector(states, 1));
    for (std::size_t i = 1; i < rows; ++i) {
      for (auto& v : a[i]) v = entry(rng);
    }
    if (exact::rank(a, states) != rows) continue;
    std::vector<std::string> names(states);
    std::vector<exact::Rational> r(states, exact::Rational(1));
    for (std::size_t x = 0; x < states; ++x) {
      names[x] = "s" + std::to_string(x);
      if (!uniform_r) r[x] = exact::Rational(weight(rng), 4);
    }
    return ExponentialFamilyModel("random-" + std::to_string(states) + "-" + std::to_string(kernel_dim), names,
                                  std::move(a), std::move(r), {});
  }
}

}  // namespace divmax::oracles
