#include "divmax/model.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include "divmax/lp.hpp"

namespace divmax {

using exact::IntMatrix;
using exact::IntVector;
using exact::Rational;
using exact::RationalMatrix;
using exact::RationalVector;

namespace {

bool is_permutation_of(const Permutation& g, std::size_t n) {
  if (g.size() != n) return false;
  std::vector<bool> seen(n, false);
  for (auto v : g) {
    if (v >= n || seen[v]) return false;
    seen[v] = true;
  }
  return true;
}

Rational parse_rational(const nlohmann::json& v, const std::string& what) {
  if (v.is_number_integer()) return Rational(v.get<std::int64_t>());
  if (v.is_number_float()) return exact::to_rational(v.get<double>());
  if (v.is_string()) {
    try {
      return Rational(v.get<std::string>());
    } catch (const std::exception&) {
      throw ModelError(ModelError::Kind::parse, what + ": cannot parse rational '" +
                                                    v.get<std::string>() + "'");
    }
  }
  throw ModelError(ModelError::Kind::parse, what + ": expected a number");
}

}  // namespace

ExponentialFamilyModel::ExponentialFamilyModel(std::string name, std::vector<std::string> states,
                                               IntMatrix a, std::vector<Rational> r,
                                               std::vector<Permutation> generators)
    : name_(std::move(name)),
      states_(std::move(states)),
      a_(std::move(a)),
      r_exact_(std::move(r)),
      generators_(std::move(generators)) {
  using K = ModelError::Kind;
  const std::size_t n = states_.size();
  if (n == 0) throw ModelError(K::invalid, "model has no states");
  if (a_.empty()) throw ModelError(K::invalid, "sufficient statistics matrix has no rows");
  for (std::size_t i = 0; i < a_.size(); ++i) {
    if (a_[i].size() != n) {
      throw ModelError(K::invalid, "row " + std::to_string(i) + " of A has " +
                                       std::to_string(a_[i].size()) + " columns, expected " +
                                       std::to_string(n));
    }
  }
  if (r_exact_.size() != n) {
    throw ModelError(K::invalid, "reference measure has " + std::to_string(r_exact_.size()) +
                                     " entries, expected " + std::to_string(n));
  }
  for (std::size_t x = 0; x < n; ++x) {
    if (r_exact_[x] <= 0) {
      throw ModelError(K::invalid, "reference measure must be strictly positive (state '" +
                                       states_[x] + "')");
    }
  }
  r_.reserve(n);
  for (const auto& q : r_exact_) r_.push_back(q.convert_to<double>());

  RationalMatrix ra = exact::to_rational(a_);
  rank_ = exact::rank(ra, n);
  ra.push_back(RationalVector(n, Rational(1)));
  if (exact::rank(ra, n) != rank_) {
    throw ModelError(K::structural, "the constant row (1,...,1) is not in the row span of A");
  }

  for (std::size_t k = 0; k < generators_.size(); ++k) {
    if (!is_permutation_of(generators_[k], n)) {
      throw ModelError(K::invalid, "symmetry generator " + std::to_string(k) +
                                       " is not a permutation of the state indices");
    }
  }
  if (!generators_.empty()) {
    KernelBasis basis = kernel_basis(*this);
    for (std::size_t k = 0; k < generators_.size(); ++k) {
      const auto& g = generators_[k];
      bool r_invariant = true;
      for (std::size_t x = 0; x < n; ++x) r_invariant = r_invariant && r_exact_[g[x]] == r_exact_[x];
      if (!r_invariant || !preserves_kernel(*this, basis, g)) {
        throw ModelError(K::structural, "symmetry generator " + std::to_string(k) +
                                            " does not preserve the model");
      }
    }
  }
}

RationalMatrix ExponentialFamilyModel::restricted_rational(std::span<const std::size_t> states) const {
  RationalMatrix out(a_.size(), RationalVector(states.size()));
  for (std::size_t i = 0; i < a_.size(); ++i) {
    for (std::size_t j = 0; j < states.size(); ++j) out[i][j] = a_[i][states[j]];
  }
  return out;
}

ExponentialFamilyModel parse_model(const nlohmann::json& doc) {
  using K = ModelError::Kind;
  if (!doc.is_object()) throw ModelError(K::parse, "model file must hold a JSON object");
  for (const char* key : {"states", "A", "r"}) {
    if (!doc.contains(key)) throw ModelError(K::parse, std::string("missing field '") + key + "'");
  }
  std::string name = doc.value("name", std::string("unnamed"));

  std::vector<std::string> states;
  if (!doc["states"].is_array()) throw ModelError(K::parse, "'states' must be an array");
  for (const auto& s : doc["states"]) {
    if (!s.is_string()) throw ModelError(K::parse, "state labels must be strings");
    states.push_back(s.get<std::string>());
  }

  IntMatrix a;
  if (!doc["A"].is_array()) throw ModelError(K::parse, "'A' must be an array of rows");
  for (const auto& row : doc["A"]) {
    if (!row.is_array()) throw ModelError(K::parse, "'A' must be an array of rows");
    IntVector r;
    for (const auto& e : row) {
      if (e.is_number_integer()) {
        r.push_back(e.get<std::int64_t>());
      } else if (e.is_number_float() && e.get<double>() == static_cast<double>(static_cast<std::int64_t>(e.get<double>()))) {
        r.push_back(static_cast<std::int64_t>(e.get<double>()));
      } else {
        throw ModelError(K::invalid, "A has a non-integer entry (row " + std::to_string(a.size()) + ")");
      }
    }
    a.push_back(std::move(r));
  }

  std::vector<Rational> r;
  if (!doc["r"].is_array()) throw ModelError(K::parse, "'r' must be an array");
  for (const auto& e : doc["r"]) r.push_back(parse_rational(e, "r"));

  std::vector<Permutation> gens;
  if (doc.contains("symmetry_generators")) {
    const auto& g = doc["symmetry_generators"];
    if (!g.is_array()) throw ModelError(K::parse, "'symmetry_generators' must be an array");
    for (const auto& perm : g) {
      if (!perm.is_array()) throw ModelError(K::invalid, "malformed permutation in symmetry_generators");
      Permutation p;
      for (const auto& e : perm) {
        if (!e.is_number_integer() || e.get<std::int64_t>() < 0) {
          throw ModelError(K::invalid, "malformed permutation in symmetry_generators");
        }
        p.push_back(e.get<std::size_t>());
      }
      gens.push_back(std::move(p));
    }
  }
  return ExponentialFamilyModel(std::move(name), std::move(states), std::move(a), std::move(r),
                                std::move(gens));
}

ExponentialFamilyModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ModelError(ModelError::Kind::parse, "cannot open model file " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw ModelError(ModelError::Kind::parse, std::string("parse error: ") + e.what());
  }
  return parse_model(doc);
}

nlohmann::json model_to_json(const ExponentialFamilyModel& model) {
  nlohmann::json r = nlohmann::json::array();
  for (const auto& q : model.r_exact()) {
    if (denominator(q) == 1) {
      r.push_back(numerator(q).convert_to<std::int64_t>());
    } else {
      r.push_back(q.str());
    }
  }
  return {{"name", model.name()},
          {"states", model.states()},
          {"A", model.a()},
          {"r", r},
          {"symmetry_generators", model.symmetry_generators()}};
}

std::vector<double> moment_map(const ExponentialFamilyModel& model, std::span<const double> p) {
  if (p.size() != model.num_states()) throw std::invalid_argument("moment_map: length mismatch");
  std::vector<double> b(model.num_rows(), 0.0);
  for (std::size_t i = 0; i < model.num_rows(); ++i) {
    for (std::size_t x = 0; x < p.size(); ++x) b[i] += static_cast<double>(model.a(i, x)) * p[x];
  }
  return b;
}

RationalVector moment_map(const ExponentialFamilyModel& model, const RationalVector& p) {
  if (p.size() != model.num_states()) throw std::invalid_argument("moment_map: length mismatch");
  RationalVector b(model.num_rows(), Rational(0));
  for (std::size_t i = 0; i < model.num_rows(); ++i) {
    for (std::size_t x = 0; x < p.size(); ++x) {
      if (model.a(i, x) != 0 && p[x] != 0) b[i] += model.a(i, x) * p[x];
    }
  }
  return b;
}

KernelBasis kernel_basis(const ExponentialFamilyModel& model) {
  KernelBasis basis;
  basis.rank_a = model.rank();
  basis.vectors = exact::integer_nullspace(model.a(), model.num_states());
  return basis;
}

bool preserves_kernel(const ExponentialFamilyModel& model, const KernelBasis& basis,
                      const Permutation& g) {
  const std::size_t n = model.num_states();
  for (const auto& v : basis.vectors) {
    IntVector w(n);
    for (std::size_t x = 0; x < n; ++x) w[g[x]] = v[x];
    for (std::size_t i = 0; i < model.num_rows(); ++i) {
      __int128 s = 0;
      for (std::size_t x = 0; x < n; ++x) s += static_cast<__int128>(model.a(i, x)) * w[x];
      if (s != 0) return false;
    }
  }
  return true;
}

namespace {

std::vector<std::size_t> facial_support_impl(const ExponentialFamilyModel& model,
                                             const RationalVector& b, std::vector<bool> known) {
  const std::size_t n = model.num_states();
  RationalMatrix m = exact::to_rational(model.a());
  RationalVector rhs = b;
  m.push_back(RationalVector(n, Rational(1)));
  rhs.push_back(Rational(1));

  bool checked_feasible = std::any_of(known.begin(), known.end(), [](bool k) { return k; });
  for (std::size_t x = 0; x < n; ++x) {
    if (known[x]) continue;
    RationalVector c(n, Rational(0));
    c[x] = 1;
    lp::Result res = lp::maximize(m, rhs, c);
    if (res.status == lp::Status::infeasible) {
      throw std::domain_error("facial_support: moment vector lies outside the convex support");
    }
    checked_feasible = true;
    for (std::size_t y = 0; y < n; ++y) {
      if (res.x[y] > 0) known[y] = true;
    }
  }
  if (!checked_feasible) {
    if (lp::feasible_point(m, rhs).status != lp::Status::optimal) {
      throw std::domain_error("facial_support: moment vector lies outside the convex support");
    }
  }
  std::vector<std::size_t> out;
  for (std::size_t x = 0; x < n; ++x) {
    if (known[x]) out.push_back(x);
  }
  return out;
}

}  // namespace

std::vector<std::size_t> facial_support(const ExponentialFamilyModel& model,
                                        const RationalVector& b) {
  if (b.size() != model.num_rows()) throw std::invalid_argument("facial_support: length mismatch");
  return facial_support_impl(model, b, std::vector<bool>(model.num_states(), false));
}

std::vector<std::size_t> facial_support(const ExponentialFamilyModel& model,
                                        std::span<const double> b) {
  return facial_support(model, exact::to_rational(b));
}

std::vector<std::size_t> facial_support_of(const ExponentialFamilyModel& model,
                                           std::span<const double> p) {
  const std::size_t n = model.num_states();
  if (p.size() != n) throw std::invalid_argument("facial_support_of: length mismatch");
  std::vector<bool> known(n, false);
  bool full = true;
  for (std::size_t x = 0; x < n; ++x) {
    if (p[x] < 0) throw std::invalid_argument("facial_support_of: negative entry");
    known[x] = p[x] > 0;
    full = full && known[x];
  }
  if (full) {
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), 0);
    return all;
  }
  RationalVector exact_p = exact::to_rational(p);
  Rational total = 0;
  for (const auto& q : exact_p) total += q;
  for (auto& q : exact_p) q /= total;
  return facial_support_impl(model, moment_map(model, exact_p), std::move(known));
}

}  // namespace divmax
