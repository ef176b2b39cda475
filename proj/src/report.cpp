#include "divmax/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "divmax/divergence.hpp"
#include "divmax/projection_points.hpp"

namespace divmax {

using nlohmann::ordered_json;

namespace {

ordered_json real(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

ordered_json reals(const std::vector<double>& v) {
  ordered_json a = ordered_json::array();
  for (double x : v) a.push_back(real(x));
  return a;
}

std::string g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string joined(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s.push_back(' ');
    s += g17(v[i]);
  }
  return s;
}

std::string mode_name(EnumerationMode m) { return m == EnumerationMode::scan ? "scan" : "closure"; }

std::optional<ExponentialFamilyModel> load_checked(const std::filesystem::path& path, std::ostream& err, int& code) {
  try {
    return load_model(path);
  } catch (const ModelError& e) {
    code = e.structural() ? exit_structural : exit_invalid;
    err << "error: " << e.what() << "\n";
  } catch (const std::exception& e) {
    code = exit_invalid;
    err << "error: " << e.what() << "\n";
  }
  return std::nullopt;
}

}  // namespace

ordered_json candidate_json(const CandidateReport& c) {
  ordered_json j;
  j["sigma"] = c.sigma;
  j["method"] = c.method;
  j["global_maximizer"] = c.global_maximizer;
  j["dbar"] = real(c.dbar);
  j["divergence_pair"] = real(c.divergence_pair);
  j["divergence_projected"] = real(c.divergence_projected);
  j["mu"] = real(c.mu);
  j["u"] = reals(c.u);
  j["p_plus"] = reals(c.p_plus);
  j["p_minus"] = reals(c.p_minus);
  j["p_e"] = reals(c.p_e);
  if (!c.alpha.empty()) j["alpha"] = reals(c.alpha);
  j["flat"] = c.flat;
  j["verified"] = {{"var0", c.var0}, {"var1", c.var1}, {"phat_is_projection", c.phat_is_projection}};
  j["residuals"] = {{"var1", real(c.var1_residual)}, {"kernel", real(c.kernel_residual)}, {"phat", real(c.phat_residual)}};
  return j;
}

ordered_json report_json(const ExponentialFamilyModel& model, const SearchOptions& options, const SearchResult& result,
                         bool with_timing) {
  ordered_json j;
  j["schema"] = 1;
  j["model_name"] = model.name();

  ordered_json config;
  config["method"] = method_name(options.method);
  config["method_resolved"] = method_name(result.method);
  config["starts"] = options.starts;
  config["tol"] = options.tol;
  config["threads"] = options.threads;
  config["seed"] = options.seed;
  config["max_signvectors"] = options.max_signvectors;
  ordered_json filters = ordered_json::array();
  if (options.use_var0) filters.push_back("var0");
  if (options.use_bound) filters.push_back("bound");
  config["filters"] = filters;
  config["mode"] = mode_name(options.mode);
  config["allow_long"] = options.allow_long;
  if (options.sigmas) {
    ordered_json s = ordered_json::array();
    for (const auto& v : *options.sigmas) s.push_back(v.str());
    config["sigmas"] = s;
  }
  j["config"] = config;

  const auto& st = result.stats;
  j["stage_stats"] = {{"circuits", st.circuits},
                      {"sign_vectors", st.sign_vectors},
                      {"post_var0", st.post_var0},
                      {"post_bound", st.post_bound},
                      {"orthants_solved", st.orthants_solved},
                      {"roots_found", st.roots_found},
                      {"flat_orthants", st.flat_orthants},
                      {"rejected_orthants", st.rejected_orthants},
                      {"starts", st.starts},
                      {"nonconverged_starts", st.nonconverged_starts},
                      {"boundary_rejects", st.boundary_rejects}};
  j["flags"] = {{"capped", result.capped}, {"nonconvergence", result.nonconvergence}};
  j["errors"] = result.errors;

  ordered_json summary;
  std::size_t maximizers = 0;
  for (const auto& c : result.candidates) maximizers += c.global_maximizer ? 1 : 0;
  if (!result.candidates.empty()) {
    summary["dbar_max"] = real(result.candidates.front().dbar);
    summary["div_max"] = real(result.candidates.front().divergence_projected);
  } else {
    summary["dbar_max"] = nullptr;
    summary["div_max"] = nullptr;
  }
  summary["global_maximizers"] = maximizers;
  j["summary"] = summary;

  ordered_json cands = ordered_json::array();
  for (const auto& c : result.candidates) cands.push_back(candidate_json(c));
  j["candidates"] = cands;

  if (with_timing) {
    const auto& t = result.times;
    j["timing_ms"] = {{"circuits", t.circuits},
                      {"enumeration", t.enumeration},
                      {"filters", t.filters},
                      {"solve", t.solve},
                      {"ranking", t.ranking}};
  }
  return j;
}

std::string report_csv(const SearchResult& result) {
  std::ostringstream os;
  os << "rank,sigma,method,global_maximizer,dbar,divergence_pair,divergence_projected,mu,var0,var1,"
        "phat_is_projection,flat,var1_residual,kernel_residual,phat_residual,u,p_plus,p_minus,p_e\n";
  std::size_t rank = 0;
  for (const auto& c : result.candidates) {
    os << ++rank << ',' << c.sigma << ',' << c.method << ',' << c.global_maximizer << ',' << g17(c.dbar) << ','
       << g17(c.divergence_pair) << ',' << g17(c.divergence_projected) << ',' << g17(c.mu) << ',' << c.var0 << ','
       << c.var1 << ',' << c.phat_is_projection << ',' << c.flat << ',' << g17(c.var1_residual) << ','
       << g17(c.kernel_residual) << ',' << g17(c.phat_residual) << ',' << joined(c.u) << ',' << joined(c.p_plus)
       << ',' << joined(c.p_minus) << ',' << joined(c.p_e) << '\n';
  }
  return os.str();
}

int exit_code(const SearchResult& result) {
  if (result.capped) return exit_cap;
  if (result.nonconvergence) return exit_nonconvergence;
  return exit_ok;
}

int cmd_validate(const std::filesystem::path& path, std::ostream& out, std::ostream& err) {
  int code = exit_ok;
  const auto model = load_checked(path, err, code);
  if (!model) return code;
  out << "ok " << model->name() << ": " << model->num_states() << " states, " << model->num_rows()
      << " rows, rank " << model->rank() << ", dim E " << model->family_dimension() << ", dim ker A "
      << model->kernel_dimension() << ", " << model->symmetry_generators().size() << " symmetry generators\n";
  return exit_ok;
}

int cmd_maximize(const std::filesystem::path& path, const SearchOptions& options, const MaximizeOutput& output,
                 std::ostream& out, std::ostream& err) {
  int code = exit_ok;
  const auto model = load_checked(path, err, code);
  if (!model) return code;
  SearchResult result;
  try {
    result = global_search(*model, options);
  } catch (const GroupOrderExceeded& e) {
    err << "error: " << e.what() << "\n";
    return exit_cap;
  } catch (const ConvergenceError& e) {
    err << "error: " << e.what() << "\n";
    return exit_nonconvergence;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return exit_invalid;
  }
  std::string text;
  if (output.format == "csv") {
    text = report_csv(result);
  } else {
    text = report_json(*model, options, result, output.timing).dump(2) + "\n";
  }
  if (output.out) {
    std::ofstream f(*output.out, std::ios::binary);
    if (!f) {
      err << "error: cannot write " << output.out->string() << "\n";
      return exit_invalid;
    }
    f << text;
  } else {
    out << text;
  }
  for (const auto& e : result.errors) {
    if (result.capped || result.nonconvergence) err << "warning: " << e << "\n";
  }
  return exit_code(result);
}

int cmd_verify(const std::filesystem::path& path, const std::filesystem::path& point, std::ostream& out,
               std::ostream& err, double tol) {
  int code = exit_ok;
  const auto model = load_checked(path, err, code);
  if (!model) return code;
  const std::size_t n = model->num_states();

  std::vector<double> values;
  bool is_kernel_point = false;
  try {
    std::ifstream f(point);
    if (!f) throw std::runtime_error("cannot open point file " + point.string());
    const auto doc = nlohmann::json::parse(f);
    if (doc.contains("u")) {
      values = doc.at("u").get<std::vector<double>>();
      is_kernel_point = true;
    } else {
      values = doc.at("p").get<std::vector<double>>();
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_invalid;
  }
  if (values.size() != n) {
    err << "error: point has " << values.size() << " entries, model has " << n << " states\n";
    return exit_invalid;
  }

  std::vector<double> p;
  std::vector<double> u;
  const KernelBasis basis = kernel_basis(*model);
  ProjectionPropertyReport pp;
  try {
    if (is_kernel_point) {
      if (std::all_of(values.begin(), values.end(), [](double v) { return v == 0; })) {
        err << "error: degenerate kernel point u = 0\n";
        return exit_invalid;
      }
      const KernelPoint kp0 = decompose(values, 1e-9);
      u = values;
      for (auto& v : u) v /= kp0.degree;
      p = kp0.p_plus;
      pp = verify_projection_property(*model, p, tol);
    } else {
      double total = 0;
      for (double v : values) {
        if (!(v >= 0)) throw std::invalid_argument("distribution has a negative entry");
        total += v;
      }
      if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("distribution does not sum to one");
      p = values;
      pp = verify_projection_property(*model, p, tol);
      // Pair P with the projection conditioned on the complement of supp P.
      double rest = 0;
      for (std::size_t x = 0; x < n; ++x) {
        if (p[x] == 0) rest += pp.p_e[x];
      }
      if (rest > 0) {
        u.assign(n, 0.0);
        for (std::size_t x = 0; x < n; ++x) u[x] = p[x] > 0 ? p[x] : -pp.p_e[x] / rest;
      }
    }
  } catch (const ConvergenceError& e) {
    err << "error: " << e.what() << "\n";
    return exit_nonconvergence;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return exit_invalid;
  }

  struct Row {
    std::string name;
    std::string residual;
    bool pass;
  };
  std::vector<Row> rows;
  rows.push_back({"projection_property", g17(pp.deviation), pp.pass});
  double dbar_value = std::numeric_limits<double>::quiet_NaN();
  if (u.empty()) {
    rows.push_back({"quasi_critical", "n/a (P lies in the closure of E)", false});
    rows.push_back({"lemma_identities", "n/a", false});
  } else {
    const double kres = kernel_residual(*model, u);
    const QuasiCriticalReport qc = verify_quasi_critical(*model, basis, u, tol);
    const bool in_kernel = kres <= 1e-9;
    std::ostringstream r;
    r << "var0=" << (qc.var0 ? "ok" : "fail") << " var1=" << g17(qc.var1) << " |Au|=" << g17(kres);
    rows.push_back({"quasi_critical", r.str(), qc.pass && in_kernel});
    const KernelPoint kp = decompose(u, 1e-9);
    const LemmaResiduals lr = lemma_identities(*model, kp);
    rows.push_back({"lemma_identities", g17(lr.max()), lr.max() <= 1e-10});
    dbar_value = dbar(*model, u);
  }
  rows.push_back({"parallel_hyperplanes", "-", verify_parallel_hyperplanes(*model, pp.p_e)});

  out << std::left << std::setw(24) << "check" << std::setw(56) << "residual" << " status\n";
  bool all = true;
  for (const auto& row : rows) {
    out << std::left << std::setw(24) << row.name << std::setw(56) << row.residual << " " << (row.pass ? "pass" : "FAIL")
        << "\n";
    all = all && row.pass;
  }
  out << "D(P||E) = " << g17(kl(p, pp.p_e)) << "\n";
  out << "Dbar(u) = " << g17(dbar_value) << "\n";
  return all ? exit_ok : exit_check_failed;
}

int cmd_signvectors(const std::filesystem::path& path, const SignVectorRequest& request, std::ostream& out,
                    std::ostream& err) {
  int code = exit_ok;
  const auto model = load_checked(path, err, code);
  if (!model) return code;
  const KernelBasis basis = kernel_basis(*model);

  ordered_json j;
  j["schema"] = 1;
  j["model_name"] = model->name();
  j["mode"] = mode_name(request.mode);
  if (request.mode == EnumerationMode::scan && !request.allow_long && model->num_states() > 12) {
    err << "error: scan over 3^" << model->num_states() << " sign patterns requires --allow-long\n";
    return exit_cap;
  }
  const CircuitSet cs = circuits(*model, basis);
  std::optional<SymmetryGroup> group;
  try {
    group.emplace(*model);
  } catch (const GroupOrderExceeded& e) {
    err << "error: " << e.what() << "\n";
    return exit_cap;
  }
  std::set<SignVector> circuit_classes;
  for (const auto& c : cs.circuits) circuit_classes.insert(group->canonical(c.sign));
  j["circuits"] = circuit_classes.size();
  j["circuits_total"] = cs.circuits.size();

  EnumerationOptions eo;
  eo.mode = request.mode;
  eo.threads = request.threads;
  eo.max_classes = request.allow_long ? std::numeric_limits<std::size_t>::max() : request.max_classes;
  std::vector<SignVector> classes;
  bool capped = false;
  try {
    classes = enumerate_sign_vectors(*model, cs, *group, eo);
  } catch (const CapExceeded& e) {
    capped = true;
    classes = e.partial();
    err << "error: " << e.what() << "\n";
  }

  std::size_t post_var0 = 0, post_bound = 0;
  std::map<std::size_t, std::size_t> by_support;
  for (const auto& s : classes) {
    if (!filter_var0(basis, s)) continue;
    ++post_var0;
    ++by_support[s.support().size()];
    if (filter_support_bound(*model, s)) ++post_bound;
  }
  j["capped"] = capped;
  j["sign_vectors"] = classes.size();
  j["post_var0"] = post_var0;
  j["post_bound"] = post_bound;
  ordered_json hist = ordered_json::object();
  for (auto [k, v] : by_support) hist[std::to_string(k)] = v;
  j["post_var0_by_support"] = hist;
  if (request.list) {
    ordered_json list = ordered_json::array();
    for (const auto& s : classes) list.push_back(s.str());
    j["classes"] = list;
  }
  out << j.dump(2) << "\n";
  return capped ? exit_cap : exit_ok;
}

}  // namespace divmax
