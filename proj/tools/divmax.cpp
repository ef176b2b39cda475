#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "divmax/report.hpp"

namespace {

divmax::Method parse_method(const std::string& s) {
  if (s == "orthant") return divmax::Method::orthant;
  if (s == "projection") return divmax::Method::projection;
  return divmax::Method::automatic;
}

divmax::EnumerationMode parse_mode(const std::string& s) {
  return s == "scan" ? divmax::EnumerationMode::scan : divmax::EnumerationMode::closure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Maximize the information divergence from a discrete exponential family"};
  app.require_subcommand(1);

  std::string model_path;

  auto* validate = app.add_subcommand("validate", "check a model file");
  validate->add_option("model", model_path, "model JSON")->required();

  auto* maximize = app.add_subcommand("maximize", "search for the global maximizers");
  maximize->add_option("model", model_path, "model JSON")->required();
  std::string method = "auto", format = "json", mode = "closure", out_path;
  std::vector<std::string> filters{"var0", "bound"};
  std::vector<std::string> sigmas;
  divmax::SearchOptions opts;
  bool timing = false;
  maximize->add_option("--method", method, "orthant, projection or auto")
      ->check(CLI::IsMember({"orthant", "projection", "auto"}))
      ->capture_default_str();
  maximize->add_option("--starts", opts.starts, "Newton starts per orthant")->capture_default_str();
  maximize->add_option("--tol", opts.tol, "root tolerance")->capture_default_str();
  maximize->add_option("--threads", opts.threads, "worker threads")->capture_default_str();
  maximize->add_option("--seed", opts.seed, "global seed")->capture_default_str();
  maximize->add_option("--max-signvectors", opts.max_signvectors, "cap on enumerated classes")->capture_default_str();
  maximize->add_option("--filters", filters, "var0, bound or none")
      ->delimiter(',')
      ->check(CLI::IsMember({"var0", "bound", "none"}))
      ->capture_default_str();
  maximize->add_option("--mode", mode, "closure or scan")->check(CLI::IsMember({"closure", "scan"}));
  maximize->add_option("--sigma", sigmas, "solve only these sign vectors (strings over +,-,0)");
  maximize->add_flag("--allow-long", opts.allow_long, "lift enumeration caps");
  maximize->add_option("--out", out_path, "write the report here instead of stdout");
  maximize->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  maximize->add_flag("--timing", timing, "include wall times in the report");

  auto* verify = app.add_subcommand("verify", "check a distribution or kernel point");
  verify->add_option("model", model_path, "model JSON")->required();
  std::string point_path;
  double verify_tol = 1e-8;
  verify->add_option("point", point_path, "JSON with \"p\" or \"u\"")->required();
  verify->add_option("--tol", verify_tol, "tolerance")->capture_default_str();

  auto* signvectors = app.add_subcommand("signvectors", "enumerate sign vectors of ker A up to symmetry");
  signvectors->add_option("model", model_path, "model JSON")->required();
  divmax::SignVectorRequest svr;
  std::string sv_mode = "closure";
  signvectors->add_option("--mode", sv_mode, "closure or scan")->check(CLI::IsMember({"closure", "scan"}));
  signvectors->add_flag("--list", svr.list, "print the canonical classes");
  signvectors->add_flag("--allow-long", svr.allow_long, "lift enumeration caps");
  signvectors->add_option("--max-signvectors", svr.max_classes, "cap on enumerated classes")->capture_default_str();
  signvectors->add_option("--threads", svr.threads, "worker threads")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : divmax::exit_invalid;
  }

  try {
    if (*validate) return divmax::cmd_validate(model_path, std::cout, std::cerr);
    if (*maximize) {
      opts.method = parse_method(method);
      opts.mode = parse_mode(mode);
      opts.use_var0 = false;
      opts.use_bound = false;
      for (const auto& f : filters) {
        if (f == "var0") opts.use_var0 = true;
        if (f == "bound") opts.use_bound = true;
      }
      if (!sigmas.empty()) {
        std::vector<divmax::SignVector> parsed;
        for (const auto& s : sigmas) parsed.push_back(divmax::SignVector::from_string(s));
        opts.sigmas = parsed;
      }
      divmax::MaximizeOutput output;
      output.format = format;
      output.timing = timing;
      if (!out_path.empty()) output.out = out_path;
      return divmax::cmd_maximize(model_path, opts, output, std::cout, std::cerr);
    }
    if (*verify) return divmax::cmd_verify(model_path, point_path, std::cout, std::cerr, verify_tol);
    if (*signvectors) {
      svr.mode = parse_mode(sv_mode);
      return divmax::cmd_signvectors(model_path, svr, std::cout, std::cerr);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return divmax::exit_invalid;
  }
  return 0;
}
