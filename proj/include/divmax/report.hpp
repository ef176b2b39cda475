#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "json.hpp"

#include "divmax/critical_solver.hpp"

namespace divmax {

enum ExitCode : int {
  exit_ok = 0,
  exit_check_failed = 1,
  exit_invalid = 2,
  exit_structural = 3,
  exit_cap = 4,
  exit_nonconvergence = 5,
};

nlohmann::ordered_json candidate_json(const CandidateReport& c);
nlohmann::ordered_json report_json(const ExponentialFamilyModel& model, const SearchOptions& options,
                           const SearchResult& result, bool with_timing);

/// One row per candidate; vectors are space-separated, every real printed
/// with %.17g so that values round-trip.
std::string report_csv(const SearchResult& result);

int exit_code(const SearchResult& result);

struct MaximizeOutput {
  std::string format = "json";   // json or csv
  std::optional<std::filesystem::path> out;
  bool timing = false;
};

struct SignVectorRequest {
  EnumerationMode mode = EnumerationMode::closure;
  bool list = false;
  std::size_t max_classes = 50000;
  bool allow_long = false;
  std::size_t threads = 1;
};

int cmd_validate(const std::filesystem::path& path, std::ostream& out, std::ostream& err);
int cmd_maximize(const std::filesystem::path& path, const SearchOptions& options, const MaximizeOutput& output,
                 std::ostream& out, std::ostream& err);
/// The point file holds {"p": [...]} (a distribution) or {"u": [...]} (a
/// kernel point) in state order.
int cmd_verify(const std::filesystem::path& path, const std::filesystem::path& point, std::ostream& out,
               std::ostream& err, double tol = 1e-8);
int cmd_signvectors(const std::filesystem::path& path, const SignVectorRequest& request, std::ostream& out,
                    std::ostream& err);

}  // namespace divmax
