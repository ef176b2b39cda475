#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "divmax/report.hpp"
#include "support.hpp"

using namespace divmax;

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  return out;
}

std::vector<double> parse_reals(const std::string& s) {
  std::vector<double> v;
  for (const auto& t : split(s, ' ')) v.push_back(std::strtod(t.c_str(), nullptr));
  return v;
}

std::string maximize_output(const std::string& file, const SearchOptions& opt, const std::string& format) {
  MaximizeOutput out;
  out.format = format;
  std::ostringstream os, es;
  EXPECT_EQ(cmd_maximize(oracles::data_dir() / file, opt, out, os, es), exit_ok) << es.str();
  return os.str();
}

}  // namespace

TEST(Report, CsvAndJsonRoundTrip) {
  auto m = test_support::bundled("binary_4_2.json");
  SearchOptions opt;
  auto res = global_search(m, opt);
  ASSERT_FALSE(res.candidates.empty());
  auto doc = nlohmann::json::parse(report_json(m, opt, res, false).dump());
  auto lines = split(report_csv(res), '\n');
  ASSERT_EQ(lines.size(), res.candidates.size() + 1);
  for (std::size_t i = 0; i < res.candidates.size(); ++i) {
    const auto& c = res.candidates[i];
    const auto& jc = doc["candidates"][i];
    EXPECT_EQ(jc["dbar"].get<double>(), c.dbar);
    EXPECT_EQ(jc["divergence_projected"].get<double>(), c.divergence_projected);
    EXPECT_EQ(jc["u"].get<std::vector<double>>(), c.u);
    auto fields = split(lines[i + 1], ',');
    ASSERT_EQ(fields.size(), 19u);
    EXPECT_EQ(fields[1], c.sigma);
    EXPECT_EQ(std::strtod(fields[4].c_str(), nullptr), c.dbar);
    EXPECT_EQ(std::strtod(fields[6].c_str(), nullptr), c.divergence_projected);
    EXPECT_EQ(std::strtod(fields[7].c_str(), nullptr), c.mu);
    EXPECT_EQ(parse_reals(fields[15]), c.u);
    EXPECT_EQ(parse_reals(fields[16]), c.p_plus);
  }
}

TEST(Report, SchemaAndStageConsistency) {
  auto m = test_support::bundled("binary_4_2.json");
  SearchOptions opt;
  auto res = global_search(m, opt);
  auto j = report_json(m, opt, res, false);
  EXPECT_EQ(j["schema"], 1);
  EXPECT_FALSE(j.contains("timing_ms"));
  EXPECT_TRUE(report_json(m, opt, res, true).contains("timing_ms"));
  const auto& st = res.stats;
  EXPECT_LE(st.post_var0, st.sign_vectors);
  EXPECT_LE(st.post_bound, st.post_var0);
  EXPECT_LE(st.orthants_solved, st.post_bound);
  for (std::size_t i = 1; i < res.candidates.size(); ++i) {
    EXPECT_GE(res.candidates[i - 1].dbar, res.candidates[i].dbar - 1e-12);
  }
}

TEST(Report, ByteIdenticalAcrossRuns) {
  SearchOptions opt;
  opt.seed = 7;
  EXPECT_EQ(maximize_output("binary_4_2.json", opt, "json"), maximize_output("binary_4_2.json", opt, "json"));
  EXPECT_EQ(maximize_output("binary_4_2.json", opt, "csv"), maximize_output("binary_4_2.json", opt, "csv"));
  opt.threads = 2;
  EXPECT_EQ(maximize_output("binary_4_2.json", opt, "json"), maximize_output("binary_4_2.json", opt, "json"));
}

TEST(Report, ExitCodes) {
  SearchResult r;
  EXPECT_EQ(exit_code(r), exit_ok);
  r.nonconvergence = true;
  EXPECT_EQ(exit_code(r), exit_nonconvergence);
  r.capped = true;
  EXPECT_EQ(exit_code(r), exit_cap);
}

TEST(Report, CapOn42ReturnsCapStatus) {
  SearchOptions opt;
  opt.max_signvectors = 10;
  MaximizeOutput out;
  std::ostringstream os, es;
  EXPECT_EQ(cmd_maximize(oracles::data_dir() / "binary_4_2.json", opt, out, os, es), exit_cap);
  auto j = nlohmann::json::parse(os.str());
  EXPECT_TRUE(j["flags"]["capped"].get<bool>());
}

TEST(Report, VerifyRejectsZeroPoint) {
  const auto path = std::filesystem::temp_directory_path() / "divmax_zero_point.json";
  {
    std::ofstream f(path);
    f << R"({"u": [0, 0, 0, 0]})";
  }
  std::ostringstream os, es;
  EXPECT_NE(cmd_verify(oracles::data_dir() / "binary_independence.json", path, os, es), exit_ok);
  std::filesystem::remove(path);
}

TEST(Report, ValidateExamples) {
  std::ostringstream os, es;
  EXPECT_EQ(cmd_validate(oracles::data_dir() / "binary_4_2.json", os, es), exit_ok);
  EXPECT_EQ(cmd_validate(oracles::data_dir() / "does_not_exist.json", os, es), exit_invalid);
}
