// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include "coalpp/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace coalpp;
using Catch::Approx;
using nlohmann::json;

namespace {

namespace fs = std::filesystem;

struct TempFile {
  fs::path path;
  explicit TempFile(const std::string& name) : path(fs::temp_directory_path() / ("coalpp_test_" + name)) {
    std::error_code ec;
    fs::remove(path, ec);
  }
  ~TempFile() {
    std::error_code ec;
    fs::remove(path, ec);
    fs::remove(fs::path(path.string() + ".manifest.json"), ec);
  }
  std::string str() const { return path.string(); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  return rows;
}

int cli_main(std::initializer_list<std::string> args) { return coalpp::cli::run_cli(std::vector<std::string>(args)); }

}  // namespace

TEST_CASE("simulate emits the documented CSV shape", "[cli]") {
  TempFile out("sim_shape.csv");
  const int code = cli_main({"simulate", "--n", "100", "--reps", "10", "--seed", "1",
                        "--rects", "0,1,0,1", "--out", out.str(), "--threads", "1"});
  REQUIRE(code == 0);
  const auto rows = parse_csv(slurp(out.path));
  REQUIRE(rows.size() == 11);
  REQUIRE(rows[0] == std::vector<std::string>{"replicate", "pi_s_0", "pi_k_0"});
  for (std::size_t r = 1; r < rows.size(); ++r) {
    REQUIRE(rows[r].size() == 3);
    REQUIRE(rows[r][0] == std::to_string(r - 1));
  }
  // the manifest accompanies the CSV
  const json manifest = json::parse(slurp(fs::path(out.str() + ".manifest.json")));
  REQUIRE(manifest["command"] == "simulate");
  REQUIRE(manifest["seed"] == 1);
  REQUIRE(manifest["version"] == "0.1.0");
}

TEST_CASE("simulate argument failures", "[cli]") {
  TempFile out("sim_err.csv");
  REQUIRE(cli_main({"simulate", "--n", "100", "--reps", "5", "--rects", "0,1,0,1;0.5,1.5,0,1",
               "--out", out.str()}) == 2);
  REQUIRE(cli_main({"simulate", "--n", "100", "--reps", "5", "--rects", "1,0,0,1", "--out", out.str()}) == 2);
  REQUIRE(cli_main({"simulate", "--n", "100", "--reps", "5", "--out", out.str()}) == 2);  // --rects missing
  REQUIRE(cli_main({"simulate", "--n", "1", "--reps", "5", "--rects", "0,1,0,1", "--out", out.str()}) == 2);
  REQUIRE(cli_main({"simulate", "--n", "100", "--reps", "5", "--rects", "0,1,0,1", "--t1-max", "0.5",
               "--out", out.str()}) == 2);  // envelope exceeds the bound
  REQUIRE(cli_main({"nonsense"}) == 2);
  REQUIRE(cli_main({}) == 2);
}

TEST_CASE("simulate enforces the scale guard", "[cli]") {
  TempFile out("sim_scale.csv");
  REQUIRE(cli_main({"simulate", "--n", "100000", "--reps", "5", "--rects", "0,1,0,1", "--t2-max", "1.5",
               "--out", out.str()}) == 3);
}

TEST_CASE("simulate mean matches the exact corner mean at n = 2", "[cli]") {
  TempFile out("sim_mean.csv");
  REQUIRE(cli_main({"simulate", "--n", "2", "--reps", "1000", "--seed", "7", "--rects", "0,1,0,1",
               "--out", out.str(), "--threads", "1"}) == 0);
  const auto rows = parse_csv(slurp(out.path));
  REQUIRE(rows.size() == 1001);
  std::vector<double> s_counts;
  s_counts.reserve(1000);
  for (std::size_t r = 1; r < rows.size(); ++r) s_counts.push_back(std::stod(rows[r][1]));
  const MeanSe ms = mean_and_se(s_counts);
  // E = H_1 / log 2
  REQUIRE(std::fabs(ms.mean - 1.4426950408889634) <= 3.0 * ms.se);
}

TEST_CASE("verify rejects bad arguments", "[cli]") {
  TempFile out("verify_err.json");
  REQUIRE(cli_main({"verify", "--suite", "void", "--n", "100000", "--reps", "50", "--out", out.str()}) == 2);
  REQUIRE(cli_main({"verify", "--suite", "bogus", "--out", out.str()}) == 2);
  REQUIRE(cli_main({"verify", "--n", "100"}) == 2);  // --suite missing
}

TEST_CASE("verify ewens suite passes end to end", "[cli]") {
  TempFile out("verify_ewens.json");
  const int code = cli_main({"verify", "--suite", "ewens", "--reps", "20000", "--seed", "3",
                        "--out", out.str(), "--threads", "1"});
  const json body = json::parse(slurp(out.path));
  REQUIRE(body.contains("manifest"));
  REQUIRE(body.contains("reports"));
  REQUIRE(body["reports"].size() == 7);  // enumeration + 2 samplers x 3 rates
  for (const json& r : body["reports"]) {
    REQUIRE(r.contains("name"));
    REQUIRE(r.contains("estimate"));
    REQUIRE(r.contains("std_error"));
    REQUIRE(r.contains("reference"));
    REQUIRE(r.contains("tolerance"));
    REQUIRE(r.contains("passed"));
    REQUIRE(r.contains("replicates"));
    REQUIRE(r.contains("seed"));
    REQUIRE(r.contains("n"));
  }
  REQUIRE(code == 0);
}

TEST_CASE("verify bodies are identical across thread counts", "[cli]") {
  TempFile a("verify_t1.json"), b("verify_t3.json");
  const int ca = cli_main({"verify", "--suite", "void", "--n", "400", "--reps", "150", "--seed", "9",
                      "--out", a.str(), "--threads", "1"});
  const int cb = cli_main({"verify", "--suite", "void", "--n", "400", "--reps", "150", "--seed", "9",
                      "--out", b.str(), "--threads", "3"});
  REQUIRE(ca == cb);
  json ja = json::parse(slurp(a.path));
  json jb = json::parse(slurp(b.path));
  REQUIRE(ja["reports"].dump() == jb["reports"].dump());
  ja["manifest"].erase("duration_seconds");
  jb["manifest"].erase("duration_seconds");
  ja["manifest"].erase("threads");
  jb["manifest"].erase("threads");
  ja["manifest"]["parameters"].erase("out");
  jb["manifest"]["parameters"].erase("out");
  REQUIRE(ja["manifest"].dump() == jb["manifest"].dump());
}

TEST_CASE("simulate and verify report the same corner mean", "[cli]") {
  TempFile out("roundtrip.csv");
  REQUIRE(cli_main({"simulate", "--n", "500", "--reps", "150", "--seed", "11", "--t1-max", "2",
               "--t2-max", "1", "--rects", "0,1,0,1", "--out", out.str(), "--threads", "2"}) == 0);
  const auto rows = parse_csv(slurp(out.path));
  std::vector<double> s_counts;
  for (std::size_t r = 1; r < rows.size(); ++r) s_counts.push_back(std::stod(rows[r][1]));
  const double csv_mean = mean_and_se(s_counts).mean;

  MCConfig cfg;
  cfg.n = 500;
  cfg.replicates = 150;
  cfg.seed = 11;
  const auto reports = run_verify(cfg, {Suite::Mean}, {.threads = 1});
  for (const TestReport& r : reports)
    if (r.name == "mean_s_corner_vs_exact") {
      REQUIRE(r.estimate == csv_mean);  // bitwise: same streams, same sums
      return;
    }
  FAIL("mean_s_corner_vs_exact row missing");
}

TEST_CASE("moments tables", "[cli]") {
  TempFile out("moments.json");
  REQUIRE(cli_main({"moments", "--n", "100", "--t1", "1", "--t2", "1", "--out", out.str()}) == 0);
  const json body = json::parse(slurp(out.path));
  REQUIRE(body["reports"].size() == 1);
  REQUIRE(body["reports"][0]["mean_s"].get<double>() == Approx(5.17737751763962).epsilon(1e-12));
  REQUIRE(body["reports"][0]["limit_void"].get<double>() == Approx(std::exp(-1.0)).epsilon(1e-12));

  TempFile zero("moments_zero.json");
  REQUIRE(cli_main({"moments", "--n", "100", "--t1", "0", "--t2", "1", "--out", zero.str()}) == 0);
  const json zbody = json::parse(slurp(zero.path));
  REQUIRE(zbody["reports"][0]["mean_s"].get<double>() == 0.0);
  REQUIRE(zbody["reports"][0]["mean_k"].get<double>() == 1.0);
  REQUIRE(zbody["reports"][0]["var_s_minus_k"].get<double>() == 0.0);

  TempFile csv("moments.csv");
  REQUIRE(cli_main({"moments", "--n", "100,10000", "--t1", "1", "--t2", "1", "--out", csv.str()}) == 0);
  const auto rows = parse_csv(slurp(csv.path));
  REQUIRE(rows.size() == 3);
  REQUIRE(rows[0][0] == "n");
  REQUIRE(rows[0][7] == "mean_delta");
  REQUIRE(std::stod(rows[1][7]) > std::stod(rows[2][7]));  // decreasing in n

  REQUIRE(cli_main({"moments", "--n", "100", "--t1", "abc", "--t2", "1", "--out", out.str()}) == 2);
  REQUIRE(cli_main({"moments", "--n", "100", "--t1", "1", "--t2", "1", "--format", "yaml",
               "--out", out.str()}) == 2);
  REQUIRE(cli_main({"moments", "--n", "100000", "--t1", "1", "--t2", "1.5", "--out", out.str()}) == 3);
}
