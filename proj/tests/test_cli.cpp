// Drives the installed binary end to end: exit codes, report files on disk,
// and byte-level reproducibility of the report bodies. The binary path
// arrives as argv[1] from the test harness.

#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include <json.hpp>

#include "lacuna/report.hpp"

namespace fs = std::filesystem;

namespace {

std::string g_bin;
fs::path g_work;

struct RunOutcome {
  int rc = -1;
  std::string output;
};

RunOutcome run(const std::string& args) {
  const fs::path log = g_work / "last_run.log";
  const std::string cmd = g_bin + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  RunOutcome out;
  out.rc = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(log, std::ios::binary);
  out.output.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string body_of(const std::string& text) {
  const auto nl = text.find('\n');
  REQUIRE(nl != std::string::npos);
  return text.substr(nl + 1);
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::string line;
  for (std::size_t pos = 0; pos < text.size();) {
    const auto nl = text.find('\n', pos);
    line = text.substr(pos, nl - pos);
    pos = (nl == std::string::npos) ? text.size() : nl + 1;
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
      if (c == ',') {
        fields.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    fields.push_back(cur);
    rows.push_back(std::move(fields));
  }
  return rows;
}

}  // namespace

TEST_CASE("verify exits by mode and names failing conditions") {
  auto ok = run("verify --q auto --output " + (g_work / "v1").string());
  CHECK(ok.rc == 0);
  CHECK(ok.output.find("q = 66 (auto)") != std::string::npos);
  CHECK(ok.output.find("all conditions pass") != std::string::npos);

  auto strict = run("verify --q 3 --mode strict --output " + (g_work / "v2").string());
  CHECK(strict.rc == 1);
  CHECK(strict.output.find("ratio-below") != std::string::npos);
  CHECK(strict.output.find("ratio-above") != std::string::npos);

  auto demo = run("verify --q 3 --mode demo --output " + (g_work / "v3").string());
  CHECK(demo.rc == 0);
  CHECK(demo.output.find("warning") != std::string::npos);
  CHECK(demo.output.find("demo mode") != std::string::npos);

  // the condition table landed on disk with the versioned schema line
  const std::string csv = slurp(g_work / "v2" / "conditions.csv");
  CHECK(csv.rfind("# lacuna-conditions-v1", 0) == 0);
  bool any_fail = false;
  for (const auto& row : csv_rows(csv)) {
    if (row.back() == "0") any_fail = true;
  }
  CHECK(any_fail);
}

TEST_CASE("series emits the exact degenerate columns") {
  auto r = run("series --q 7 --M 0 --samples 32 --output " + (g_work / "s0").string());
  REQUIRE(r.rc == 0);
  const auto rows = csv_rows(slurp(g_work / "s0" / "series.csv"));
  REQUIRE(rows.size() == 33);  // header + samples
  REQUIRE(rows[0][4] == "f");
  REQUIRE(rows[0][5] == "F");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i][4] == "0");  // M = 0: no oscillation at all
    CHECK(rows[i][5] == "1");
  }

  auto r2 = run("series --q 7 --M 2 --samples 32 --output " + (g_work / "s2").string());
  REQUIRE(r2.rc == 0);
  const auto rows2 = csv_rows(slurp(g_work / "s2" / "series.csv"));
  CHECK(rows2[1][4] == "0");  // f(0) = 0 exactly at any truncation
}

TEST_CASE("solve rejects the incompatible neumann load") {
  auto bad = run("solve --bc neumann --rhs one --output " + (g_work / "n1").string());
  CHECK(bad.rc != 0);
  CHECK(bad.output.find("incompatible") != std::string::npos);

  auto good = run("solve --q 7 --M 1 --n-theta 32 --bc neumann --rhs auto --output " +
                  (g_work / "n2").string());
  REQUIRE(good.rc == 0);
  const auto j = nlohmann::json::parse(slurp(g_work / "n2" / "solve.json"));
  CHECK(j["bc"] == "neumann");
  CHECK(j["rhs"] == "auto");
  CHECK(j["residual_rel"].get<double>() < 1e-8);
}

TEST_CASE("mesh report is self-consistent") {
  auto r = run("mesh --q 7 --M 2 --n-theta 32 --output " + (g_work / "m1").string());
  REQUIRE(r.rc == 0);
  const auto j = nlohmann::json::parse(slurp(g_work / "m1" / "mesh.json"));
  const int nt = j["n_theta"], nr = j["n_r"];
  CHECK(j["nodes"].size() == static_cast<std::size_t>(1 + nt * nr));
  CHECK(j["boundary"].size() == static_cast<std::size_t>(nt));
  CHECK(j["area_polygon"].get<double>() < j["area_smooth"].get<double>());
  CHECK(j["area_smooth"].get<double>() > 3.14);
}

TEST_CASE("usage errors are nonzero and do not write files") {
  CHECK(run("frobnicate").rc != 0);
  CHECK(run("verify --q nonsense").rc == 2);
  CHECK(run("series --samples 1").rc != 0);
  const fs::path cfg = g_work / "bad.ini";
  lacuna::write_atomic(cfg, "[run]\nshenanigans = 1\n");
  auto r = run("verify --config " + cfg.string());
  CHECK(r.rc == 2);
  CHECK(r.output.find("unknown key") != std::string::npos);
}

TEST_CASE("sweep bodies reproduce byte for byte across runs and worker caps") {
  const fs::path cfg = g_work / "sweep.ini";
  lacuna::write_atomic(cfg,
                       "[run]\nq = 7\nM = 2\n\n"
                       "[sweep]\nn_theta = 64\nM = 1\nsupersample = 4\nspecs = 2:0.25\n");

  auto r1 = run("sweep --config " + cfg.string() + " --output " + (g_work / "w1").string());
  REQUIRE(r1.rc == 0);
  CHECK(r1.output.find("all pass") != std::string::npos);

  auto r2 = run("sweep --config " + cfg.string() + " --threads 2 --output " +
                (g_work / "w2").string());
  REQUIRE(r2.rc == 0);

  const std::string b1 = body_of(slurp(g_work / "w1" / "sweep.csv"));
  const std::string b2 = body_of(slurp(g_work / "w2" / "sweep.csv"));
  REQUIRE(!b1.empty());
  CHECK(b1 == b2);

  const auto j1 = nlohmann::json::parse(slurp(g_work / "w1" / "sweep.json"));
  auto j2 = nlohmann::json::parse(slurp(g_work / "w2" / "sweep.json"));
  CHECK(j1["invariants"]["all_pass"] == true);
  j2["generated"] = j1["generated"];
  CHECK(j1 == j2);
}

TEST_CASE("sweep exits nonzero when an invariant fails") {
  // 32 vs 64 is far too coarse for the slowly converging control seminorm,
  // so control flatness must fail and the run must say so
  auto r = run("sweep --q 7 --n-theta 32,64 --sweep-M 1 --supersample 4 --specs 2:0.25 "
               "--output " +
               (g_work / "w3").string());
  CHECK(r.rc == 1);
  CHECK(r.output.find("control_flat FAIL") != std::string::npos);
  CHECK(r.output.find("sweep FAILED") != std::string::npos);
  // reports still land for post-mortem
  CHECK(fs::exists(g_work / "w3" / "sweep.csv"));
  CHECK(fs::exists(g_work / "w3" / "sweep.json"));
}

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: test_cli <path-to-lacuna-binary> [doctest args]\n");
    return 64;
  }
  g_bin = argv[1];
  g_work = fs::temp_directory_path() / "lacuna_cli_test";
  fs::remove_all(g_work);
  fs::create_directories(g_work);

  doctest::Context ctx(argc - 1, argv + 1);
  const int rc = ctx.run();
  if (rc == 0) fs::remove_all(g_work);
  return rc;
}
