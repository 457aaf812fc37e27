#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rpl/errors.hpp"
#include "rpl/pipeline.hpp"

using namespace rpl;
namespace fs = std::filesystem;

namespace {

fs::path tmp(const std::string& leaf) {
  const char* t = std::getenv("RPL_TEST_TMP");
  fs::path p = t ? fs::path(t) : fs::temp_directory_path() / "rpl-unit";
  p /= "pipeline";
  p /= leaf;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

const char* kMinimal = R"(
[nonlinearity]
kind = polynomial
numerator = [-1]

[grid]
dimension = 1
R = 20
h = 0.05

[omega]
star = 1

[stages]
run = ground, spectrum
)";

std::string config_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Config);
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("config: missing grid.R is named") {
  std::string t = kMinimal;
  t.replace(t.find("R = 20"), 6, "");
  std::string msg = config_error(t);
  CHECK(msg.find("grid.R") != std::string::npos);
}

TEST_CASE("config: unknown keys and bad values report the line") {
  std::string msg = config_error(std::string(kMinimal) + "[grid]\n");
  CHECK(msg.find("duplicate") == std::string::npos);  // sections may reopen
  msg = config_error(std::string(kMinimal) + "[tolerances]\ntol_gz = 1e-9\n");
  CHECK(msg.find("tolerances.tol_gz") != std::string::npos);
  CHECK(msg.find("line 17") != std::string::npos);
  msg = config_error(std::string(kMinimal) + "[tolerances]\ntol_gs = -1\n");
  CHECK(msg.find("tolerances.tol_gs") != std::string::npos);
  msg = config_error(std::string(kMinimal) + "[bogus]\n");
  CHECK(msg.find("bogus") != std::string::npos);
  msg = config_error(std::string(kMinimal) + "[omega]\nsweep = [1, x, 2]\n");
  CHECK(msg.find("omega.sweep") != std::string::npos);
  msg = config_error(std::string(kMinimal) + "[grid]\nR = 30\n");
  CHECK(msg.find("duplicate key grid.R") != std::string::npos);
}

TEST_CASE("config: stage dependencies are closed and ordered") {
  std::string t = kMinimal;
  t.replace(t.find("run = ground, spectrum"), 22, "run = fgr");
  auto c = parse_config(t);
  std::vector<std::string> want{"ground", "spectrum", "resonance", "profile", "fgr"};
  CHECK(c.stages == want);
}

TEST_CASE("config: default h divides R") {
  std::string t = kMinimal;
  t.replace(t.find("h = 0.05"), 8, "");
  auto c = parse_config(t);
  CHECK(c.h > 0);
  double n = c.R / c.h;
  CHECK(std::abs(n - std::round(n)) < 1e-9);
}

TEST_CASE("cache_key properties") {
  using nlohmann::json;
  json a = json::parse(R"({"omega": 1.0, "grid": {"R": 20, "h": 0.05}})");
  json b = json::parse(R"({"grid": {"h": 0.05, "R": 20}, "omega": 1.0})");
  json c = json::parse(R"({"omega": 1.000001, "grid": {"R": 20, "h": 0.05}})");
  CHECK(cache_key(a) == cache_key(a));
  CHECK(cache_key(a) == cache_key(b));
  CHECK(cache_key(a) != cache_key(c));
  CHECK(cache_key(a).size() == 64);
}

TEST_CASE("dump_json prints 17 significant digits") {
  nlohmann::json j{{"x", 0.1}};
  CHECK(dump_json(j).find("0.10000000000000001") != std::string::npos);
}

TEST_CASE("minimal run: H1 and H2 pass, FGR skipped, deterministic with cache hits") {
  fs::path out = tmp("minimal");
  auto cfg = parse_config(kMinimal, out.string());
  cfg.output_dir = (out / "run").string();
  auto first = run_pipeline(cfg);
  CHECK(first.exit_code == 0);
  CHECK(first.report["hypotheses"]["H1"]["status"] == "pass");
  CHECK(first.report["hypotheses"]["H2"]["status"] == "pass");
  CHECK(first.report["hypotheses"]["H7"]["status"] == "skipped");
  CHECK(first.report["N"] == 0);
  CHECK(first.cache_misses > 0);
  std::string r1 = slurp(out / "run" / "report.json");
  auto second = run_pipeline(cfg);
  CHECK(second.cache_hits > 0);
  CHECK(slurp(out / "run" / "report.json") == r1);
  CHECK(fs::exists(out / "run" / "timings.json"));
  CHECK(fs::exists(out / "run" / "ground.csv"));

  int removed = clean_cache((out / "run" / "cache").string());
  CHECK(removed >= 2);
  auto third = run_pipeline(cfg);
  CHECK(third.cache_hits == 0);
  CHECK(slurp(out / "run" / "report.json") == r1);
  CHECK(summarize_report((out / "run").string()).find("H1: pass") != std::string::npos);
}

TEST_CASE("RPL_CACHE_DIR overrides the cache location") {
  fs::path out = tmp("envcache");
  auto cfg = parse_config(kMinimal, out.string());
  cfg.output_dir = (out / "run").string();
  setenv("RPL_CACHE_DIR", (out / "elsewhere").string().c_str(), 1);
  auto res = run_pipeline(cfg);
  unsetenv("RPL_CACHE_DIR");
  CHECK(res.exit_code == 0);
  CHECK(fs::exists(out / "elsewhere"));
  CHECK_FALSE(fs::exists(out / "run" / "cache"));
}

TEST_CASE("stage errors give a nonzero exit code with provenance") {
  fs::path out = tmp("error");
  std::string t = kMinimal;
  // defocusing: no ground state exists
  t.replace(t.find("numerator = [-1]"), 16, "numerator = [1]");
  auto cfg = parse_config(t, out.string());
  cfg.output_dir = (out / "run").string();
  auto res = run_pipeline(cfg);
  CHECK(res.exit_code != 0);
  CHECK(res.report["stages"]["ground"]["status"] == "error");
  CHECK(res.report["stages"]["spectrum"]["status"] == "skipped");
  CHECK(fs::exists(out / "run" / "report.json"));
}
