#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "doctest.h"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "fxt");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = fxt::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path write_config(const std::string& name, const std::string& text) {
  const fs::path dir = fs::temp_directory_path() / "fxt_cli_unit";
  fs::create_directories(dir);
  const fs::path p = dir / (name + ".yaml");
  std::ofstream(p) << text;
  return p;
}

}  // namespace

TEST_CASE("usage errors exit 1") {
  CHECK(invoke({}).code == fxt::cli::kExitError);
  CHECK(invoke({"frobnicate"}).code == fxt::cli::kExitError);
  CHECK(invoke({"run", "/nonexistent.yaml"}).code == fxt::cli::kExitError);
  CHECK(invoke({"bounds", "--p1", "2"}).code == fxt::cli::kExitError);
  CHECK(invoke({"verify", "--scope", "everything"}).code == fxt::cli::kExitError);

  const fs::path pairing = write_config("pairing", "name: x\nproblem: sphere\nflow: saddle-newton\n"
                                                   "initial_conditions: {norms: [1]}\n");
  const Result r = invoke({"run", pairing.string()});
  CHECK(r.code == fxt::cli::kExitError);
  CHECK(r.err.find("error:") == 0);
}

TEST_CASE("help exits 0") { CHECK(invoke({"--help"}).code == fxt::cli::kExitOk); }

TEST_CASE("bounds prints the default values") {
  const Result r = invoke({"bounds", "--k", "1", "--grad0", "4", "--mu", "0.5", "--gap0", "1"});
  REQUIRE(r.code == fxt::cli::kExitOk);
  CHECK(r.out.find("T1") != std::string::npos);
  CHECK(r.out.find("3.085521011") != std::string::npos);
  CHECK(r.out.find("12\n") != std::string::npos);
  CHECK(r.out.find("3.567621345") != std::string::npos);
  CHECK(r.out.find("7.336") != std::string::npos);
}

TEST_CASE("run, sweep and list-problems") {
  const fs::path out_dir = fs::temp_directory_path() / "fxt_cli_unit" / "out";
  fs::remove_all(out_dir);
  const fs::path cfg = write_config("sphere", "name: sphere_ft\nproblem: sphere\nflow: fixed-time\n"
                                              "initial_conditions: {norms: [1, 100]}\nbounds: [T3-strict]\n");
  const Result run = invoke({"run", cfg.string(), "--output-dir", out_dir.string()});
  CHECK(run.code == fxt::cli::kExitOk);
  CHECK(fs::exists(out_dir / "summary.json"));
  CHECK(fs::exists(out_dir / "runs" / "sphere_ft" / "1.csv"));

  const Result sweep = invoke({"sweep", cfg.string(), "--norms", "0.01,1,1e6", "--output-dir", out_dir.string()});
  CHECK(sweep.code == fxt::cli::kExitOk);
  CHECK(sweep.out.find("x0_norm,settle_time") == 0);
  CHECK(sweep.out.find("uniformity pass") != std::string::npos);

  const Result list = invoke({"list-problems"});
  CHECK(list.code == fxt::cli::kExitOk);
  CHECK(list.out.find("constrained-as-saddle") != std::string::npos);
  fs::remove_all(out_dir);
}

TEST_CASE("a failing check exits 2") {
  // Zero slack against a bound the run cannot meet: the horizon is far too short.
  const fs::path cfg = write_config("short", "name: short\nproblem: sphere\nflow: fixed-time\n"
                                             "initial_conditions: {norms: [100]}\n"
                                             "integrator: {t_max: 0.5}\nbounds: [T3-strict]\n");
  const fs::path out_dir = fs::temp_directory_path() / "fxt_cli_unit" / "short";
  CHECK(invoke({"run", cfg.string(), "--output-dir", out_dir.string()}).code == fxt::cli::kExitCheckFailed);
  fs::remove_all(out_dir);
}

TEST_CASE("verify bounds scope passes") {
  const Result r = invoke({"verify", "--scope", "bounds"});
  CHECK(r.code == fxt::cli::kExitOk);
  CHECK(r.out.find("verify: pass") != std::string::npos);
}
