#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "nsdt/io.hpp"
#include "test_util.hpp"

#ifndef NSDT_CLI_PATH
#error "NSDT_CLI_PATH must point at the built CLI"
#endif

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

struct CliResult {
  int exit_code;
  std::string out;
};

CliResult run_cli(const std::string& args) {
  fs::path tmp = fs::temp_directory_path() / "nsdt_cli_out.txt";
  std::string cmd = std::string(NSDT_CLI_PATH) + " " + args + " > " + tmp.string() + " 2>&1";
  int rc = std::system(cmd.c_str());
  std::ifstream in(tmp);
  std::ostringstream buf;
  buf << in.rdbuf();
  return {WEXITSTATUS(rc), buf.str()};
}

fs::path write_spec(const std::string& name, const nsdt::ScalarField& p,
                    const nsdt::ScalarField& q, const nsdt::ScalarField& r) {
  nsdt::MetricSpec spec;
  spec.name = name;
  spec.metric = nsdt::NeutralMetric::special_form(p, q, r);
  fs::path path = fs::temp_directory_path() / (name + ".json");
  nsdt::save_metric_spec(spec, path.string());
  return path;
}

}  // namespace

TEST_CASE("check: flat metric passes the full suite with exit 0") {
  auto path = write_spec("cli_flat", nsdt::ScalarField::zero(), nsdt::ScalarField::zero(),
                         nsdt::ScalarField::zero());
  auto res = run_cli("check " + path.string());
  CHECK(res.exit_code == 0);
  CHECK(res.out.find("sd: pass") != std::string::npos);
  CHECK(res.out.find("fail") == std::string::npos);
}

TEST_CASE("check: worked example is self-dual but not basic, exit 1") {
  nsdt::testutil::WorkedExample ex;
  auto path = write_spec("cli_worked", ex.p, ex.q, ex.r);
  auto res = run_cli("check " + path.string() + " --report json --no-timings");
  CHECK(res.exit_code == 1);
  Json rep = Json::parse(res.out);
  CHECK(rep["checks"]["sd"]["status"] == "pass");
  CHECK(rep["checks"]["sd_weyl"]["status"] == "pass");
  CHECK(rep["checks"]["integrable"]["status"] == "pass");
  CHECK(rep["checks"]["basic"]["status"] == "fail");
}

TEST_CASE("check: malformed JSON exits 2") {
  fs::path path = fs::temp_directory_path() / "cli_broken.json";
  std::ofstream(path) << "{ not json";
  auto res = run_cli("check " + path.string());
  CHECK(res.exit_code == 2);
}

TEST_CASE("trace: missing --init exits 2") {
  auto res = run_cli("trace --metric std-s2xs2");
  CHECK(res.exit_code == 2);
}

TEST_CASE("check: json reports without timings are byte-identical across runs") {
  nsdt::testutil::WorkedExample ex;
  auto path = write_spec("cli_det", ex.p, ex.q, ex.r);
  std::string args = "check " + path.string() + " --report json --no-timings";
  auto a = run_cli(args);
  auto b = run_cli(args);
  CHECK(a.out == b.out);
  CHECK(a.exit_code == b.exit_code);
}

TEST_CASE("generate: emitted specs reload and pass their own SD check") {
  fs::path dir = fs::temp_directory_path() / "cli_gen";
  fs::remove_all(dir);
  auto gen = run_cli("generate --fiber-degree 2 --base-degree 1 --seed 5 --count 3 --out " +
                     dir.string());
  CHECK(gen.exit_code == 0);
  int checked = 0;
  for (const auto& entry : fs::directory_iterator(dir)) {
    auto res = run_cli("check " + entry.path().string() + " --report json --no-timings");
    Json rep = Json::parse(res.out);
    CHECK(rep["checks"]["sd"]["status"] == "pass");
    CHECK(rep["checks"]["sd_weyl"]["status"] == "pass");
    ++checked;
  }
  CHECK(checked == 3);
}

TEST_CASE("trace: null geodesic on the sphere product closes near 2 pi") {
  auto res = run_cli(
      "trace --metric std-s2xs2 --init 1.5707963267948966 0 1.5707963267948966 0 1 0 1 0");
  CHECK(res.exit_code == 0);
  CHECK(res.out.find("closed, period ~ 6.2832") != std::string::npos);
}

TEST_CASE("trace: flat null line stays open") {
  auto path = write_spec("cli_flat_trace", nsdt::ScalarField::zero(), nsdt::ScalarField::zero(),
                         nsdt::ScalarField::zero());
  auto res = run_cli("trace --metric " + path.string() +
                     " --init 0 0 0 0 1 0 1 0 --steps 2000 --step-size 0.01");
  CHECK(res.exit_code == 0);
  CHECK(res.out.find("open") != std::string::npos);
}

TEST_CASE("classify: fiber plane of a special-form metric is alpha") {
  nsdt::testutil::WorkedExample ex;
  auto path = write_spec("cli_classify", ex.p, ex.q, ex.r);
  auto res = run_cli("classify --metric " + path.string() +
                     " --point 1 1 1 1 --v 0 0 1 0 --w 0 0 0 1");
  CHECK(res.exit_code == 0);
  CHECK(res.out.find("Alpha") != std::string::npos);
}
