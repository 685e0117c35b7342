#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "awb/cli.hpp"
#include "awb/model_file.hpp"
#include "awb/report.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace awb;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string model(const std::string& file) { return std::string(AWB_SOURCE_DIR) + "/models/" + file; }

std::filesystem::path scratch() {
  auto dir = std::filesystem::temp_directory_path() / "awb_cli_test";
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("cli check: misa and bfs on the three-philosopher ring") {
  const auto misa = run({"check", model("philosophers3.awb"), "--system", "phil3", "--algo", "misa", "--mode", "atomic"});
  REQUIRE(misa.code == 0);
  const auto j = json::parse(misa.out);
  CHECK(j["explored"] == 20);
  CHECK(j["reachable"].is_null());
  CHECK(j["algorithm"] == "misa");
  REQUIRE(j["deadlocks"].size() == 1);
  CHECK(j["deadlocks"][0]["p2"] == "1");
  CHECK(j["deadlocks"][0]["f3"] == "r");

  const auto bfs = run({"check", model("philosophers3.awb"), "--system", "phil3"});
  REQUIRE(bfs.code == 0);
  CHECK(json::parse(bfs.out)["reachable"] == 26);
  CHECK(json::parse(bfs.out)["explored"] == 26);
}

TEST_CASE("cli check: stable output is byte-identical and the json file matches stdout") {
  const auto path = (scratch() / "r.json").string();
  const std::vector<std::string> args{"check", model("philosophers3.awb"), "--system", "phil3_nondet", "--algo", "misa",
                                      "--witness", "--stable", "--json", path};
  const auto a = run(args), b = run(args);
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(slurp(path) == a.out);
  CHECK(json::parse(a.out)["elapsed_ms"] == 0);
  CHECK(json::parse(a.out)["witnesses"].size() == 8);
  CHECK(report_deadlocks(a.out).size() == 8);
}

TEST_CASE("cli check: product analysis") {
  const auto dir = scratch();
  {
    std::ofstream f(dir / "prod.awb");
    f << "actionset L { lock unlock }\n"
         "automaton P : (L ; L) { states 0 1 init 0 motion 0 -> 1 [lock, tau] }\n"
         "system two = a:P * b:P\n";
  }
  const auto r = run({"check", (dir / "prod.awb").string(), "--system", "two", "--algo", "product"});
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  CHECK(j["algorithm"] == "product-analysis");
  CHECK(j["deadlocks"].size() == 1);
  CHECK(run({"check", model("philosophers3.awb"), "--system", "phil3", "--algo", "product"}).code == 1);
}

TEST_CASE("cli exit codes") {
  CHECK(run({"check", "/nonexistent.awb", "--system", "x"}).code == 1);
  CHECK(run({"check", model("philosophers3.awb"), "--system", "nosuch"}).code == 1);
  CHECK(run({"check", model("philosophers3.awb"), "--system", "phil3", "--algo", "dfs"}).code == 1);
  CHECK(run({"bogus"}).code == 1);
  const auto capped = run({"check", model("scheduler3.awb"), "--system", "sched3", "--max-states", "10"});
  CHECK(capped.code == 2);
  CHECK(json::parse(capped.out)["complete"] == false);
  CHECK_FALSE(capped.err.empty());
}

TEST_CASE("cli honours AWB_MAX_STATES") {
  setenv("AWB_MAX_STATES", "5", 1);
  const auto r = run({"check", model("philosophers3.awb"), "--system", "phil3"});
  const auto explicit_cap = run({"check", model("philosophers3.awb"), "--system", "phil3", "--max-states", "0"});
  unsetenv("AWB_MAX_STATES");
  CHECK(r.code == 2);
  CHECK(explicit_cap.code == 0);
}

TEST_CASE("cli sim-verify") {
  const auto ok = run({"sim-verify", model("philosophers3.awb"), "--sim", "p_prime_to_p"});
  REQUIRE(ok.code == 0);
  CHECK(json::parse(ok.out)["verified"] == true);
  CHECK(json::parse(ok.out)["liftings"] == 14);
  const auto bad = run({"sim-verify", model("philosophers3.awb"), "--sim", "p_dprime_to_p_prime"});
  REQUIRE(bad.code == 0);
  const auto j = json::parse(bad.out);
  CHECK(j["verified"] == false);
  CHECK(j["counterexample"]["state"] == "0");
  CHECK(run({"sim-verify", model("philosophers3.awb"), "--sim", "nosuch"}).code == 1);
}

TEST_CASE("cli sim-preimage over a bfs report") {
  const auto report = (scratch() / "phil3.json").string();
  REQUIRE(run({"check", model("philosophers3.awb"), "--system", "phil3", "--json", report}).code == 0);
  const auto r = run({"sim-preimage", model("philosophers3.awb"), "--sim", "p_tilde", "--target-report", report,
                      "--stable"});
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  CHECK(j["algorithm"] == "preimage");
  CHECK(j["deadlocks"].size() == 8);
}

TEST_CASE("cli lang-equiv, eval, stats, zoo and export") {
  const auto eq = run({"lang-equiv", model("protocol2.awb"), "--left", "ack_cap1_m2", "--right", "MP_M"});
  REQUIRE(eq.code == 0);
  CHECK(json::parse(eq.out)["equivalent"] == true);
  const auto ne = run({"lang-equiv", model("philosophers3.awb"), "--left", "P", "--right", "Q"});
  CHECK(json::parse(ne.out)["equivalent"] == false);
  const auto one = run({"lang-equiv", model("philosophers3.awb"), "--left", "P", "--right", "Q", "--boundaries", "0"});
  CHECK(json::parse(one.out)["equivalent"] == true);

  const auto out = (scratch() / "phil3_eval.awb").string();
  const auto ev = run({"eval", model("philosophers3.awb"), "--system", "phil3", "--reachable-only", "--out", out});
  REQUIRE(ev.code == 0);
  const auto back = load_model(out);
  REQUIRE(back.find_automaton("phil3"));
  CHECK(back.find_automaton("phil3")->num_states() == 26);

  const auto st = run({"stats", model("philosophers3.awb"), "--system", "phil3"});
  REQUIRE(st.code == 0);
  CHECK(json::parse(st.out)["global_states"] == 1728);
  CHECK(json::parse(st.out)["wires"] == 6);

  const auto z = run({"zoo"});
  CHECK(z.code == 0);
  CHECK(z.out.find("FAIL") == std::string::npos);

  const auto dir = scratch() / "export";
  REQUIRE(run({"export-models", dir.string()}).code == 0);
  for (const char* f : {"philosophers3.awb", "philosophers5.awb", "scheduler3.awb", "protocol1.awb", "protocol2.awb"})
    CHECK(slurp(dir / f) == slurp(model(f)));
}
