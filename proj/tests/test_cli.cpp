#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>

using json = nlohmann::ordered_json;

namespace {

struct RunResult {
  int code = -1;
  std::string out, err;
};

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

RunResult run_cli(const std::string& args, const std::string& env = "") {
  static int counter = 0;
  ++counter;
  const std::string out_path =
      temp_path("qforma_cli_out_" + std::to_string(counter));
  const std::string err_path =
      temp_path("qforma_cli_err_" + std::to_string(counter));
  const std::string cmd = env + (env.empty() ? "" : " ") + QFORMA_CLI_PATH +
                          " " + args + " >" + out_path + " 2>" + err_path;
  const int rc = std::system(cmd.c_str());
  RunResult res;
  if (rc != -1 && WIFEXITED(rc)) res.code = WEXITSTATUS(rc);
  res.out = slurp(out_path);
  res.err = slurp(err_path);
  std::filesystem::remove(out_path);
  std::filesystem::remove(err_path);
  return res;
}

}  // namespace

TEST_CASE("bound on the identity") {
  const RunResult r = run_cli(
      "bound --gen identity --p 2 --q 4 --dist rademacher --method theorem1");
  REQUIRE(r.code == 0);
  const json rep = json::parse(r.out);
  CHECK(rep["method"] == "theorem1");
  CHECK(rep["terms"]["T1"] == 4.0);
  CHECK(rep["terms"]["T2"] == 0.0);
  CHECK(rep["terms"]["T3"] == 0.0);
  CHECK(rep["terms"]["T4"] == 2.0);
  CHECK(rep["structural_total"] == 6.0);
  CHECK(rep["cq"] == 1.0);
  CHECK(rep["log_scale"] == false);
}

TEST_CASE("bound on the zero matrix") {
  const RunResult r =
      run_cli("bound --gen zero --p 5 --q 3 --method theorem1");
  REQUIRE(r.code == 0);
  CHECK(json::parse(r.out)["structural_total"] == 0.0);
}

TEST_CASE("table format") {
  const RunResult r = run_cli(
      "bound --gen identity --p 2 --q 4 --dist rademacher --method theorem1 "
      "--format table");
  REQUIRE(r.code == 0);
  CHECK(r.out.find("structural_total  6\n") != std::string::npos);
  CHECK(r.out.find("log_scale         false\n") != std::string::npos);
  CHECK(r.out.find("method            theorem1\n") != std::string::npos);
}

TEST_CASE("exit codes") {
  // Malformed matrix file: bad input, exit 2.
  const std::string bad = temp_path("qforma_bad_matrix.csv");
  write_text(bad, "2\n1,0\n");
  CHECK(run_cli("bound --matrix " + bad + " --q 4").code == 2);
  std::filesystem::remove(bad);

  // Domain violation (q <= 2): exit 3.
  CHECK(run_cli("bound --gen identity --p 2 --q 2 --method theorem1").code ==
        3);
  // Infeasible sparse budget: exit 3.
  CHECK(run_cli("bound --gen sparse --p 4 --r 0.5 --mp 0.5 --c0 1 --q 4")
            .code == 3);
  // Unknown flag / subcommand / missing subcommand: exit 2.
  CHECK(run_cli("bound --nonsense 3").code == 2);
  CHECK(run_cli("frobnicate").code == 2);
  CHECK(run_cli("").code == 2);
  // Unknown generator or method names: exit 2.
  CHECK(run_cli("bound --gen hadamard --p 4 --q 4").code == 2);
  CHECK(run_cli("bound --gen identity --p 2 --q 4 --method magic").code == 2);
  // Help exits 0.
  CHECK(run_cli("--help").code == 0);
}

TEST_CASE("byte-identical reruns") {
  const std::string cmd =
      "verify --gen identity --p 4 --dist rademacher --q 4 --samples 64 "
      "--seed 5";
  const RunResult a = run_cli(cmd);
  const RunResult b = run_cli(cmd);
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  const json rep = json::parse(a.out);
  CHECK(rep["empirical"]["estimate"] == 0.0);
  CHECK(rep["oracle"] == 0.0);
  CHECK(rep["oracle_within_5se"] == true);
  CHECK(rep["pass"] == true);
  for (const auto& chk : rep["markov"]) CHECK(chk["holds"] == true);
}

TEST_CASE("config file with flag override") {
  const std::string cfg = temp_path("qforma_cfg.txt");
  write_text(cfg, "p=8\nq=4\ndist=rademacher\nmethod=theorem1\n");
  const RunResult base = run_cli("bound --gen identity --config " + cfg);
  REQUIRE(base.code == 0);
  CHECK(json::parse(base.out)["structural_total"] == 72.0);  // 64 + 8

  const RunResult over =
      run_cli("bound --gen identity --config " + cfg + " --p 2");
  REQUIRE(over.code == 0);
  CHECK(json::parse(over.out)["structural_total"] == 6.0);

  write_text(cfg, "p=8\nbogus_key=1\n");
  CHECK(run_cli("bound --gen identity --config " + cfg + " --q 4").code == 2);
  std::filesystem::remove(cfg);
}

TEST_CASE("seed from the environment") {
  const std::string cmd =
      "percentile --gen identity --p 1 --n 5 --alpha 0.5 --samples 500";
  const RunResult flagged = run_cli(cmd + " --seed 9");
  const RunResult env = run_cli(cmd, "QFORMA_SEED=9");
  const RunResult other = run_cli(cmd, "QFORMA_SEED=10");
  REQUIRE(flagged.code == 0);
  REQUIRE(env.code == 0);
  CHECK(flagged.out == env.out);
  CHECK(env.out != other.out);
  const json rep = json::parse(env.out);
  CHECK(rep["seed"] == 9);
  CHECK(rep["n_draws"] == 500);
  CHECK(rep.contains("critical_value"));
}

TEST_CASE("defaults subcommand") {
  const RunResult flat = run_cli("defaults");
  REQUIRE(flat.code == 0);
  CHECK(flat.out.find("alpha=0.05\n") != std::string::npos);
  CHECK(flat.out.find("samples=200000\n") != std::string::npos);
  CHECK(flat.out.find("dist=gaussian\n") != std::string::npos);
  const RunResult js = run_cli("defaults --format json");
  REQUIRE(js.code == 0);
  const json rep = json::parse(js.out);
  CHECK(rep["alpha"] == "0.05");
  CHECK(rep["seed"] == "0");
}

TEST_CASE("simulate then test round-trip") {
  const std::string id2 = temp_path("qforma_id2.csv");
  write_text(id2, "2\n1,0\n0,1\n");
  const std::string data = temp_path("qforma_sim.csv");

  const RunResult sim = run_cli("simulate --gen identity --p 2 --n 6 --dist "
                                "gaussian --seed 4 --out " +
                                data);
  REQUIRE(sim.code == 0);
  const std::string text = slurp(data);
  CHECK(text.rfind("6 2\n", 0) == 0);

  // A = B: L* = 0, accept, exit 0.
  const RunResult acc =
      run_cli("test --matrix-a " + id2 + " --matrix-b " + id2 +
              " --structure block --m 2 --k 1 --data " + data);
  REQUIRE(acc.code == 0);
  const json rep = json::parse(acc.out);
  CHECK(rep["l_star"] == 0.0);
  CHECK(rep["reject"] == false);
  CHECK(rep["method"] == "gaussian_mc_percentile");
  CHECK(rep["alpha"] == 0.05);

  // Dimension mismatch between data and hypotheses: exit 2.
  const std::string wide = temp_path("qforma_wide.csv");
  write_text(wide, "1 3\n1,2,3\n");
  CHECK(run_cli("test --matrix-a " + id2 + " --matrix-b " + id2 +
                " --structure block --m 2 --k 1 --data " + wide)
            .code == 2);
  std::filesystem::remove(wide);
  std::filesystem::remove(id2);
  std::filesystem::remove(data);
}

TEST_CASE("test rejects under the alternative") {
  const RunResult rej = run_cli(
      "test --pair block --m 2 --k 2 --under h1 --n 500 --dist gaussian "
      "--seed 3 --samples 20000");
  REQUIRE(rej.code == 1);
  const json rep = json::parse(rej.out);
  CHECK(rep["reject"] == true);
  CHECK(rep["l_star"].get<double>() > rep["critical_value"].get<double>());
}

TEST_CASE("compare-scaling report") {
  const RunResult js = run_cli(
      "compare-scaling --family identity --p 2 --p 4 --q 4 --dist unit "
      "--format json");
  REQUIRE(js.code == 0);
  const json rep = json::parse(js.out);
  CHECK(rep["family"] == "identity");
  REQUIRE(rep["rows"].size() == 2);
  CHECK(rep["rows"][0]["p"] == 2);
  CHECK(rep["rows"][0]["ratio"] == 1.0);
  CHECK(rep["rows"][1]["ratio"] == 1.0);
  CHECK(rep["ratio_decreasing"] == false);

  const RunResult tab =
      run_cli("compare-scaling --family block --p 16 --p 64 --q 4 --dist unit");
  REQUIRE(tab.code == 0);
  CHECK(tab.out.find("ratio_decreasing") != std::string::npos);
  CHECK(tab.out.find("yes") != std::string::npos);

  CHECK(run_cli("compare-scaling --family block --p 15").code == 3);
  CHECK(run_cli("compare-scaling --family identity --p 100000").code == 3);
}

TEST_CASE("output redirection") {
  const std::string out = temp_path("qforma_bound_out.json");
  const RunResult r = run_cli(
      "bound --gen identity --p 2 --q 4 --dist rademacher --method theorem1 "
      "--out " +
      out);
  REQUIRE(r.code == 0);
  CHECK(r.out.empty());
  CHECK(json::parse(slurp(out))["structural_total"] == 6.0);
  std::filesystem::remove(out);
}
