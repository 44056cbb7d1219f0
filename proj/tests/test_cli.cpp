// Contract tests for the command-line tool; the binary path comes from the
// STOCHORD_CLI environment variable set by CTest.

#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
};

RunResult run(const std::string& args) {
  const char* cli = std::getenv("STOCHORD_CLI");
  REQUIRE(cli != nullptr);
  const std::string cmd = std::string(cli) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult r;
  std::array<char, 4096> buffer;
  std::size_t got;
  while ((got = fread(buffer.data(), 1, buffer.size(), pipe)) > 0) r.out.append(buffer.data(), got);
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("stochord_cli_" + name);
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path);
  REQUIRE(out.good());
  out << content;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("fit and predict reproduce the two-singleton hand example") {
  const auto csv = temp_path("two.csv");
  const auto model = temp_path("two_model.json");
  write_file(csv, "x,y\n1,2\n2,0\n");

  const RunResult fit =
      run("fit --input " + csv.string() + " --order icv --output " + model.string());
  REQUIRE(fit.exit_code == 0);
  const std::string contents = read_file(model);
  CHECK(contents.find("\"order\": \"icv\"") != std::string::npos);

  CHECK(run("predict --model " + model.string() + " --x 1 --y 0").out == "0.5\n");
  CHECK(run("predict --model " + model.string() + " --x 1 --gamma 0.6").out == "2\n");
  // Clamping below the first design point.
  CHECK(run("predict --model " + model.string() + " --x 0.5 --y 0").out ==
        run("predict --model " + model.string() + " --x 1 --y 0").out);

  const RunResult bad_gamma = run("predict --model " + model.string() + " --x 1 --gamma 1.5");
  CHECK(bad_gamma.exit_code == 4);

  const RunResult no_model = run("predict --model /nonexistent.json --x 1 --y 0");
  CHECK(no_model.exit_code == 2);

  std::filesystem::remove(csv);
  std::filesystem::remove(model);
}

TEST_CASE("fit reports malformed rows with line numbers and writes nothing") {
  const auto csv = temp_path("bad.csv");
  const auto model = temp_path("bad_model.json");
  std::filesystem::remove(model);
  write_file(csv, "x,y\n1,2\na,b\n");
  const RunResult fit =
      run("fit --input " + csv.string() + " --order icv --output " + model.string());
  CHECK(fit.exit_code == 2);
  CHECK_FALSE(std::filesystem::exists(model));
  std::filesystem::remove(csv);
}

TEST_CASE("fit rejects an explicit grid violating the endpoint rule") {
  const auto csv = temp_path("grid.csv");
  const auto grid = temp_path("grid.txt");
  const auto model = temp_path("grid_model.json");
  std::filesystem::remove(model);
  write_file(csv, "x,y\n1,0\n2,3\n");
  write_file(grid, "0\n1\n2\n");  // does not end at y_m = 3
  const RunResult fit = run("fit --input " + csv.string() + " --grid file:" + grid.string() +
                            " --output " + model.string());
  CHECK(fit.exit_code == 3);
  CHECK_FALSE(std::filesystem::exists(model));
  std::filesystem::remove(csv);
  std::filesystem::remove(grid);
}

TEST_CASE("single-x dataset fits to its ECDF and evaluate runs") {
  const auto csv = temp_path("single.csv");
  const auto model = temp_path("single_model.json");
  write_file(csv, "x,y\n1,1\n1,2\n1,4\n");
  REQUIRE(run("fit --input " + csv.string() + " --order icv --output " + model.string())
              .exit_code == 0);
  CHECK(run("predict --model " + model.string() + " --x 1 --y 1.5").out == "0.333333333333\n");
  const RunResult eval = run("evaluate --model " + model.string() + " --setting gamma --x 1");
  CHECK(eval.exit_code == 0);
  CHECK(eval.out.rfind("x,metric,value", 0) == 0);
  CHECK(eval.out.find("l1") != std::string::npos);
  std::filesystem::remove(csv);
  std::filesystem::remove(model);
}

TEST_CASE("experiment runs a bundled config deterministically") {
  const char* config_dir = std::getenv("STOCHORD_CONFIG_DIR");
  REQUIRE(config_dir != nullptr);
  const std::string config = std::string(config_dir) + "/table1_gamma_k2_n30.json";
  const auto out_a = temp_path("rep_a");
  const auto out_b = temp_path("rep_b");

  const RunResult a =
      run("experiment --config " + config + " --out " + out_a.string() + " --reps-override 3");
  REQUIRE(a.exit_code == 0);
  const RunResult b =
      run("experiment --config " + config + " --out " + out_b.string() + " --reps-override 3");
  REQUIRE(b.exit_code == 0);
  CHECK(read_file(out_a.string() + ".csv") == read_file(out_b.string() + ".csv"));
  CHECK(a.out == b.out);
  // Table layout: K and X columns plus one column per metric.
  CHECK(a.out.find("K") != std::string::npos);
  CHECK(a.out.find("dq_0.9") != std::string::npos);

  const std::string csv = read_file(out_a.string() + ".csv");
  CHECK(csv.find("gamma,ksample,icv,1,") != std::string::npos);
  CHECK(csv.find("gamma,ksample,icv,4,") != std::string::npos);

  const RunResult bad = run("experiment --config /nonexistent.json --out " + out_a.string());
  CHECK(bad.exit_code == 2);

  for (const auto& base : {out_a, out_b}) {
    std::filesystem::remove(base.string() + ".json");
    std::filesystem::remove(base.string() + ".csv");
  }
}
