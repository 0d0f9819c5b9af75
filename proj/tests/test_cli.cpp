#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

#include "json.hpp"

namespace {

namespace fs = std::filesystem;

struct RunResult {
  int code = -1;
  std::string output;
};

// Drives the installed binary through a shell, stderr folded into stdout.
RunResult run_cli(const std::string& args) {
  const std::string cmd = std::string(EFFORTPROP_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult result;
  char buffer[4096];
  std::size_t n = 0;
  while ((n = fread(buffer, 1, sizeof buffer, pipe)) > 0)
    result.output.append(buffer, n);
  const int status = pclose(pipe);
  if (WIFEXITED(status)) result.code = WEXITSTATUS(status);
  return result;
}

std::string project_path() {
  return std::string(EFFORTPROP_DATA_DIR) + "/high_school.json";
}

std::string write_temp(const std::string& name, const std::string& content) {
  const auto path = fs::temp_directory_path() / name;
  std::ofstream out(path);
  out << content;
  out.close();
  return path.string();
}

}  // namespace

TEST_CASE("cli compare output is byte-identical across runs") {
  const std::string args = "compare -p " + project_path() + " -f json";
  const auto first = run_cli(args);
  const auto second = run_cli(args);
  REQUIRE(first.code == 0);
  REQUIRE(second.code == 0);
  CHECK(first.output == second.output);
  const auto doc = nlohmann::json::parse(first.output);
  CHECK(doc["rows"].size() == 29);
}

TEST_CASE("cli compare filters strategies") {
  const auto one = run_cli("compare -p " + project_path() + " -s u-peap -f csv");
  REQUIRE(one.code == 0);
  CHECK(one.output.find("U-PEAP") != std::string::npos);
  CHECK(one.output.find("HEAP") == std::string::npos);

  const auto heap =
      run_cli("compare -p " + project_path() + " -s heap --path 2 -f json");
  REQUIRE(heap.code == 0);
  const auto doc = nlohmann::json::parse(heap.output);
  REQUIRE(doc["rows"].size() == 9);
  for (const auto& row : doc["rows"]) CHECK(row["path"] == 2);

  const auto bogus = run_cli("compare -p " + project_path() + " -s sideways");
  CHECK(bogus.code == 2);
}

TEST_CASE("cli evaluate renders one strategy") {
  const auto wpeap =
      run_cli("evaluate -p " + project_path() + " -s w-peap -f json");
  REQUIRE(wpeap.code == 0);
  const auto doc = nlohmann::json::parse(wpeap.output);
  CHECK(doc["strategy"]["label"] == "W-PEAP");
  CHECK(doc["efforts"].size() == 12);

  const auto heap = run_cli("evaluate -p " + project_path() +
                            " -s heap --block bsr --unit nsig --path 3 -f json");
  REQUIRE(heap.code == 0);
  const auto heap_doc = nlohmann::json::parse(heap.output);
  CHECK(heap_doc["strategy"]["path"] == 3);
  CHECK(heap_doc["strategy"]["block"] == "BSR");

  const auto csv = run_cli("evaluate -p " + project_path() + " -s u-peap -f csv");
  REQUIRE(csv.code == 0);
  CHECK(csv.output.rfind("quantity,factor,value\n", 0) == 0);
}

TEST_CASE("cli evaluate rejects a path index past the enumeration") {
  const auto result =
      run_cli("evaluate -p " + project_path() + " -s heap --path 4");
  CHECK(result.code == 1);
  CHECK(result.output.find("out of range") != std::string::npos);
}

TEST_CASE("cli distinguishes parse failures from validation failures") {
  const auto missing = run_cli("classify -p /nonexistent/nowhere.json");
  CHECK(missing.code == 2);
  CHECK(missing.output.find("cannot open") != std::string::npos);

  const auto garbled = write_temp("effortprop_garbled.json", "{ not json");
  CHECK(run_cli("classify -p " + garbled).code == 2);

  const auto invalid = write_temp(
      "effortprop_invalid.json",
      R"({"factors": [{"id": "A", "level": "I"},
                      {"id": "B", "level": "II", "accessible": false}],
          "nsig": {"A": 0.9, "B": 0.9},
          "ndim": [[0, 0.5], [0, 0]]})");
  const auto bad = run_cli("classify -p " + invalid);
  CHECK(bad.code == 1);
  CHECK(bad.output.find("invalid project") != std::string::npos);
}

TEST_CASE("cli classify and paths render the structural views") {
  const auto cls = run_cli("classify -p " + project_path() + " -f json");
  REQUIRE(cls.code == 0);
  const auto doc = nlohmann::json::parse(cls.output);
  CHECK(doc["daf"].size() == 12);
  CHECK(doc["ndaf"].size() == 3);

  const auto paths = run_cli("paths -p " + project_path() + " -f csv");
  REQUIRE(paths.code == 0);
  CHECK(paths.output.rfind("path,block,effective,members\n", 0) == 0);
  int lines = 0;
  for (char c : paths.output) lines += c == '\n';
  CHECK(lines == 1 + 3 * 9);
}

TEST_CASE("cli matrix subcommands accept raw csv input") {
  const auto square = write_temp("effortprop_square.csv", "0,0.2\n0.1,0\n");
  const auto trm = run_cli("trm -m " + square + " -f json");
  REQUIRE(trm.code == 0);
  const auto doc = nlohmann::json::parse(trm.output);
  CHECK(doc.contains("tau"));
  CHECK(doc["trm"].size() == 2);

  const auto normalized = run_cli("normalize -m " + square + " -f json");
  REQUIRE(normalized.code == 0);
  const auto ndoc = nlohmann::json::parse(normalized.output);
  CHECK(ndoc["factors"] == nlohmann::json({"1", "2"}));

  const auto rect = write_temp("effortprop_rect.csv", "0,0.2,0.3\n0.1,0,0\n");
  CHECK(run_cli("trm -m " + rect).code == 1);  // closure needs a square matrix

  CHECK(run_cli("normalize -m " + square + " -p " + project_path()).code == 2);
  CHECK(run_cli("normalize").code == 2);
}

TEST_CASE("cli argument errors exit with the usage code") {
  CHECK(run_cli("").code == 2);
  CHECK(run_cli("classify --frobnicate").code == 2);
  CHECK(run_cli("evaluate -p " + project_path()).code == 2);  // no strategy
  CHECK(run_cli("--help").code == 0);
}

TEST_CASE("cli verify runs the randomized self-checks") {
  const auto result = run_cli("verify --cases 25 --seed 7");
  REQUIRE(result.code == 0);
  CHECK(result.output.find("[PASS]") != std::string::npos);
  CHECK(result.output.find("all checks passed") != std::string::npos);
}

TEST_CASE("cli --out writes the report to a file instead of stdout") {
  const auto target = (fs::temp_directory_path() / "effortprop_out.json").string();
  std::error_code ec;
  fs::remove(target, ec);
  const auto result =
      run_cli("classify -p " + project_path() + " -f json -o " + target);
  REQUIRE(result.code == 0);
  CHECK(result.output.empty());
  std::ifstream in(target);
  REQUIRE(in.good());
  nlohmann::json doc;
  in >> doc;
  CHECK(doc["daf"].size() == 12);
}
