#include <doctest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <string>

#include <json.hpp>

using nlohmann::json;

namespace {

struct CliResult {
  int exit_code = -1;
  std::string out;
};

CliResult run_cli(const std::string& args) {
  std::string cmd = std::string(POPSIM_CLI_PATH) + " " + args + " 2>/dev/null";
  std::array<char, 4096> buf{};
  CliResult res;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  while (std::size_t got = fread(buf.data(), 1, buf.size(), pipe)) res.out.append(buf.data(), got);
  int status = pclose(pipe);
  res.exit_code = WEXITSTATUS(status);
  return res;
}

}  // namespace

TEST_CASE("run emits a full summary and is deterministic") {
  const std::string args = "run --protocol masked --n 12 --k 3 --r 1 --seed 99";
  auto a = run_cli(args);
  auto b = run_cli(args);
  CHECK(a.exit_code == 0);
  CHECK(a.out == b.out);
  json j = json::parse(a.out);
  CHECK(j["version"] == "0.1.0");
  CHECK(j["config"]["seed"] == 99);
  CHECK(j["converged"] == true);
  CHECK(j["agree"] == true);
  CHECK(j.contains("parallel_time"));
  CHECK(j.contains("ground_truth"));
}

TEST_CASE("run with a zero budget reports unconverged") {
  auto res = run_cli("run --protocol masked --n 8 --k 2 --seed 5 --budget 0");
  CHECK(res.exit_code == 0);
  json j = json::parse(res.out);
  CHECK(j["converged"] == false);
  CHECK(j["steps"] == 0);
  CHECK(j["output"].is_null());
}

TEST_CASE("unknown protocol is a usage error") {
  auto res = run_cli("run --protocol bogus --n 8 --seed 1");
  CHECK(res.exit_code == 1);
}

TEST_CASE("unknown attack is a usage error") {
  auto res = run_cli("privacy --attack nonsense --n 8 --seed 1");
  CHECK(res.exit_code == 1);
}

TEST_CASE("missing seed is a usage error") {
  auto res = run_cli("run --protocol masked --n 8");
  CHECK(res.exit_code == 1);
}

TEST_CASE("freshness attack reports both estimates") {
  auto res = run_cli("privacy --attack freshness --n 10 --trials 20000 --seed 4");
  CHECK(res.exit_code == 0);
  json j = json::parse(res.out);
  CHECK(j["closed_form"] == doctest::Approx(9.0 / 17.0));
  CHECK(std::abs(j["monte_carlo"].get<double>() - 9.0 / 17.0) < 0.02);
}

TEST_CASE("convergence csv has one row per n and no fit for a single n") {
  auto res = run_cli("convergence --protocol masked --n 8 --k 3 --trials 30 --seed 6 "
                     "--format csv");
  CHECK(res.exit_code == 0);
  CHECK(res.out.find("n,trials,unconverged,median_steps") != std::string::npos);
  CHECK(res.out.find("# fit alpha") == std::string::npos);
  int rows = 0;
  for (char c : res.out)
    if (c == '\n') ++rows;
  CHECK(rows == 2);  // header + one data row
}

TEST_CASE("trace export writes one record per line") {
  std::string trace = std::string(std::getenv("TMPDIR") ? std::getenv("TMPDIR") : "/tmp") +
                      "/popsim_trace_test.jsonl";
  auto res = run_cli("run --protocol plain --n 6 --k 2 --seed 3 --budget 25 --trace-out " +
                     trace);
  CHECK(res.exit_code == 0);
  FILE* f = fopen(trace.c_str(), "r");
  REQUIRE(f != nullptr);
  char line[256];
  int lines = 0;
  while (fgets(line, sizeof line, f)) {
    json j = json::parse(line);
    CHECK(j["step"] == lines + 1);
    CHECK(j["i"] != j["j"]);
    ++lines;
  }
  fclose(f);
  CHECK(lines == 25);
  std::remove(trace.c_str());
}

TEST_CASE("p2p-test reports delivery and uniformity") {
  auto res = run_cli("p2p-test --n 12 --k 4 --trials 2000 --seed 8");
  CHECK(res.exit_code == 0);
  json j = json::parse(res.out);
  CHECK(j["delivery_rate"] == doctest::Approx(1.0));
  CHECK(j["handoff_mask"]["p_value"].get<double>() > 0.001);
}

TEST_CASE("p2p uniformity attack reports no evidence") {
  auto res = run_cli("privacy --attack p2p-uniformity --n 12 --k 4 --trials 2000 --seed 21");
  CHECK(res.exit_code == 0);
  json j = json::parse(res.out);
  CHECK(j["report"]["verdict"] == "no-evidence");
  CHECK(j["report"]["delivery_rate"] == doctest::Approx(1.0));
}

TEST_CASE("view-distribution histograms export as feature,count csv") {
  std::string base = std::string(std::getenv("TMPDIR") ? std::getenv("TMPDIR") : "/tmp") +
                     "/popsim_hist_test.csv";
  auto res = run_cli("privacy --attack view-distribution --protocol plain --n 8 --k 4 "
                     "--trials 500 --seed 22 --format csv --out " + base);
  CHECK(res.exit_code == 0);
  for (const std::string& path : {base, base + ".arm2"}) {
    FILE* f = fopen(path.c_str(), "r");
    REQUIRE(f != nullptr);
    char line[512];
    REQUIRE(fgets(line, sizeof line, f) != nullptr);
    CHECK(std::string(line) == "feature,count\n");
    std::uint64_t total = 0;
    while (fgets(line, sizeof line, f)) {
      std::string row(line);
      auto comma = row.rfind(',');
      REQUIRE(comma != std::string::npos);
      total += std::stoull(row.substr(comma + 1));
    }
    fclose(f);
    CHECK(total == 500);
    std::remove(path.c_str());
  }
}

TEST_CASE("probe-bench sweeps the round length factor") {
  auto res = run_cli("probe-bench --n 16 --d 0.5,8 --trials 200 --seed 9");
  CHECK(res.exit_code == 0);
  json j = json::parse(res.out);
  REQUIRE(j["points"].size() == 2);
  CHECK(j["points"][1]["accuracy"].get<double>() >= j["points"][0]["accuracy"].get<double>());
}
