#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "specband/cli.hpp"

using namespace specband;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("specband_cli_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int tool(const std::string& args) {
  const std::string cmd = std::string(SPECBAND_TOOL) + " " + args + " > /dev/null 2>&1";
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string config_path(const std::string& name) { return std::string(SPECBAND_CONFIG_DIR) + "/" + name; }

RunConfig small_reference() {
  RunConfig c = load_config(config_path("reference.yaml"));
  c.experiment.Ns = {4};
  c.experiment.samples = 20;
  c.experiment.ld_K = {1, 2};
  c.experiment.ld_samples = 2000;
  return c;
}

}  // namespace

TEST_CASE("check-assumptions on the potential config") {
  const auto out = scratch("assume");
  const auto art = cli::run("check-assumptions", load_config(config_path("potential.yaml")), out, 1);
  const auto j = nlohmann::json::parse(slurp(out / "assumptions.json"));
  CHECK(j["c0"].get<double>() > 0);
  CHECK(j["a1_ok"].get<bool>());
  CHECK(j.contains("lambda0"));
  CHECK(j.contains("sufficient_ok"));
  CHECK(j.contains("diagnostics"));
  CHECK(j["schema_version"] == cli::kSchemaVersion);

  const auto m = nlohmann::json::parse(slurp(out / "manifest.json"));
  CHECK(m["subcommand"] == "check-assumptions");
  CHECK(m["derived"]["c0"].get<double>() == j["c0"].get<double>());
  // the manifest echoes a config that parses back to the one that ran
  CHECK(parse_config(m["config_yaml"].get<std::string>()) == load_config(config_path("potential.yaml")));
  for (const auto& f : m["files"]) CHECK(fs::file_size(out / f["name"].get<std::string>()) == f["bytes"].get<std::uintmax_t>());
}

TEST_CASE("sweep with zero coupling") {
  const auto out = scratch("sweep0");
  RunConfig c = small_reference();
  c.experiment.epsilons = {0.0};
  c.experiment.samples = 5;
  cli::run("sweep", c, out, 2);
  std::ifstream in(out / "sweep.csv");
  std::string line;
  std::getline(in, line);
  const auto header = line;
  CHECK(header.find("gap") != std::string::npos);
  int rows = 0;
  int gap_col = 0;
  {
    std::stringstream hs(header);
    std::string h;
    for (int i = 0; std::getline(hs, h, ','); ++i)
      if (h == "gap") gap_col = i;
  }
  while (std::getline(in, line)) {
    std::stringstream ls(line);
    std::string cell;
    for (int i = 0; i <= gap_col; ++i) std::getline(ls, cell, ',');
    CHECK(std::abs(std::stod(cell)) < 1e-10);
    ++rows;
  }
  CHECK(rows == 5);
}

TEST_CASE("montecarlo output is reproducible") {
  const auto a = scratch("mc_a"), b = scratch("mc_b");
  const RunConfig c = small_reference();
  const auto cfg = a.parent_path() / "mc.yaml";
  cli::write_atomic(cfg, emit_config(c));
  REQUIRE(tool("montecarlo --config " + cfg.string() + " --workers 1 --out " + a.string()) == 0);
  REQUIRE(tool("montecarlo --config " + cfg.string() + " --workers 3 --out " + b.string()) == 0);
  CHECK(slurp(a / "montecarlo.csv") == slurp(b / "montecarlo.csv"));
  CHECK(slurp(a / "large_deviation.csv") == slurp(b / "large_deviation.csv"));
  CHECK(!slurp(a / "montecarlo.csv").empty());

  const auto s = scratch("mc_seed");
  REQUIRE(tool("montecarlo --config " + cfg.string() + " --seed 5 --out " + s.string()) == 0);
  CHECK(nlohmann::json::parse(slurp(s / "manifest.json"))["seed"] == 5);
  CHECK(slurp(s / "montecarlo.csv") != slurp(a / "montecarlo.csv"));
}

TEST_CASE("exit codes") {
  const auto dir = scratch("codes");
  std::ofstream(dir / "unknown.yaml") << "geometry: {N: 2, colour: red}\n";
  std::ofstream(dir / "broken.yaml") << "family: {kind: potential, v1: \"cos(\"}\n";
  std::ofstream(dir / "afile") << "x";
  CHECK(tool("eigen --config " + (dir / "unknown.yaml").string()) == cli::kExitConfig);
  CHECK(tool("check-assumptions --config " + (dir / "broken.yaml").string() + " --out " + (dir / "o").string()) ==
        cli::kExitConfig);
  CHECK(tool("eigen --config " + (dir / "missing.yaml").string()) == cli::kExitConfig);
  CHECK(tool("eigen") == cli::kExitConfig);
  CHECK(tool("frobnicate") == cli::kExitConfig);
  CHECK(tool("check-assumptions --config " + config_path("potential.yaml") + " --out " + (dir / "afile" / "sub").string()) ==
        cli::kExitIo);
}

TEST_CASE("atomic writes") {
  const auto dir = scratch("atomic");
  cli::write_atomic(dir / "a.txt", "first");
  cli::write_atomic(dir / "a.txt", "second");
  CHECK(slurp(dir / "a.txt") == "second");
  int entries = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++entries;
  CHECK(entries == 1);
  CHECK_THROWS_AS(cli::write_atomic(dir / "missing" / "a.txt", "x"), cli::IoError);
}

TEST_CASE("subcommand list") {
  const std::vector<std::string> want{"check-assumptions", "eigen", "sweep", "green-decay", "montecarlo", "ils", "verify"};
  CHECK(cli::subcommands() == want);
}
