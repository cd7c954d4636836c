#include <sys/wait.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "hnabem/experiment.hpp"

namespace fs = std::filesystem;

namespace {

const std::string cli = HNABEM_CLI;
const fs::path configs = HNABEM_CONFIGS;
const fs::path work = fs::path(HNABEM_WORK_DIR) / "cli_out";

int run(const std::string& args) {
  const std::string cmd = cli + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(slurp(p));
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

std::vector<std::string> manifest_outputs(const fs::path& dir) {
  std::ifstream in(dir / "manifest.txt");
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("manifest.outputs = ", 0) != 0) continue;
    std::vector<std::string> out;
    std::istringstream ls(line.substr(19));
    std::string item;
    while (std::getline(ls, item, ',')) out.push_back(item.substr(item.find_first_not_of(' ')));
    return out;
  }
  return {};
}

// Runs a bundled config into its own directory and returns the wall time.
double run_bundled(const std::string& name) {
  const fs::path out = work / name;
  fs::remove_all(out);
  const auto t0 = std::chrono::steady_clock::now();
  const int code = run("run " + (configs / (name + ".cfg")).string() + " --out-dir " + out.string());
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  REQUIRE(code == 0);
  const auto outputs = manifest_outputs(out);
  CHECK(!outputs.empty());
  for (const auto& f : outputs) CHECK(fs::exists(out / f));
  return secs;
}

}  // namespace

TEST_CASE("bundled configs run at k <= 10 in under a minute") {
  for (const char* name : {"screen", "triangle", "interior", "grating", "flat_grating", "convergence", "greens"}) {
    INFO(name);
    const hnabem::ExperimentConfig c =
        hnabem::resolve_config(hnabem::ConfigFile::load((configs / (std::string(name) + ".cfg")).string()));
    for (double k : c.k) CHECK(k <= 10.0);
    CHECK(run_bundled(name) < 60.0);
  }
}

TEST_CASE("triangle run reproduces the tabulated error and conditioning") {
  if (!fs::exists(work / "triangle" / "convergence.csv")) run_bundled("triangle");
  const auto rows = read_csv(work / "triangle" / "convergence.csv");
  REQUIRE(rows.size() == 2);
  CHECK(rows[0][6] == "rel_err_L2");
  CHECK(rows[1][3] == "192");
  const double err = std::stod(rows[1][6]);
  CHECK(err >= 0.5 * 7.91e-2);
  CHECK(err <= 2.0 * 7.91e-2);
  const double cond = std::stod(rows[1][7]);
  CHECK(cond >= 53.6 / 10);
  CHECK(cond <= 53.6 * 10);
}

TEST_CASE("convergence sweep errors decay in p at each k") {
  if (!fs::exists(work / "convergence" / "convergence.csv")) run_bundled("convergence");
  const auto rows = read_csv(work / "convergence" / "convergence.csv");
  REQUIRE(rows.size() == 9);
  CHECK(rows[0] == std::vector<std::string>{"k", "p", "n", "N", "dof_per_wavelength", "rel_err_L1", "rel_err_L2",
                                            "cond", "assembly_s", "solve_s"});
  for (std::size_t i = 2; i < rows.size(); ++i) {
    if (rows[i][0] != rows[i - 1][0]) continue;
    CHECK(std::stod(rows[i][5]) < std::stod(rows[i - 1][5]));
    CHECK(std::stoi(rows[i][2]) == 2 * (std::stoi(rows[i][1]) + 1));
  }
}

TEST_CASE("a manifest re-runs to identical CSV files") {
  const fs::path a = work / "repro_a", b = work / "repro_b";
  fs::remove_all(a);
  fs::remove_all(b);
  REQUIRE(run("run " + (configs / "grating.cfg").string() + " --out-dir " + a.string() + " --k 2.2 --seed 5") == 0);
  REQUIRE(run("run " + (a / "manifest.txt").string() + " --out-dir " + b.string()) == 0);
  const auto outputs = manifest_outputs(a);
  CHECK(outputs == manifest_outputs(b));
  for (const auto& f : outputs) CHECK(slurp(a / f) == slurp(b / f));
  const std::string manifest = slurp(a / "manifest.txt");
  CHECK(manifest.find("incidence.k = 2.2000000000000002") != std::string::npos);
  CHECK(manifest.find("seed = 5") != std::string::npos);
  CHECK(manifest.find("manifest.version = hnabem") != std::string::npos);
}

TEST_CASE("exit codes") {
  const fs::path out = work / "bad_sigma";
  fs::remove_all(out);
  CHECK(run("run " + (configs / "screen.cfg").string() + " --sigma 1.5 --out-dir " + out.string()) == 2);
  CHECK_FALSE(fs::exists(out));

  const fs::path cfg = work / "ill_conditioned.cfg";
  fs::create_directories(work);
  std::ofstream(cfg) << "experiment = interior\nincidence.k = 2\ndiscretization.directions = 40\n";
  const fs::path out3 = work / "ill_conditioned";
  fs::remove_all(out3);
  CHECK(run("run " + cfg.string() + " --out-dir " + out3.string()) == 3);
  CHECK_FALSE(fs::exists(out3));

  CHECK(run("run /nonexistent.cfg") == 2);
  CHECK(run("run " + (configs / "screen.cfg").string() + " --bogus 1") == 2);
  CHECK(run("") == 2);
  CHECK(run("--help") == 0);
  CHECK(run("run --help") == 0);
  CHECK(run("--version") == 0);
  CHECK(run("run " + (configs / "screen.cfg").string() + " --set discretization.p") == 2);
  CHECK(run("run " + (configs / "screen.cfg").string() + " --method SS") == 2);
}
