#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hnabem/experiment.hpp"

namespace {

enum ExitCode { Success = 0, Failure = 1, BadConfig = 2, NumericalFailure = 3 };

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Helmholtz scattering experiments: HNA boundary elements and unified-transform solvers"};
  app.set_version_flag("--version", hnabem::version_string());
  app.require_subcommand(1);

  CLI::App* run = app.add_subcommand("run", "Run the experiment described by a key = value config file");
  std::string config_path;
  run->add_option("config", config_path, "Config file (a previous manifest.txt also works)")->required();

  struct Override {
    const char* flag;
    const char* key;
    const char* help;
    std::string value;
  };
  std::vector<Override> overrides{
      {"--k", "incidence.k", "Wavenumber or comma-separated list", {}},
      {"--p", "discretization.p", "Polynomial degree(s), e.g. 3 or 1..5", {}},
      {"--n", "discretization.n", "Graded-mesh layers, or 'auto' for n = 2(p+1)", {}},
      {"--sigma", "discretization.sigma", "Geometric grading ratio in (0, 1)", {}},
      {"--theta-inc", "incidence.theta", "Incidence angle in radians (pi/6 style accepted)", {}},
      {"--method", "discretization.method", "Formulation or grating method (SC, SS, SS*)", {}},
      {"--out-dir", "output.dir", "Directory for CSV files and the manifest", {}},
      {"--seed", "seed", "Seed for sampled evaluation points", {}},
  };
  for (auto& o : overrides) run->add_option(o.flag, o.value, o.help);
  std::vector<std::string> sets;
  run->add_option("--set", sets, "Extra override 'key=value' (repeatable)");
  bool quiet = false;
  run->add_flag("-q,--quiet", quiet, "Do not print the run summary");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return BadConfig;
  }

  try {
    hnabem::ConfigFile file = hnabem::ConfigFile::load(config_path);
    for (const auto& o : overrides)
      if (!o.value.empty()) file.set(o.key, o.value);
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos || eq == 0) throw hnabem::ConfigError("--set expects key=value, got '" + s + "'");
      auto trim = [](std::string t) {
        t.erase(0, t.find_first_not_of(' '));
        t.erase(t.find_last_not_of(' ') + 1);
        return t;
      };
      file.set(trim(s.substr(0, eq)), trim(s.substr(eq + 1)));
    }
    const hnabem::ExperimentConfig config = hnabem::resolve_config(file);
    const hnabem::ExperimentResult result = hnabem::run_experiment(config);
    hnabem::write_outputs(result, config.out_dir);
    if (!quiet) {
      for (const auto& line : result.summary) std::cout << line << "\n";
      std::cout << "wrote";
      for (const auto& f : result.manifest.outputs) std::cout << " " << f;
      std::cout << " manifest.txt to " << config.out_dir << "\n";
    }
    return Success;
  } catch (const hnabem::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return BadConfig;
  } catch (const hnabem::GeometryError& e) {
    std::cerr << "geometry error: " << e.what() << "\n";
    return BadConfig;
  } catch (const hnabem::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return NumericalFailure;
  } catch (const hnabem::DomainError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return NumericalFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return Failure;
  }
}
