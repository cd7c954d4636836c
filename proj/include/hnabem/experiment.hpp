#pragma once

#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "hnabem/common.hpp"
#include "hnabem/geometry.hpp"
#include "hnabem/quadrature.hpp"

namespace hnabem {

/// Flat "key = value" text, one entry per line; '#' starts a comment and
/// dotted keys group entries into sections. Keys under "manifest." are
/// ignored, so a run manifest is itself a valid configuration.
class ConfigFile {
 public:
  static ConfigFile parse(std::istream& in, const std::string& source = "<config>");
  static ConfigFile parse_string(const std::string& text);
  static ConfigFile load(const std::string& path);

  void set(const std::string& key, const std::string& value) { entries_[key] = value; }
  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  const std::map<std::string, std::string>& entries() const { return entries_; }
  /// Directory relative paths in the file are resolved against.
  const std::string& base_dir() const { return base_dir_; }

 private:
  std::map<std::string, std::string> entries_;
  std::string base_dir_ = ".";
};

enum class ExperimentKind { Screen, Polygon, Interior, Grating, ConvergenceSweep, GreensCheck };

const char* to_string(ExperimentKind kind);
ExperimentKind parse_experiment_kind(const std::string& name);

struct FieldGrid {
  double x0 = 0.0, x1 = 0.0, y0 = 0.0, y1 = 0.0;
  int nx = 0, ny = 0;
};

/// Validated experiment description. Every value read while resolving is
/// echoed in canonical form in `resolved`, which reproduces the run.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Screen;

  std::string geometry = "screen";  // screen | triangle | regular-polygon | polygon | grating
  double length = 2.0 * pi;
  int sides = 64;
  double radius = 1.0;
  std::vector<Vec2> vertices;
  double period = 2.0 * pi;
  GratingShape shape;
  std::string profile_file;

  std::vector<double> k;
  double theta_inc = 0.0;

  std::vector<int> p;
  int n = 0;  // 0: n = 2(p + 1)
  double sigma = 0.15;
  std::string method;

  std::string mode_policy = "propagating";  // propagating | symmetric | list
  std::vector<int> evanescent;
  std::vector<int> half_width;
  std::vector<int> mode_list;
  std::string grating_rhs = "calibrated";

  std::vector<int> directions;
  double data_angle = 0.0;

  std::string reference = "none";  // none | hna | standard-bem
  int reference_p = 6;
  double reference_dof_per_wavelength = 20.0;

  int greens_points = 20;
  Vec2 greens_source = Vec2::Zero();
  bool greens_source_set = false;

  QuadBudget budget;

  std::string out_dir = "out";
  bool timings = false;
  int far_field = 0;
  FieldGrid grid;
  unsigned long long seed = 1;

  std::map<std::string, std::string> resolved;
};

/// Checks types, ranges and geometry/solver compatibility; throws ConfigError
/// naming the offending key.
ExperimentConfig resolve_config(const ConfigFile& file);

struct RunManifest {
  std::string version;
  std::map<std::string, std::string> config;
  std::vector<std::pair<std::string, double>> timings;
  std::vector<std::string> outputs;

  /// Key-value text; loading it with ConfigFile gives back the configuration.
  std::string text() const;
};

struct OutputFile {
  std::string name;
  std::string content;
};

struct ExperimentResult {
  std::vector<OutputFile> files;
  RunManifest manifest;
  std::vector<std::string> summary;  // human-readable lines for the terminal
};

/// Runs the experiment in memory; nothing is written.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Writes all files and manifest.txt into `dir` (created if missing).
void write_outputs(const ExperimentResult& result, const std::string& dir);

/// Formats a double with 17 significant digits.
std::string format_real(double x);

const char* version_string();

}  // namespace hnabem
