#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "tbie/circle_oracle.hpp"
#include "tbie/eigen_result.hpp"
#include "tbie/geometry.hpp"
#include "tbie/nep_ssm.hpp"
#include "tbie/systems.hpp"

namespace tbie::cli {

/// Bad configuration or arguments; exit code 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File could not be read or written; exit code 3.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ShapeSpec {
  std::string kind = "circle";
  double radius = 1.0;
  double delta = 0.3;
  int lobes = 5;
};

struct ScatterSpec {
  double omega = 2.0;
  /// Incidence angle in degrees, measured from the x axis.
  double direction_deg = 0.0;
  double x_min = -2.0, x_max = 2.0, y_min = -2.0, y_max = 2.0;
  int nx = 41, ny = 41;
};

struct RunConfig {
  ShapeSpec shape;
  double eps0 = 1.0, eps1 = 4.0, mu0 = 1.0, mu1 = 1.0;
  int n = 400;
  std::string formulation = "both";
  Rect region{0.5, 3.0, -1.0, 0.0};
  int tiles_x = 8, tiles_y = 4;
  nep_ssm::SsmParams ssm;
  circle_oracle::FindOptions oracle;
  ScatterSpec scatter;
  std::string out = "out";
  bool timestamp = true;
  bool gnuplot = false;

  systems::TransmissionConfig transmission() const;
  std::vector<systems::Formulation> formulations() const;
  /// Throws ConfigError on the first violated precondition.
  void validate() const;
  nlohmann::ordered_json to_json() const;
};

/// Reads an INI file with [section] headers and key = value lines. Unknown
/// keys and unparsable values raise ConfigError; a missing file raises IoError.
void load_config(const std::string& path, RunConfig& config);

/// Sets one key given as "section.key".
void set_key(RunConfig& config, const std::string& key, const std::string& value);

/// Documentation of every configuration key, for --help.
std::string config_help();

/// "a,b,c,d" -> Rect.
Rect parse_region(const std::string& text);
/// "8x4" or "8,4".
std::pair<int, int> parse_tiles(const std::string& text);

}  // namespace tbie::cli
