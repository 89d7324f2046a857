#include "run_config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <CLI11.hpp>

namespace tbie::cli {
namespace {

double to_double(const std::string& key, const std::string& v) {
  double x = 0.0;
  const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || end != v.data() + v.size()) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
  return x;
}

int to_int(const std::string& key, const std::string& v) {
  int x = 0;
  const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || end != v.data() + v.size()) {
    throw ConfigError(key + ": expected an integer, got '" + v + "'");
  }
  return x;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t x = 0;
  const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || end != v.data() + v.size()) {
    throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
  }
  return x;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

struct Key {
  const char* help;
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
};

#define TBIE_DOUBLE(field) [](RunConfig& c, const std::string& k, const std::string& v) { c.field = to_double(k, v); }
#define TBIE_INT(field) [](RunConfig& c, const std::string& k, const std::string& v) { c.field = to_int(k, v); }
#define TBIE_BOOL(field) [](RunConfig& c, const std::string& k, const std::string& v) { c.field = to_bool(k, v); }

const std::map<std::string, Key>& keys() {
  static const std::map<std::string, Key> table = {
      {"geometry.shape", {"circle or star",
                          [](RunConfig& c, const std::string&, const std::string& v) { c.shape.kind = v; }}},
      {"geometry.radius", {"circle radius / star mean radius a (1)", TBIE_DOUBLE(shape.radius)}},
      {"geometry.delta", {"star amplitude delta, r = a (1 + delta cos(m t)) (0.3)", TBIE_DOUBLE(shape.delta)}},
      {"geometry.lobes", {"star lobe count m (5)", TBIE_INT(shape.lobes)}},
      {"materials.eps0", {"exterior permittivity (1)", TBIE_DOUBLE(eps0)}},
      {"materials.eps1", {"interior permittivity (4)", TBIE_DOUBLE(eps1)}},
      {"materials.mu0", {"exterior permeability (1)", TBIE_DOUBLE(mu0)}},
      {"materials.mu1", {"interior permeability (1)", TBIE_DOUBLE(mu1)}},
      {"discretization.n", {"number of boundary nodes N, even (400)", TBIE_INT(n)}},
      {"region.re_min", {"search window, real part lower bound (0.5)", TBIE_DOUBLE(region.re_min)}},
      {"region.re_max", {"search window, real part upper bound (3)", TBIE_DOUBLE(region.re_max)}},
      {"region.im_min", {"search window, imaginary part lower bound (-1)", TBIE_DOUBLE(region.im_min)}},
      {"region.im_max", {"search window, imaginary part upper bound (0)", TBIE_DOUBLE(region.im_max)}},
      {"ssm.formulation", {"bm, mixed or both (both)",
                           [](RunConfig& c, const std::string&, const std::string& v) { c.formulation = v; }}},
      {"ssm.tiles_x", {"tiles along the real axis (8)", TBIE_INT(tiles_x)}},
      {"ssm.tiles_y", {"tiles along the imaginary axis (4)", TBIE_INT(tiles_y)}},
      {"ssm.moments", {"moment count K (4)", TBIE_INT(ssm.moments)}},
      {"ssm.block", {"probe block size L (8)", TBIE_INT(ssm.block)}},
      {"ssm.nodes_per_side", {"Gauss-Legendre points per tile side (28)", TBIE_INT(ssm.nodes_per_side)}},
      {"ssm.svd_rel_tol", {"relative SVD truncation (1e-12)", TBIE_DOUBLE(ssm.svd_rel_tol)}},
      {"ssm.residual_tol", {"eigenpair residual filter (1e-8)", TBIE_DOUBLE(ssm.residual_tol)}},
      {"ssm.cluster_tol", {"distance below which eigenvalues merge (1e-6)", TBIE_DOUBLE(ssm.cluster_tol)}},
      {"ssm.seed", {"probe block seed (20240611)",
                    [](RunConfig& c, const std::string& k, const std::string& v) { c.ssm.seed = to_u64(k, v); }}},
      {"oracle.n_max", {"largest Fourier order searched (30)", TBIE_INT(oracle.n_max)}},
      {"oracle.cell", {"winding-scan cell size (0.05)", TBIE_DOUBLE(oracle.cell)}},
      {"scatter.omega", {"real frequency (2)", TBIE_DOUBLE(scatter.omega)}},
      {"scatter.direction_deg", {"incidence angle in degrees (0)", TBIE_DOUBLE(scatter.direction_deg)}},
      {"scatter.x_min", {"field grid (-2)", TBIE_DOUBLE(scatter.x_min)}},
      {"scatter.x_max", {"field grid (2)", TBIE_DOUBLE(scatter.x_max)}},
      {"scatter.y_min", {"field grid (-2)", TBIE_DOUBLE(scatter.y_min)}},
      {"scatter.y_max", {"field grid (2)", TBIE_DOUBLE(scatter.y_max)}},
      {"scatter.nx", {"grid points along x (41)", TBIE_INT(scatter.nx)}},
      {"scatter.ny", {"grid points along y (41)", TBIE_INT(scatter.ny)}},
      {"output.dir", {"output directory (out)",
                      [](RunConfig& c, const std::string&, const std::string& v) { c.out = v; }}},
      {"output.timestamp", {"write the timestamp header line (true)", TBIE_BOOL(timestamp)}},
      {"output.gnuplot", {"also write a gnuplot script (false)", TBIE_BOOL(gnuplot)}},
  };
  return table;
}

#undef TBIE_DOUBLE
#undef TBIE_INT
#undef TBIE_BOOL

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) parts.push_back(item);
  return parts;
}

}  // namespace

systems::TransmissionConfig RunConfig::transmission() const {
  systems::TransmissionConfig t;
  t.eps0 = eps0;
  t.eps1 = eps1;
  t.mu0 = mu0;
  t.mu1 = mu1;
  try {
    if (shape.kind == "circle") {
      t.curve = geometry::circle(shape.radius);
    } else if (shape.kind == "star") {
      t.curve = geometry::star(shape.radius, shape.delta, shape.lobes);
    } else {
      throw ConfigError("geometry.shape: expected circle or star, got '" + shape.kind + "'");
    }
  } catch (const DomainError& e) {
    throw ConfigError(std::string("geometry: ") + e.what());
  }
  return t;
}

std::vector<systems::Formulation> RunConfig::formulations() const {
  if (formulation == "bm") return {systems::Formulation::BM};
  if (formulation == "mixed") return {systems::Formulation::Mixed};
  if (formulation == "both") return {systems::Formulation::BM, systems::Formulation::Mixed};
  throw ConfigError("formulation: expected bm, mixed or both, got '" + formulation + "'");
}

void RunConfig::validate() const {
  const auto t = transmission();
  try {
    t.validate();
  } catch (const DomainError& e) {
    throw ConfigError(std::string("materials: ") + e.what());
  }
  formulations();
  if (n < 8 || n % 2 != 0) throw ConfigError("discretization.n must be even and at least 8");
  if (!(region.re_max > region.re_min) || !(region.im_max > region.im_min)) {
    throw ConfigError("region: bounds must satisfy re_min < re_max and im_min < im_max");
  }
  if (region.contains_zero()) throw ConfigError("region must avoid omega = 0");
  if (tiles_x < 1 || tiles_y < 1) throw ConfigError("tiles must be positive");
  try {
    ssm.validate();
  } catch (const DomainError& e) {
    throw ConfigError(std::string("ssm: ") + e.what());
  }
  if (oracle.n_max < 0 || !(oracle.cell > 0.0)) throw ConfigError("oracle: invalid n_max or cell");
  if (!(scatter.omega > 0.0) || !std::isfinite(scatter.omega)) {
    throw ConfigError("scatter.omega must be real and positive");
  }
  if (scatter.nx < 1 || scatter.ny < 1 || !(scatter.x_max >= scatter.x_min) ||
      !(scatter.y_max >= scatter.y_min)) {
    throw ConfigError("scatter: invalid target grid");
  }
  if (out.empty()) throw ConfigError("output.dir must not be empty");
}

nlohmann::ordered_json RunConfig::to_json() const {
  nlohmann::ordered_json j;
  j["geometry"] = {{"shape", shape.kind}, {"radius", shape.radius}};
  if (shape.kind == "star") {
    j["geometry"]["delta"] = shape.delta;
    j["geometry"]["lobes"] = shape.lobes;
  }
  j["materials"] = {{"eps0", eps0}, {"eps1", eps1}, {"mu0", mu0}, {"mu1", mu1}};
  j["discretization"] = {{"n", n}};
  j["region"] = {{"re_min", region.re_min}, {"re_max", region.re_max},
                 {"im_min", region.im_min}, {"im_max", region.im_max}};
  j["ssm"] = {{"formulation", formulation},
              {"tiles_x", tiles_x},
              {"tiles_y", tiles_y},
              {"moments", ssm.moments},
              {"block", ssm.block},
              {"nodes_per_side", ssm.nodes_per_side},
              {"svd_rel_tol", ssm.svd_rel_tol},
              {"residual_tol", ssm.residual_tol},
              {"cluster_tol", ssm.cluster_tol},
              {"seed", ssm.seed}};
  j["oracle"] = {{"n_max", oracle.n_max}, {"cell", oracle.cell}};
  j["scatter"] = {{"omega", scatter.omega}, {"direction_deg", scatter.direction_deg},
                  {"x_min", scatter.x_min}, {"x_max", scatter.x_max},
                  {"y_min", scatter.y_min}, {"y_max", scatter.y_max},
                  {"nx", scatter.nx}, {"ny", scatter.ny}};
  return j;
}

void set_key(RunConfig& config, const std::string& key, const std::string& value) {
  const auto it = keys().find(key);
  if (it == keys().end()) throw ConfigError("unknown configuration key '" + key + "'");
  it->second.set(config, key, value);
}

void load_config(const std::string& path, RunConfig& config) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file '" + path + "'");
  CLI::ConfigBase format;
  format.comment('#')->arrayBounds('\0', '\0')->arrayDelimiter('\0');
  std::vector<CLI::ConfigItem> items;
  try {
    items = format.from_config(in);
  } catch (const CLI::Error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  for (const auto& item : items) {
    if (item.name == "++" || item.name == "--") continue;
    if (item.parents.size() != 1) {
      throw ConfigError(path + ": key '" + item.fullname() + "' must sit in one [section]");
    }
    if (item.inputs.size() != 1) {
      throw ConfigError(path + ": key '" + item.fullname() + "' needs exactly one value");
    }
    set_key(config, item.fullname(), item.inputs.front());
  }
}

std::string config_help() {
  std::string s = "Configuration keys ([section] key = value):\n";
  for (const auto& [name, key] : keys()) s += "  " + name + ": " + key.help + "\n";
  return s;
}

Rect parse_region(const std::string& text) {
  const auto p = split(text, ',');
  if (p.size() != 4) throw ConfigError("--region expects re_min,re_max,im_min,im_max");
  return {to_double("--region", p[0]), to_double("--region", p[1]), to_double("--region", p[2]),
          to_double("--region", p[3])};
}

std::pair<int, int> parse_tiles(const std::string& text) {
  auto p = split(text, 'x');
  if (p.size() != 2) p = split(text, ',');
  if (p.size() != 2) throw ConfigError("--tiles expects NXxNY, e.g. 8x4");
  return {to_int("--tiles", p[0]), to_int("--tiles", p[1])};
}

}  // namespace tbie::cli
