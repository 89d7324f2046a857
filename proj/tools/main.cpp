#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"

namespace {

using tbie::cli::RunConfig;

struct Overrides {
  std::string config_path;
  std::string shape, formulation, region, tiles, out;
  int n = 0;
  std::uint64_t seed = 0;
  double omega = 0.0, direction = 0.0;
  std::vector<std::string> sets;
  bool no_timestamp = false;
  bool gnuplot = false;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "INI configuration file");
  cmd->add_option("--shape", o.shape, "circle or star")->check(CLI::IsMember({"circle", "star"}));
  cmd->add_option("--n", o.n, "number of boundary nodes");
  cmd->add_option("--formulation", o.formulation, "bm, mixed or both")
      ->check(CLI::IsMember({"bm", "mixed", "both"}));
  cmd->add_option("--region", o.region, "re_min,re_max,im_min,im_max");
  cmd->add_option("--tiles", o.tiles, "NXxNY");
  cmd->add_option("--seed", o.seed, "probe block seed");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--set", o.sets, "extra override section.key=value (repeatable)");
  cmd->add_flag("--no-timestamp", o.no_timestamp, "omit the timestamp lines from outputs");
  cmd->add_flag("--gnuplot", o.gnuplot, "also write a gnuplot script");
}

RunConfig build_config(const CLI::App* cmd, const Overrides& o) {
  RunConfig c;
  if (!o.config_path.empty()) tbie::cli::load_config(o.config_path, c);
  for (const auto& s : o.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw tbie::cli::ConfigError("--set expects section.key=value");
    tbie::cli::set_key(c, s.substr(0, eq), s.substr(eq + 1));
  }
  if (cmd->count("--shape")) c.shape.kind = o.shape;
  if (cmd->count("--n")) c.n = o.n;
  if (cmd->count("--formulation")) c.formulation = o.formulation;
  if (cmd->count("--region")) c.region = tbie::cli::parse_region(o.region);
  if (cmd->count("--tiles")) std::tie(c.tiles_x, c.tiles_y) = tbie::cli::parse_tiles(o.tiles);
  if (cmd->count("--seed")) c.ssm.seed = o.seed;
  if (cmd->count("--out")) c.out = o.out;
  if (const auto* opt = cmd->get_option_no_throw("--omega"); opt && opt->count()) c.scatter.omega = o.omega;
  if (const auto* opt = cmd->get_option_no_throw("--direction"); opt && opt->count())
    c.scatter.direction_deg = o.direction;
  if (o.no_timestamp) c.timestamp = false;
  if (o.gnuplot) c.gnuplot = true;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transmission eigenvalues and scattering with boundary integral equations"};
  app.require_subcommand(1);
  app.footer(tbie::cli::config_help() +
             "\nExit codes: 0 success, 1 validation error, 2 numerical failure, 3 I/O error.");

  Overrides o;
  auto* oracle = app.add_subcommand("oracle-eigs", "Circle eigenfrequencies from the Fourier-mode determinants");
  auto* ssm = app.add_subcommand("ssm-eigs", "Eigenfrequencies of the discretized systems by contour integration");
  auto* scatter = app.add_subcommand("scatter", "Plane-wave scattering: boundary traces and field on a grid");
  auto* selftest = app.add_subcommand("selftest", "Fast invariant checks");
  for (auto* cmd : {oracle, ssm, scatter}) add_common(cmd, o);
  scatter->add_option("--omega", o.omega, "real frequency");
  scatter->add_option("--direction", o.direction, "incidence angle in degrees");
  tbie::cli::SelftestOptions st;
  selftest->add_flag("--corrupt-symbol", st.corrupt_symbol, "negative control: perturb the reference symbols");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (selftest->parsed()) return tbie::cli::cmd_selftest(st, std::cout);
    CLI::App* cmd = oracle->parsed() ? oracle : ssm->parsed() ? ssm : scatter;
    const RunConfig config = build_config(cmd, o);
    if (cmd == oracle) return tbie::cli::cmd_oracle_eigs(config);
    if (cmd == ssm) return tbie::cli::cmd_ssm_eigs(config);
    return tbie::cli::cmd_scatter(config);
  } catch (const tbie::cli::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const tbie::DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const tbie::cli::IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return 3;
  } catch (const tbie::ContourHitError& e) {
    std::cerr << "numerical failure: " << e.what() << " (node " << e.node().real() << " "
              << e.node().imag() << "i); shift or resize the region\n";
    return 2;
  } catch (const tbie::SolverError& e) {
    std::cerr << "numerical failure: " << e.what() << " (rcond " << e.rcond() << ")\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  }
}
