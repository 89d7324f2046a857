#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include <fmt/chrono.h>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "tbie/specfun.hpp"

namespace tbie::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using systems::Formulation;

constexpr const char* kEigsColumns = "formulation,index,re,im,residual,classification,multiplicity";
constexpr const char* kPairingColumns = "bm_index,bm_re,bm_im,mixed_index,mixed_re,mixed_im,distance";

std::string utc_now() {
  return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}",
                     std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now()));
}

class Output {
 public:
  explicit Output(const RunConfig& config) : config_(config), dir_(config.out) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw IoError("cannot create output directory '" + config.out + "': " + ec.message());
  }

  /// Opens a CSV file and writes the schema and (optional) timestamp lines.
  std::ofstream csv(const std::string& name, const std::string& schema, const std::string& columns) {
    std::ofstream f = open(name);
    f << "# " << schema << "\n";
    if (config_.timestamp) f << "# generated " << utc_now() << "\n";
    f << columns << "\n";
    return f;
  }

  std::ofstream open(const std::string& name) {
    std::ofstream f(dir_ / name);
    if (!f) throw IoError("cannot write '" + (dir_ / name).string() + "'");
    files_.push_back(name);
    return f;
  }

  void close(std::ofstream& f, const std::string& name) {
    f.close();
    if (!f) throw IoError("error while writing '" + (dir_ / name).string() + "'");
  }

  void summary(const std::string& command, json results) {
    json j;
    j["schema"] = "tbie-summary v1";
    j["command"] = command;
    if (config_.timestamp) j["generated"] = utc_now();
    j["config"] = config_.to_json();
    j["files"] = files_;
    j["results"] = std::move(results);
    std::ofstream f = open("summary.json");
    f << j.dump(2) << "\n";
    close(f, "summary.json");
  }

  const std::vector<std::string>& files() const { return files_; }

 private:
  const RunConfig& config_;
  fs::path dir_;
  std::vector<std::string> files_;
};

void write_eigs(Output& out, const std::string& formulation, const std::vector<EigenResult>& list) {
  const std::string name = "eigs_" + formulation + ".csv";
  std::ofstream f = out.csv(name, "tbie eigs v1", kEigsColumns);
  for (const auto& e : list) {
    fmt::print(f, "{},{},{:.17g},{:.17g},{:.3e},{},{}\n", formulation, e.index, e.lambda.real(),
               e.lambda.imag(), e.residual, to_string(e.classification), e.multiplicity);
  }
  out.close(f, name);
}

json eig_summary(const std::vector<EigenResult>& list) {
  json j;
  j["count"] = list.size();
  int count_true = 0, count_fict = 0, count_unrefined = 0;
  double max_res = 0.0, max_im = -std::numeric_limits<double>::infinity();
  for (const auto& e : list) {
    count_true += e.classification == Classification::True;
    count_fict += e.classification == Classification::Fictitious;
    count_unrefined += !e.converged;
    max_res = std::max(max_res, e.residual);
    max_im = std::max(max_im, e.lambda.imag());
  }
  j["true"] = count_true;
  j["fictitious"] = count_fict;
  j["unrefined"] = count_unrefined;
  j["max_residual"] = max_res;
  if (!list.empty()) j["max_imag"] = max_im;
  j["columns"] = kEigsColumns;
  return j;
}

void write_gnuplot_eigs(Output& out, const std::vector<std::string>& names, bool by_class) {
  std::ofstream f = out.open("plot_eigs.gp");
  f << "set datafile separator ','\n"
       "set xlabel 'Re omega'\nset ylabel 'Im omega'\nset grid\n";
  std::string plot = "plot ";
  for (std::size_t i = 0; i < names.size(); ++i) {
    const std::string file = "'eigs_" + names[i] + ".csv'";
    if (i > 0) plot += ", ";
    if (by_class) {
      plot += file + " every ::1 using 3:(strcol(6) eq 'True' ? $4 : 1/0) with points pt 7 title 'True', " +
              file + " every ::1 using 3:(strcol(6) eq 'Fictitious' ? $4 : 1/0) with points pt 6 title 'Fictitious'";
    } else {
      plot += file + " every ::1 using 3:4 with points pt " + std::to_string(i == 0 ? 6 : 1) +
              " title '" + names[i] + "'";
    }
  }
  f << plot << "\n";
  out.close(f, "plot_eigs.gp");
}

}  // namespace

int cmd_oracle_eigs(const RunConfig& config) {
  config.validate();
  const auto t = config.transmission();
  if (t.curve.kind() != geometry::CurveKind::Circle) {
    throw ConfigError("oracle-eigs: unsupported shape '" + config.shape.kind +
                      "' (the mode oracle exists for circles only)");
  }
  const auto roots = circle_oracle::find_eigen(config.region, t, config.oracle);
  Output out(config);
  write_eigs(out, "oracle", roots);
  if (config.gnuplot) write_gnuplot_eigs(out, {"oracle"}, true);
  json results;
  results["oracle"] = eig_summary(roots);
  out.summary("oracle-eigs", results);
  return 0;
}

int cmd_ssm_eigs(const RunConfig& config) {
  config.validate();
  const auto t = config.transmission();
  const auto forms = config.formulations();
  const auto disc = geometry::sample(t.curve, config.n);
  auto cache = std::make_shared<nep_ssm::KernelCache>(t, disc);
  std::vector<nep_ssm::NepProblem> problems;
  for (Formulation f : forms) problems.push_back(nep_ssm::transmission_problem(cache, f));
  auto results = nep_ssm::solve_region(problems, config.region, config.tiles_x, config.tiles_y,
                                       config.ssm);

  const bool circle = t.curve.kind() == geometry::CurveKind::Circle;
  if (circle) {
    for (auto& r : results) {
      for (auto& e : r.eigen) {
        e.classification = circle_oracle::classify(e.lambda, t, config.oracle.n_max).classification;
      }
    }
  }

  Output out(config);
  json summary;
  std::vector<std::string> names;
  for (std::size_t p = 0; p < forms.size(); ++p) {
    const std::string name = to_string(forms[p]);
    names.push_back(name);
    write_eigs(out, name, results[p].eigen);
    json s = eig_summary(results[p].eigen);
    json tiles = json::array();
    int retried = 0, rejected = 0;
    double max_cond = 0.0;
    for (const auto& tr : results[p].tiles) {
      retried += tr.retried;
      rejected += tr.rejected;
      max_cond = std::max(max_cond, tr.condition);
      if (tr.condition > 1e10) {
        std::cerr << fmt::format("warning: {} tile {} (ix {}, iy {}) has an ill-conditioned Hankel "
                                 "matrix, condition {:.2e}\n",
                                 name, tr.tile, tr.tile % config.tiles_x, tr.tile / config.tiles_x,
                                 tr.condition);
      }
      tiles.push_back({{"tile", tr.tile},
                       {"rect", {tr.rect.re_min, tr.rect.re_max, tr.rect.im_min, tr.rect.im_max}},
                       {"rank", tr.rank},
                       {"condition", tr.condition},
                       {"retried", tr.retried},
                       {"rejected", tr.rejected}});
    }
    s["tiles_retried"] = retried;
    s["candidates_rejected"] = rejected;
    s["max_condition"] = max_cond;
    s["tiles"] = std::move(tiles);
    summary[name] = std::move(s);
  }

  if (forms.size() == 2) {
    std::vector<Complex> a, b;
    for (const auto& e : results[0].eigen) a.push_back(e.lambda);
    for (const auto& e : results[1].eigen) b.push_back(e.lambda);
    const auto pairs = nep_ssm::pair_eigenvalues(a, b);
    std::ofstream f = out.csv("pairing.csv", "tbie pairing v1", kPairingColumns);
    double max_d = 0.0;
    int unmatched = 0;
    for (const auto& pr : pairs) {
      std::string row;
      if (pr.a >= 0) {
        row += fmt::format("{},{:.17g},{:.17g},", results[0].eigen[pr.a].index, a[pr.a].real(),
                           a[pr.a].imag());
      } else {
        row += ",,,";
      }
      if (pr.b >= 0) {
        row += fmt::format("{},{:.17g},{:.17g},", results[1].eigen[pr.b].index, b[pr.b].real(),
                           b[pr.b].imag());
      } else {
        row += ",,,";
      }
      if (pr.a >= 0 && pr.b >= 0) {
        row += fmt::format("{:.3e}", pr.distance);
        max_d = std::max(max_d, pr.distance);
      } else {
        ++unmatched;
      }
      f << row << "\n";
    }
    out.close(f, "pairing.csv");
    summary["pairing"] = {{"pairs", pairs.size() - unmatched},
                          {"unmatched", unmatched},
                          {"max_distance", max_d},
                          {"columns", kPairingColumns}};
  }
  if (config.gnuplot) write_gnuplot_eigs(out, names, false);
  out.summary("ssm-eigs", summary);
  return 0;
}

int cmd_scatter(const RunConfig& config) {
  config.validate();
  const auto t = config.transmission();
  const auto forms = config.formulations();
  const auto disc = geometry::sample(t.curve, config.n);
  const double omega = config.scatter.omega;
  const double angle = config.scatter.direction_deg * kPi / 180.0;
  const Point2 dir{std::cos(angle), std::sin(angle)};
  const auto wave = systems::incident_plane_wave(t.k0(omega), dir);

  const auto& sc = config.scatter;
  std::vector<Point2> ext_pts, int_pts;
  std::vector<int> ext_idx, int_idx, rejected;
  const double band = layerpot::near_field_distance(disc);
  for (int iy = 0; iy < sc.ny; ++iy) {
    for (int ix = 0; ix < sc.nx; ++ix) {
      const double x = sc.nx == 1 ? sc.x_min : sc.x_min + (sc.x_max - sc.x_min) * ix / (sc.nx - 1);
      const double y = sc.ny == 1 ? sc.y_min : sc.y_min + (sc.y_max - sc.y_min) * iy / (sc.ny - 1);
      const Point2 p{x, y};
      const int idx = iy * sc.nx + ix;
      if (disc.distance_to_nodes(p) <= band) {
        rejected.push_back(idx);
      } else if (t.curve.contains(p)) {
        int_pts.push_back(p);
        int_idx.push_back(idx);
      } else {
        ext_pts.push_back(p);
        ext_idx.push_back(idx);
      }
    }
  }
  if (!rejected.empty()) {
    std::string list;
    for (std::size_t i = 0; i < rejected.size(); ++i) list += (i ? " " : "") + std::to_string(rejected[i]);
    std::cerr << "warning: " << rejected.size()
              << " targets lie in the near-boundary band and were skipped: " << list << "\n";
  }

  const bool circle = t.curve.kind() == geometry::CurveKind::Circle;
  std::optional<circle_oracle::MieSolution> mie;
  if (circle) {
    const double k0a = t.k0(omega).real() * t.curve.radius();
    mie = circle_oracle::mie_transmission(t, omega, dir, circle_oracle::mie_min_order(k0a));
  }

  struct Result {
    systems::BoundarySolution sol;
    std::vector<Complex> ext, in;
  };
  std::vector<Result> res;
  for (Formulation f : forms) {
    Result r{systems::solve_scattering(t, disc, omega, wave, f), {}, {}};
    r.ext = systems::eval_field(t, disc, r.sol, ext_pts, systems::FieldRegion::Exterior);
    r.in = systems::eval_field(t, disc, r.sol, int_pts, systems::FieldRegion::Interior);
    res.push_back(std::move(r));
  }

  Output out(config);
  json summary;
  summary["rejected_targets"] = rejected;

  std::string trace_cols = "formulation,j,t,re_u,im_u,re_q,im_q";
  if (mie) trace_cols += ",re_u_mie,im_u_mie,re_q_mie,im_q_mie";
  std::ofstream tf = out.csv("traces.csv", "tbie traces v1", trace_cols);
  std::string field_cols = "formulation,index,x,y,region,re_u,im_u,re_scat,im_scat";
  if (mie) field_cols += ",re_mie,im_mie,abs_err";
  std::ofstream ff = out.csv("field.csv", "tbie field v1", field_cols);

  double mie_u_scale = 0.0, mie_q_scale = 0.0, mie_field_scale = 0.0;
  std::vector<Complex> mie_u(disc.n), mie_q(disc.n), mie_ext(ext_pts.size()), mie_in(int_pts.size());
  if (mie) {
    for (int j = 0; j < disc.n; ++j) {
      mie_u[j] = mie->trace_u(disc.t[j]);
      mie_q[j] = mie->trace_q(disc.t[j]);
      mie_u_scale = std::max(mie_u_scale, std::abs(mie_u[j]));
      mie_q_scale = std::max(mie_q_scale, std::abs(mie_q[j]));
    }
    for (std::size_t i = 0; i < ext_pts.size(); ++i) mie_ext[i] = mie->field(ext_pts[i]);
    for (std::size_t i = 0; i < int_pts.size(); ++i) mie_in[i] = mie->field(int_pts[i]);
    for (Complex v : mie_ext) mie_field_scale = std::max(mie_field_scale, std::abs(v));
    for (Complex v : mie_in) mie_field_scale = std::max(mie_field_scale, std::abs(v));
  }

  for (const Result& r : res) {
    const std::string name = to_string(r.sol.formulation);
    double eu = 0.0, eq = 0.0, ef = 0.0, scat = 0.0;
    for (int j = 0; j < disc.n; ++j) {
      std::string row = fmt::format("{},{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}", name, j, disc.t[j],
                                    r.sol.u[j].real(), r.sol.u[j].imag(), r.sol.q[j].real(),
                                    r.sol.q[j].imag());
      if (mie) {
        row += fmt::format(",{:.17g},{:.17g},{:.17g},{:.17g}", mie_u[j].real(), mie_u[j].imag(),
                           mie_q[j].real(), mie_q[j].imag());
        eu = std::max(eu, std::abs(r.sol.u[j] - mie_u[j]) / mie_u_scale);
        eq = std::max(eq, std::abs(r.sol.q[j] - mie_q[j]) / mie_q_scale);
      }
      tf << row << "\n";
    }
    auto field_rows = [&](const std::vector<Point2>& pts, const std::vector<int>& idx,
                          const std::vector<Complex>& val, const std::vector<Complex>& ref,
                          const char* region) {
      for (std::size_t i = 0; i < pts.size(); ++i) {
        const Complex s = val[i] - wave.value(pts[i]);
        scat = std::max(scat, std::abs(s));
        std::string row = fmt::format("{},{},{:.17g},{:.17g},{},{:.17g},{:.17g},{:.17g},{:.17g}", name,
                                      idx[i], pts[i].x, pts[i].y, region, val[i].real(),
                                      val[i].imag(), s.real(), s.imag());
        if (mie) {
          const double err = std::abs(val[i] - ref[i]);
          ef = std::max(ef, err / mie_field_scale);
          row += fmt::format(",{:.17g},{:.17g},{:.3e}", ref[i].real(), ref[i].imag(), err);
        }
        ff << row << "\n";
      }
    };
    field_rows(ext_pts, ext_idx, r.ext, mie_ext, "exterior");
    field_rows(int_pts, int_idx, r.in, mie_in, "interior");
    json s = {{"residual", r.sol.residual}, {"rcond", r.sol.rcond}, {"max_abs_scattered", scat}};
    if (mie) {
      s["trace_error_u"] = eu;
      s["trace_error_q"] = eq;
      s["field_error"] = ef;
    }
    summary[name] = std::move(s);
  }
  out.close(tf, "traces.csv");
  out.close(ff, "field.csv");

  if (res.size() == 2) {
    auto rel = [](const Eigen::VectorXcd& x, const Eigen::VectorXcd& y) {
      return (x - y).lpNorm<Eigen::Infinity>() / y.lpNorm<Eigen::Infinity>();
    };
    auto rel_list = [](const std::vector<Complex>& x, const std::vector<Complex>& y) {
      double d = 0.0, s = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        d = std::max(d, std::abs(x[i] - y[i]));
        s = std::max(s, std::abs(y[i]));
      }
      return s > 0.0 ? d / s : d;
    };
    summary["agreement"] = {{"trace_u", rel(res[1].sol.u, res[0].sol.u)},
                            {"trace_q", rel(res[1].sol.q, res[0].sol.q)},
                            {"field_exterior", rel_list(res[1].ext, res[0].ext)},
                            {"field_interior", rel_list(res[1].in, res[0].in)}};
  }
  if (config.gnuplot) {
    std::ofstream g = out.open("plot_field.gp");
    g << "set datafile separator ','\nset size ratio -1\nset xlabel 'x'\nset ylabel 'y'\n"
         "plot 'field.csv' every ::1 using 3:4:(sqrt($6**2 + $7**2)) with points pt 5 ps 0.6 "
         "palette title '|u|'\n";
    out.close(g, "plot_field.gp");
  }
  out.summary("scatter", summary);
  return 0;
}

int cmd_selftest(const SelftestOptions& options, std::ostream& report) {
  std::mt19937_64 rng(7);
  auto uniform = [&](double lo, double hi) {
    return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
  };
  int failures = 0;
  auto line = [&](const std::string& suite, double err, double tol) {
    const bool ok = err <= tol;
    failures += !ok;
    report << fmt::format("{:<28} max error {:.2e}  tol {:.0e}  {}\n", suite, err, tol,
                          ok ? "PASS" : "FAIL");
  };

  {
    double err = 0.0;
    for (int i = 0; i < 200;) {
      const int n = static_cast<int>(uniform(0.0, 60.0));
      const Complex z(uniform(0.1, 40.0), uniform(-20.0, 20.0));
      try {
        err = std::max(err, specfun::wronskian_residual(n, z));
        ++i;
      } catch (const RangeError&) {
      }
    }
    line("wronskian", err, 1e-11);
  }
  {
    double err = 0.0;
    for (int i = 0; i < 200;) {
      const int n = static_cast<int>(uniform(-40.0, 40.0));
      const Complex z(uniform(0.1, 40.0), uniform(-20.0, 20.0));
      try {
        for (auto kind : {specfun::CylKind::J, specfun::CylKind::Y, specfun::CylKind::H1}) {
          err = std::max(err, specfun::recurrence_residual(kind, n, z));
          err = std::max(err, specfun::parity_residual(kind, n, z));
        }
        ++i;
      } catch (const RangeError&) {
      }
    }
    line("recurrence and parity", err, 1e-10);
  }
  {
    const auto disc = geometry::sample(geometry::circle(1.0), 128);
    const double scale = options.corrupt_symbol ? 1.0 + 1e-6 : 1.0;
    double err = 0.0;
    for (Complex k : {Complex(1.0, 0.0), Complex(5.0, 0.0), Complex(3.0, -0.5)}) {
      const auto set = layerpot::assemble_set(k, disc, layerpot::OperatorMask::all());
      const std::pair<layerpot::OperatorKind, const Eigen::MatrixXcd*> ops[] = {
          {layerpot::OperatorKind::S, &set.s},
          {layerpot::OperatorKind::D, &set.d},
          {layerpot::OperatorKind::Dstar, &set.dstar},
          {layerpot::OperatorKind::N, &set.n}};
      for (const auto& [kind, m] : ops) {
        err = std::max(err, circle_oracle::symbol_error({kind, k, *m}, disc, 20, scale));
      }
    }
    line("circle symbols (N=128)", err, 1e-8);
  }
  {
    systems::TransmissionConfig t;
    double err = 0.0;
    for (int i = 0; i < 100; ++i) {
      const int n = static_cast<int>(std::floor(uniform(-15.0, 16.0)));
      const Complex w(uniform(0.3, 5.0), uniform(-1.0, 0.2));
      const Complex direct = circle_oracle::sarrus(circle_oracle::mode_matrix_mixed(n, w, t));
      const Complex factored = circle_oracle::mixed_det_factored(n, w, t);
      err = std::max(err, std::abs(direct - factored) / std::abs(factored));
    }
    line("mixed determinant factors", err, 1e-12);
  }
  {
    const Complex lambda0(1.2, -0.3);
    const auto problem = nep_ssm::dense_problem(1, [&](Complex z) {
      Eigen::MatrixXcd a(1, 1);
      a(0, 0) = z - lambda0;
      return a;
    });
    nep_ssm::SsmParams params;
    params.block = 1;
    params.moments = 2;
    const nep_ssm::ContourSpec contour{Complex(1.0, -0.25), 0.5, 0.25, 28};
    const auto ex = nep_ssm::extract_eigen(nep_ssm::compute_moments(problem, contour, params),
                                           problem, params);
    const double err = ex.pairs.size() == 1 ? std::abs(ex.pairs[0].lambda - lambda0) : 1.0;
    line("scalar contour solve", err, 1e-10);
  }
  report << (failures == 0 ? "selftest passed\n" : fmt::format("selftest: {} suite(s) failed\n", failures));
  return failures == 0 ? 0 : 1;
}

}  // namespace tbie::cli
