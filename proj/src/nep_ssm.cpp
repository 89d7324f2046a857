#include "tbie/nep_ssm.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <string>

namespace tbie::nep_ssm {
namespace {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;

constexpr double kInflate = 1.01;

// A straight piece of contour from p to q with its Gauss-Legendre rule.
struct Segment {
  Complex p, q;
};

std::vector<QuadNode> segment_nodes(Segment s, const std::vector<double>& x, const std::vector<double>& w) {
  const Complex mid = 0.5 * (s.p + s.q);
  const Complex half = 0.5 * (s.q - s.p);
  std::vector<QuadNode> out(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    out[k] = {mid + half * x[k], w[k] * half / (2.0 * kPi * kI)};
  }
  return out;
}

std::vector<Segment> rect_segments(const ContourSpec& c) {
  const Complex hw(c.half_width, 0.0);
  const Complex hh(0.0, c.half_height);
  const Complex ll = c.center - hw - hh;
  const Complex lr = c.center + hw - hh;
  const Complex ur = c.center + hw + hh;
  const Complex ul = c.center - hw + hh;
  return {{ll, lr}, {lr, ur}, {ur, ul}, {ul, ll}};
}

// Accumulates S_p += weight * zeta^p * X for p = 0..2K-1, and the integrand
// magnitude that bounds the quadrature noise.
void accumulate(Moments& m, Complex z, Complex weight, const MatrixXcd& x) {
  const Complex zeta = (z - m.contour.center) / m.contour.scale();
  Complex factor = weight;
  double largest = 0.0;
  for (auto& b : m.blocks) {
    b.noalias() += factor * x;
    largest = std::max(largest, std::abs(factor));
    factor *= zeta;
  }
  m.integrand_scale += largest * x.norm();
}

std::vector<MatrixXcd> zero_blocks(const SsmParams& params, int n) {
  return std::vector<MatrixXcd>(2 * params.moments, MatrixXcd::Zero(n, params.block));
}

MatrixXcd solve_at(const NepProblem& problem, Complex z, const MatrixXcd& v) {
  MatrixXcd x;
  try {
    x = problem.solve(z, v);
  } catch (const SolverError& e) {
    throw ContourHitError(std::string("contour node hits an eigenvalue: ") + e.what(), z);
  }
  if (!x.allFinite()) throw ContourHitError("contour node hits an eigenvalue", z);
  return x;
}

double residual_of(const MatrixXcd& a, const VectorXcd& v, double reference) {
  const double an = std::max(a.norm(), reference);
  const double vn = v.norm();
  if (an == 0.0 || vn == 0.0) return 1.0;
  return (a * v).norm() / (an * vn);
}

// Largest ||A||_F over the contour corners. A(lambda) alone can vanish
// entirely, as for (z - lambda0) I, and then carries no scale.
double corner_scale(const NepProblem& problem, const ContourSpec& c) {
  double s = 0.0;
  for (double sx : {-1.0, 1.0}) {
    for (double sy : {-1.0, 1.0}) {
      s = std::max(s, problem.matrix(c.center + Complex(sx * c.half_width, sy * c.half_height)).norm());
    }
  }
  return s;
}

// Groups values closer than tol (transitively); returns member indices per group.
std::vector<std::vector<int>> clusters(const std::vector<Complex>& values, double tol) {
  const int m = static_cast<int>(values.size());
  std::vector<int> parent(m);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      if (std::abs(values[i] - values[j]) < tol) parent[find(i)] = find(j);
    }
  }
  std::vector<std::vector<int>> groups;
  std::vector<int> slot(m, -1);
  for (int i = 0; i < m; ++i) {
    const int r = find(i);
    if (slot[r] < 0) {
      slot[r] = static_cast<int>(groups.size());
      groups.emplace_back();
    }
    groups[slot[r]].push_back(i);
  }
  return groups;
}

bool lambda_less(Complex a, Complex b) {
  if (a.real() != b.real()) return a.real() < b.real();
  return a.imag() < b.imag();
}

}  // namespace

void ContourSpec::validate() const {
  if (!(half_width > 0.0) || !(half_height > 0.0) || !std::isfinite(half_width) ||
      !std::isfinite(half_height)) {
    throw DomainError("contour: half extents must be positive");
  }
  if (nodes_per_side < 1) throw DomainError("contour: nodes_per_side must be >= 1");
}

bool ContourSpec::contains(Complex z) const { return rect().contains(z); }

Rect ContourSpec::rect() const {
  return {center.real() - half_width, center.real() + half_width, center.imag() - half_height,
          center.imag() + half_height};
}

ContourSpec ContourSpec::from_rect(const Rect& r, int nodes_per_side) {
  ContourSpec c{Complex(0.5 * (r.re_min + r.re_max), 0.5 * (r.im_min + r.im_max)),
                0.5 * (r.re_max - r.re_min), 0.5 * (r.im_max - r.im_min), nodes_per_side};
  c.validate();
  return c;
}

void SsmParams::validate() const {
  if (moments < 1 || block < 1 || nodes_per_side < 1) {
    throw DomainError("ssm: moments, block size and nodes per side must be >= 1");
  }
  if (!(svd_rel_tol > 0.0) || !(residual_tol > 0.0) || !(cluster_tol >= 0.0)) {
    throw DomainError("ssm: tolerances must be positive");
  }
}

NepProblem dense_problem(int size, std::function<MatrixXcd(Complex)> assemble) {
  NepProblem p;
  p.size = size;
  p.matrix = assemble;
  p.solve = [assemble](Complex z, const MatrixXcd& v) -> MatrixXcd {
    const Eigen::PartialPivLU<MatrixXcd> lu(assemble(z));
    const double rc = lu.rcond();
    if (!(rc >= 4.0 * std::numeric_limits<double>::epsilon())) {
      throw SolverError("matrix is singular to working precision", rc);
    }
    return lu.solve(v);
  };
  return p;
}

void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  if (n < 1) throw DomainError("gauss_legendre: n must be >= 1");
  // P_n(t) and P_n'(t) by the three-term recurrence.
  auto legendre = [n](double t) {
    double p0 = 1.0;
    double p1 = t;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    if (n == 1) return std::pair{t, 1.0};
    return std::pair{p1, n * (t * p1 - p0) / (t * t - 1.0)};
  };
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double t = std::cos(kPi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto [p, dp] = legendre(t);
      const double dt = p / dp;
      t -= dt;
      if (std::abs(dt) < 1e-16) break;
    }
    const double dp = legendre(t).second;
    const double wt = 2.0 / ((1.0 - t * t) * dp * dp);
    x[i] = -t;
    x[n - 1 - i] = t;
    w[i] = wt;
    w[n - 1 - i] = wt;
  }
  if (n % 2 == 1) x[n / 2] = 0.0;
}

MatrixXcd probe_block(int n, int cols, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  // Top 53 bits to [0, 1): identical on every platform, unlike the
  // implementation-defined standard distributions.
  auto uniform = [&gen]() { return static_cast<double>(gen() >> 11) * 0x1.0p-53; };
  MatrixXcd v(n, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < n; ++i) {
      const double re = 2.0 * uniform() - 1.0;
      const double im = 2.0 * uniform() - 1.0;
      v(i, j) = Complex(re, im);
    }
  }
  return v;
}

std::vector<QuadNode> contour_nodes(const ContourSpec& contour) {
  contour.validate();
  std::vector<double> x, w;
  gauss_legendre(contour.nodes_per_side, x, w);
  std::vector<QuadNode> out;
  for (const Segment& s : rect_segments(contour)) {
    const auto nodes = segment_nodes(s, x, w);
    out.insert(out.end(), nodes.begin(), nodes.end());
  }
  return out;
}

Moments compute_moments(const NepProblem& problem, const ContourSpec& contour,
                        const SsmParams& params) {
  params.validate();
  const MatrixXcd v = probe_block(problem.size, params.block, params.seed);
  Moments m{contour, zero_blocks(params, problem.size)};
  for (const QuadNode& node : contour_nodes(contour)) {
    accumulate(m, node.z, node.weight, solve_at(problem, node.z, v));
  }
  return m;
}

Extraction extract_eigen(const Moments& moments, const NepProblem& problem,
                         const SsmParams& params) {
  params.validate();
  const int k = params.moments;
  if (static_cast<int>(moments.blocks.size()) < 2 * k) {
    throw DomainError("extract_eigen: need 2K moment blocks");
  }
  const int n = static_cast<int>(moments.blocks[0].rows());
  const int l = static_cast<int>(moments.blocks[0].cols());
  MatrixXcd h(k * n, k * l);
  MatrixXcd hs(k * n, k * l);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      h.block(i * n, j * l, n, l) = moments.blocks[i + j];
      hs.block(i * n, j * l, n, l) = moments.blocks[i + j + 1];
    }
  }
  Extraction out;
  const Eigen::JacobiSVD<MatrixXcd> svd(h, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || !(sv[0] > 0.0)) return out;
  // Analytic parts cancel only to quadrature accuracy relative to the
  // integrand, so a Hankel matrix at that level carries no rank.
  const double floor = params.svd_rel_tol * std::max(sv[0], moments.integrand_scale);
  int m = 0;
  while (m < sv.size() && sv[m] > floor) ++m;
  out.rank = m;
  if (m == 0) return out;
  out.condition = sv[0] / sv[m - 1];
  out.ill_conditioned = out.condition > 1e10;

  const MatrixXcd um = svd.matrixU().leftCols(m);
  const MatrixXcd wm = svd.matrixV().leftCols(m);
  const Eigen::VectorXd inv = sv.head(m).cwiseInverse();
  const MatrixXcd b = um.adjoint() * hs * wm * inv.asDiagonal();
  const Eigen::ComplexEigenSolver<MatrixXcd> es(b);
  if (es.info() != Eigen::Success) throw SolverError("extract_eigen: reduced eigensolver failed", 0.0);

  const ContourSpec& c = moments.contour;
  std::vector<Complex> lambdas(m);
  for (int i = 0; i < m; ++i) lambdas[i] = c.center + c.scale() * es.eigenvalues()[i];
  const MatrixXcd vectors = um.topRows(n) * es.eigenvectors();

  double reference = -1.0;
  for (const auto& group : clusters(lambdas, params.cluster_tol)) {
    Complex mean{0.0, 0.0};
    for (int i : group) mean += lambdas[i];
    mean /= static_cast<double>(group.size());
    EigenPair pair{mean, VectorXcd(), 1.0, static_cast<int>(group.size())};
    if (!c.contains(mean)) continue;
    if (reference < 0.0) reference = corner_scale(problem, c);
    const MatrixXcd a = problem.matrix(mean);
    for (int i : group) {
      VectorXcd v = vectors.col(i);
      const double nv = v.norm();
      if (nv > 0.0) v /= nv;
      const double r = residual_of(a, v, reference);
      if (r < pair.residual || pair.vector.size() == 0) {
        pair.residual = r;
        pair.vector = v;
      }
    }
    out.pairs.push_back(std::move(pair));
  }
  std::sort(out.pairs.begin(), out.pairs.end(),
            [](const EigenPair& x, const EigenPair& y) { return lambda_less(x.lambda, y.lambda); });
  return out;
}

std::vector<RegionResult> solve_region(std::span<const NepProblem> problems, const Rect& region,
                                       int nx, int ny, const SsmParams& params) {
  params.validate();
  if (nx < 1 || ny < 1) throw DomainError("solve_region: tile counts must be >= 1");
  if (!(region.re_max > region.re_min) || !(region.im_max > region.im_min) ||
      !std::isfinite(region.re_min + region.re_max + region.im_min + region.im_max)) {
    throw DomainError("solve_region: region must be a finite non-empty rectangle");
  }
  if (region.contains_zero()) throw DomainError("solve_region: region must avoid omega = 0");

  const int nps = params.nodes_per_side;
  std::vector<double> re(nx + 1), im(ny + 1);
  for (int i = 0; i <= nx; ++i) {
    re[i] = i == nx ? region.re_max : region.re_min + (region.re_max - region.re_min) * i / nx;
  }
  for (int j = 0; j <= ny; ++j) {
    im[j] = j == ny ? region.im_max : region.im_min + (region.im_max - region.im_min) * j / ny;
  }
  const int tiles = nx * ny;
  std::vector<ContourSpec> contour(tiles);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      contour[j * nx + i] = ContourSpec::from_rect({re[i], re[i + 1], im[j], im[j + 1]}, nps);
    }
  }

  // Every tile edge once, in canonical direction, with the tiles that use it.
  struct Side {
    Segment seg;
    std::vector<std::pair<int, double>> users;  // tile, orientation sign
  };
  std::vector<Side> sides;
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      Side s{{Complex(re[i], im[j]), Complex(re[i + 1], im[j])}, {}};
      if (j < ny) s.users.emplace_back(j * nx + i, 1.0);
      if (j > 0) s.users.emplace_back((j - 1) * nx + i, -1.0);
      sides.push_back(std::move(s));
    }
  }
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      Side s{{Complex(re[i], im[j]), Complex(re[i], im[j + 1])}, {}};
      if (i < nx) s.users.emplace_back(j * nx + i, -1.0);
      if (i > 0) s.users.emplace_back(j * nx + i - 1, 1.0);
      sides.push_back(std::move(s));
    }
  }
  std::vector<double> gx, gw;
  gauss_legendre(nps, gx, gw);

  const int np = static_cast<int>(problems.size());
  std::vector<MatrixXcd> probes(np);
  std::vector<std::vector<Moments>> moments(np);
  std::vector<std::vector<char>> hit(np, std::vector<char>(tiles, 0));
  for (int p = 0; p < np; ++p) {
    probes[p] = probe_block(problems[p].size, params.block, params.seed);
    for (int t = 0; t < tiles; ++t) moments[p].push_back({contour[t], zero_blocks(params, problems[p].size)});
  }
  for (const Side& side : sides) {
    for (const QuadNode& node : segment_nodes(side.seg, gx, gw)) {
      for (int p = 0; p < np; ++p) {
        bool all_hit = true;
        for (const auto& [t, sign] : side.users) all_hit = all_hit && hit[p][t];
        if (all_hit) continue;
        MatrixXcd x;
        try {
          x = solve_at(problems[p], node.z, probes[p]);
        } catch (const ContourHitError&) {
          for (const auto& [t, sign] : side.users) hit[p][t] = 1;
          continue;
        }
        for (const auto& [t, sign] : side.users) {
          if (!hit[p][t]) accumulate(moments[p][t], node.z, sign * node.weight, x);
        }
      }
    }
  }

  std::vector<RegionResult> results(np);
  for (int p = 0; p < np; ++p) {
    RegionResult& res = results[p];
    std::vector<EigenResult> all;
    std::vector<VectorXcd> vecs;
    for (int t = 0; t < tiles; ++t) {
      TileReport report{t, contour[t].rect(), 0, 0.0, false, 0};
      Moments mom = std::move(moments[p][t]);
      if (hit[p][t]) {
        report.retried = true;
        ContourSpec big = contour[t];
        big.half_width *= kInflate;
        big.half_height *= kInflate;
        try {
          mom = compute_moments(problems[p], big, params);
        } catch (const ContourHitError& e) {
          throw ContourHitError("tile " + std::to_string(t) + " (ix " + std::to_string(t % nx) +
                                    ", iy " + std::to_string(t / nx) +
                                    ") hits an eigenvalue on both its contour and the 1% inflated one",
                                e.node());
        }
      }
      const Extraction ex = extract_eigen(mom, problems[p], params);
      report.rank = ex.rank;
      report.condition = ex.condition;
      for (const EigenPair& e : ex.pairs) {
        if (!(e.residual <= params.residual_tol)) {
          ++report.rejected;
          continue;
        }
        all.push_back({e.lambda, t, Classification::Unclassified, e.residual, true, e.multiplicity});
        vecs.push_back(e.vector);
      }
      res.tiles.push_back(report);
    }
    // Inflated tiles overlap their neighbours: merge copies.
    std::vector<int> order(all.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return lambda_less(all[a].lambda, all[b].lambda); });
    for (int i : order) {
      bool dup = false;
      for (const auto& kept : res.eigen) dup = dup || std::abs(kept.lambda - all[i].lambda) <= 1e-9;
      if (dup) continue;
      res.eigen.push_back(all[i]);
      res.vectors.push_back(vecs[i]);
    }
  }
  return results;
}

RegionResult solve_region(const NepProblem& problem, const Rect& region, int nx, int ny,
                          const SsmParams& params) {
  return std::move(solve_region(std::span<const NepProblem>(&problem, 1), region, nx, ny, params)[0]);
}

std::vector<Pairing> pair_eigenvalues(std::span<const Complex> a, std::span<const Complex> b) {
  struct Candidate {
    double d;
    int i, j;
  };
  std::vector<Candidate> all;
  for (int i = 0; i < static_cast<int>(a.size()); ++i) {
    for (int j = 0; j < static_cast<int>(b.size()); ++j) all.push_back({std::abs(a[i] - b[j]), i, j});
  }
  std::stable_sort(all.begin(), all.end(),
                   [](const Candidate& x, const Candidate& y) { return x.d < y.d; });
  std::vector<int> match_a(a.size(), -1), match_b(b.size(), -1);
  std::vector<Pairing> out;
  for (const Candidate& c : all) {
    if (match_a[c.i] >= 0 || match_b[c.j] >= 0) continue;
    match_a[c.i] = c.j;
    match_b[c.j] = c.i;
  }
  for (int i = 0; i < static_cast<int>(a.size()); ++i) {
    out.push_back({i, match_a[i], match_a[i] >= 0 ? std::abs(a[i] - b[match_a[i]]) : 0.0});
  }
  for (int j = 0; j < static_cast<int>(b.size()); ++j) {
    if (match_b[j] < 0) out.push_back({-1, j, 0.0});
  }
  return out;
}

KernelCache::KernelCache(systems::TransmissionConfig config, geometry::CurveDiscretization disc)
    : config_(std::move(config)), disc_(std::move(disc)) {}

const systems::Kernels& KernelCache::at(Complex omega) {
  if (!valid_ || last_.omega != omega) {
    last_ = systems::assemble_kernels(config_, disc_, omega);
    valid_ = true;
  }
  return last_;
}

NepProblem transmission_problem(std::shared_ptr<KernelCache> cache, systems::Formulation f) {
  NepProblem p;
  const int n = cache->disc().size();
  p.size = f == systems::Formulation::BM ? 2 * n : 3 * n;
  p.solve = [cache, f](Complex z, const MatrixXcd& v) -> MatrixXcd {
    const systems::BlockSolver solver(cache->config(), cache->at(z), f);
    return solver.solve(v);
  };
  p.matrix = [cache, f](Complex z) -> MatrixXcd {
    return systems::assemble(f, cache->config(), cache->at(z)).matrix;
  };
  return p;
}

}  // namespace tbie::nep_ssm
