#pragma once

// Block Sakurai-Sugiura (Hankel) method for A(z) v = 0 inside rectangles.
//
// Moments over a counterclockwise rectangle with shifted-scaled monomials
//
//   S_p = (1/2 pi i) \oint zeta^p A(z)^{-1} V dz,   zeta = (z - c) / r,
//
// where r is the half-diagonal, are approximated by Gauss-Legendre rules on the
// four sides. With the block Hankel matrices H = [S_{i+j}], H< = [S_{i+j+1}],
// i, j = 0..K-1, and the truncated SVD H ~ U_m Sigma_m W_m^H, the eigenvalues
// of B = U_m^H H< W_m Sigma_m^{-1} are the zeta of the eigenvalues inside, and
// the leading n rows of U_m y are the eigenvectors.
//
// Eigenvalues of B closer than cluster_tol are reported once with their count
// as multiplicity (a Jordan block of size d splits into d values at distance
// ~ eps^(1/d); the mean is accurate).

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "tbie/common.hpp"
#include "tbie/eigen_result.hpp"
#include "tbie/geometry.hpp"
#include "tbie/systems.hpp"

namespace tbie::nep_ssm {

struct ContourSpec {
  Complex center;
  double half_width = 0.0;
  double half_height = 0.0;
  int nodes_per_side = 28;

  void validate() const;
  double scale() const { return std::hypot(half_width, half_height); }
  /// Strict interior.
  bool contains(Complex z) const;
  Rect rect() const;
  static ContourSpec from_rect(const Rect& r, int nodes_per_side = 28);
};

struct SsmParams {
  int moments = 4;  ///< K
  int block = 8;    ///< L
  double svd_rel_tol = 1e-12;
  double residual_tol = 1e-8;
  double cluster_tol = 1e-6;
  /// Gauss-Legendre points per tile side in solve_region.
  int nodes_per_side = 28;
  std::uint64_t seed = 20240611;

  void validate() const;
};

/// What the solver needs from A: its size, solves A(z)^{-1} V, and a freshly
/// assembled A(z) for residuals. solve may throw SolverError on a singular A.
struct NepProblem {
  int size = 0;
  std::function<Eigen::MatrixXcd(Complex, const Eigen::MatrixXcd&)> solve;
  std::function<Eigen::MatrixXcd(Complex)> matrix;
};

/// Dense problem from an assembler, solved by LU with partial pivoting.
NepProblem dense_problem(int size, std::function<Eigen::MatrixXcd(Complex)> assemble);

/// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w);

/// n x L probe with entries uniform in [-1, 1] + i [-1, 1] from mt19937_64.
Eigen::MatrixXcd probe_block(int n, int cols, std::uint64_t seed);

struct QuadNode {
  Complex z;
  Complex weight;  ///< includes dz / (2 pi i)
};

std::vector<QuadNode> contour_nodes(const ContourSpec& contour);

struct Moments {
  ContourSpec contour;
  std::vector<Eigen::MatrixXcd> blocks;  ///< S_0..S_{2K-1}, each n x L
  /// Sum over nodes of |weight| max_p |zeta^p| ||A^-1 V||_F.
  double integrand_scale = 0.0;
};

/// Throws ContourHitError when A is singular at a node.
Moments compute_moments(const NepProblem& problem, const ContourSpec& contour,
                        const SsmParams& params);

struct EigenPair {
  Complex lambda;
  Eigen::VectorXcd vector;
  /// ||A(lambda) v|| / (max(||A(lambda)||_F, ||A||_F at the contour corners) ||v||).
  double residual = 0.0;
  int multiplicity = 1;
};

struct Extraction {
  /// Every eigenvalue strictly inside the contour with its residual, sorted;
  /// spurious ones are recognised by a large residual.
  std::vector<EigenPair> pairs;
  int rank = 0;
  /// sigma_1 / sigma_m of the Hankel matrix.
  double condition = 0.0;
  bool ill_conditioned = false;
};

Extraction extract_eigen(const Moments& moments, const NepProblem& problem, const SsmParams& params);

struct TileReport {
  int tile = 0;
  Rect rect;
  int rank = 0;
  double condition = 0.0;
  bool retried = false;
  /// Candidates inside the tile dropped for exceeding residual_tol.
  int rejected = 0;
};

struct RegionResult {
  std::vector<EigenResult> eigen;
  std::vector<Eigen::VectorXcd> vectors;
  std::vector<TileReport> tiles;
};

/// Tiles region into nx x ny rectangles (tile id = iy * nx + ix, ix along the
/// real axis). Every quadrature node is solved once per problem even when two
/// tiles share it. A tile whose contour hits an eigenvalue is redone once with
/// half-extents inflated by 1%; a second hit throws ContourHitError.
std::vector<RegionResult> solve_region(std::span<const NepProblem> problems, const Rect& region,
                                       int nx, int ny, const SsmParams& params);

RegionResult solve_region(const NepProblem& problem, const Rect& region, int nx, int ny,
                          const SsmParams& params);

/// One-to-one nearest-neighbour matching of two eigenvalue lists: pairs are
/// taken greedily in order of increasing distance. Unmatched entries appear
/// with -1 on the other side. Rows follow the order of a, then leftovers of b.
struct Pairing {
  int a = -1;
  int b = -1;
  double distance = 0.0;
};

std::vector<Pairing> pair_eigenvalues(std::span<const Complex> a, std::span<const Complex> b);

/// Remembers the kernels of the last frequency, so that the BM and mixed
/// problems of one run share the assembly at each node.
class KernelCache {
 public:
  KernelCache(systems::TransmissionConfig config, geometry::CurveDiscretization disc);
  const systems::Kernels& at(Complex omega);
  const systems::TransmissionConfig& config() const { return config_; }
  const geometry::CurveDiscretization& disc() const { return disc_; }

 private:
  systems::TransmissionConfig config_;
  geometry::CurveDiscretization disc_;
  systems::Kernels last_;
  bool valid_ = false;
};

NepProblem transmission_problem(std::shared_ptr<KernelCache> cache, systems::Formulation f);

}  // namespace tbie::nep_ssm
