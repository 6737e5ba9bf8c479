#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "syzkit/tropical.hpp"

// The local model X(p,q) = {z_0...z_p = f_s(u_1, ..., u_q)}, its SYZ
// projection, the perturbed potential phi~ and a multistart search for the
// critical manifolds of phi~ restricted to X.
namespace syzkit::syz {

using cplx = std::complex<double>;

struct ModelShape {
  int p = 1;
  int q = 1;
  tropical::TailoringParams params;
  double eps_pert = 1e-2;
  double chi_radius = 0.3;
  double s = 1.0;  // tailoring parameter of f_s; 1 is the tailored model

  /// Throws std::invalid_argument on p < 0, q < 1, negative eps_pert,
  /// non-positive chi_radius, s outside [0,1], or invalid params.
  void validate() const;
};

struct AmbientPoint {
  std::vector<cplx> z;  // p+1 entries
  std::vector<cplx> u;  // q entries, all nonzero
  double residual = 0.0;
};

/// z_0...z_p - f_s(u). Throws std::invalid_argument on a zero u entry.
cplx constraint(const AmbientPoint& pt, const ModelShape& shape);

/// (eta_1..eta_p, xi_1..xi_q) with eta_i = |z_0|^2 - |z_i|^2, xi_j = log|u_j|.
std::vector<double> project_syz(const AmbientPoint& pt);

double potential_phi(const AmbientPoint& pt, const ModelShape& shape);

/// chi = 1 - prod_{i<j} (1 - b(|z_i|) b(|z_j|)), where b falls from 1 at
/// chi_radius/2 to 0 at chi_radius. Gradient entries are d/dRe z_i and
/// d/dIm z_i, interleaved.
struct BumpValue {
  double value;
  std::vector<double> gradient;
};

BumpValue bump_chi(std::span<const cplx> z, const ModelShape& shape);

double potential_tilde(const AmbientPoint& pt, const ModelShape& shape);

// Log-polar real coordinates used by the solver:
//   x = (Re z_0, Im z_0, ..., Re z_p, Im z_p, xi_1..xi_q, theta_1..theta_q).
std::size_t coord_dim(const ModelShape& shape);
Eigen::VectorXd to_coords(const AmbientPoint& pt, const ModelShape& shape);
AmbientPoint from_coords(const Eigen::VectorXd& x, const ModelShape& shape);

double potential_tilde_coords(const Eigen::VectorXd& x, const ModelShape& shape);
Eigen::VectorXd potential_tilde_gradient(const Eigen::VectorXd& x, const ModelShape& shape);
Eigen::VectorXd potential_phi_gradient(const Eigen::VectorXd& x, const ModelShape& shape);

/// (Re G, Im G) and its 2 x N real Jacobian, G = z_0...z_p - f_s.
Eigen::Vector2d constraint_coords(const Eigen::VectorXd& x, const ModelShape& shape);
Eigen::MatrixXd constraint_jacobian(const Eigen::VectorXd& x, const ModelShape& shape);

/// Minimum-norm Newton iteration x <- x - J^+ G until |G| <= tol. Returns
/// nullopt if it fails to converge or J loses rank.
std::optional<Eigen::VectorXd> project_to_manifold(const Eigen::VectorXd& x, const ModelShape& shape,
                                                   double tol = 1e-13, int max_iter = 60);

struct TangentGradient {
  Eigen::VectorXd vector;  // in log-polar coordinates
  double norm;
};

/// Orthogonal projection of grad phi~ onto ker dG. Throws std::runtime_error
/// when dG is rank deficient.
TangentGradient riemannian_grad(const Eigen::VectorXd& x, const ModelShape& shape);
TangentGradient riemannian_grad(const AmbientPoint& pt, const ModelShape& shape);

struct HessianReport {
  std::vector<double> eigenvalues;  // ascending
  int neg_count = 0;
  int zero_count = 0;
  int pos_count = 0;
  double zero_threshold = 0.0;
  bool stable = true;  // counts unchanged when the threshold is halved
};

/// Spectrum of a symmetric matrix split by zero_threshold = rel * max|eig|.
HessianReport classify_spectrum(const Eigen::MatrixXd& h, double rel_threshold);

/// Hessian of phi~ restricted to the tangent space of X at a point of X
/// (the Lagrangian Hessian T^t (D grad_R) T), by central differences of the
/// projected gradient.
Eigen::MatrixXd restricted_hessian(const Eigen::VectorXd& x, const ModelShape& shape,
                                   double step = 1e-6);

struct CatalogEntry {
  std::vector<int> I;  // 1-based, sorted
  tropical::BasePoint xi;
};

/// One entry per subset I of {1..q}, ordered by |I| then lexicographically.
std::vector<CatalogEntry> predicted_catalog(const ModelShape& shape, double tol = 1e-10);

struct SolverOptions {
  double grad_tol = 1e-10;        // stop once ||grad_R|| falls below this
  double accept_tol = 1e-7;       // converged starts must reach this
  int max_iter = 200;
  double zero_rel_threshold = 1e-5;
  double cluster_radius = 1e-3;   // sup-distance in pi-coordinates
  double fd_step = 1e-6;
  int threads = 0;                // 0: hardware concurrency capped by SYZ_SKELETON_THREADS
};

struct CriticalManifold {
  std::optional<std::vector<int>> I;  // matched catalog entry, if any
  tropical::BasePoint base_xi;
  std::vector<double> eta;
  int index = 0;
  int nullity = 0;
  HessianReport hessian;
  AmbientPoint representative;
  double grad_norm = 0.0;
  double z_radius = 0.0;              // max |z_i| of the representative
  std::vector<std::size_t> members;   // start indices
};

struct CriticalSearch {
  std::vector<CriticalManifold> manifolds;
  std::size_t n_starts = 0;
  std::size_t converged = 0;
  std::size_t discarded = 0;
};

/// Multistart Levenberg-Marquardt on ||grad_R phi~||, deterministic in
/// (shape, n_starts, seed, options).
CriticalSearch find_critical_manifolds(const ModelShape& shape, std::size_t n_starts,
                                       std::uint64_t seed, const SolverOptions& options = {});

/// Matches a base point against the catalog: every eta_i within radius_eta of
/// 0 and xi within radius_xi in sup-norm. Returns the index of the nearest
/// qualifying entry.
std::optional<std::size_t> match_catalog(const std::vector<CatalogEntry>& catalog,
                                         std::span<const double> eta, const tropical::BasePoint& xi,
                                         double radius_eta, double radius_xi);

struct LeviSample {
  AmbientPoint point;
  double min_eigenvalue;
};

struct LeviReport {
  std::vector<LeviSample> samples;
  double min_eigenvalue;
  std::size_t negative_count;
};

/// Smallest eigenvalue of the complex Hessian of phi~ on the holomorphic
/// tangent space of the untailored hypersurface z_0...z_p = 1 + sum u at pt.
double levi_min_eigenvalue(const AmbientPoint& pt, const ModelShape& shape, double step = 1e-5);

/// Levi-form sampling on the slice {eta = 0} of the untailored hypersurface:
/// xi uniform in [-L-1, 1]^q, every third sample pulled to within 0.3 of the
/// pants so that small z-radii (and the chi transition band) are covered.
LeviReport check_kahler_positivity(const ModelShape& shape, std::size_t n_samples,
                                   std::uint64_t seed);

/// Worker count for parallel sweeps: hardware concurrency, capped by the
/// SYZ_SKELETON_THREADS environment variable.
unsigned worker_count(int requested = 0);

}  // namespace syzkit::syz
