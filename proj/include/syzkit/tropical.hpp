#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <variant>
#include <vector>

// Tropical geometry of the base slice {eta = 0} ~ R^q of the SYZ fibration:
// the spine of max(0, xi_1, ..., xi_q), its q+1 chambers, membership in the
// amoeba of 1 + u_1 + ... + u_q, and the tailoring deformation f_s.
namespace syzkit::tropical {

/// A point xi of the base slice (log-radii of the u-coordinates).
struct BasePoint {
  std::vector<double> xi;

  std::size_t dim() const { return xi.size(); }
  double operator[](std::size_t j) const { return xi[j]; }
};

/// Cell of the spine: the affine forms (0 for index 0, xi_i for index i)
/// indexed by tie_set agree and dominate the rest.
struct TropicalCell {
  std::vector<int> tie_set;  // sorted, size >= 2, entries in {0..q}
  int dim;                   // q - (|tie_set| - 1)

  bool operator==(const TropicalCell&) const = default;
};

/// Chamber C_i of the spine complement; C_0 is the all-negative orthant.
struct ChamberId {
  int index;

  bool operator==(const ChamberId&) const = default;
};

struct TailoringParams {
  double eps = 0.5;  // width of the tailoring collar
  double L = 5.0;    // base torus sits at xi = (-L, ..., -L)

  /// Throws std::invalid_argument unless eps > 0 and L >= 10 eps.
  void validate() const;
};

using Classification = std::variant<ChamberId, TropicalCell>;

/// Strict dominant term among (0, xi_1, ..., xi_q) if it leads the runner-up
/// by more than tol, otherwise the spine cell of every index within tol of the
/// maximum.
Classification classify_chamber(const BasePoint& xi, double tol);

/// All 2^{q+1} - (q+2) cells of the spine, ordered by dimension (descending)
/// then lexicographically by tie set.
std::vector<TropicalCell> enumerate_spine_cells(int q);

/// Dominance gap: max of (0, xi_1, ..., xi_q) minus the runner-up.
double dominance_gap(const BasePoint& xi);

struct ChamberProjection {
  std::vector<double> point;  // nearest point of the closed chamber
  double distance;            // Euclidean
};

/// Euclidean projection onto the closed chamber, by enumerating the faces of
/// the polyhedral cone (at most q facets).
ChamberProjection project_to_chamber(const BasePoint& xi, ChamberId i);

/// Euclidean distance to the closed chamber.
double distance_to_chamber(const BasePoint& xi, ChamberId i);

/// Chebyshev (l-infinity) distance to the closed chamber with its gradient.
///
/// For i = 0 this is max(0, max_k xi_k); for i >= 1 it is
/// max(0, -xi_i, max_{k != i} (xi_k - xi_i)/2). The gradient always has
/// l1-norm <= 1. `branch_margin` is the gap between the active branch and the
/// runner-up; the function is affine on the ball of that radius/2.
struct ChebyshevDistance {
  double value;
  std::vector<double> gradient;
  double branch_margin;
};

ChebyshevDistance chebyshev_distance_to_chamber(const BasePoint& xi, ChamberId i);

/// Closed-form amoeba membership for a linear form with the given term
/// moduli: max <= (sum of the others) + tol.
double polygon_margin(std::span<const double> moduli);
bool polygon_condition(std::span<const double> moduli, double tol);

/// Term moduli (1, e^{xi_1}, ..., e^{xi_q}) of 1 + u_1 + ... + u_q over xi.
std::vector<double> untailored_moduli(const BasePoint& xi);

bool amoeba_contains(const BasePoint& xi, double tol);

/// Brute-force search for a zero of a_0 + sum_k a_k e^{i theta_k}.
struct ArgumentSearch {
  double min_modulus;          // smallest |sum| found
  std::vector<double> angles;  // theta_1..theta_q attaining it (theta_0 = 0)
};

/// Exhaustive grid (grid_per_dim^q, SIMD kernel) then damped Gauss-Newton from
/// the best grid point. moduli = (a_0, ..., a_q).
ArgumentSearch argument_search(std::span<const double> moduli, int grid_per_dim);

bool amoeba_contains_oracle(const BasePoint& xi, int grid_per_dim, double tol);

/// Tailoring function psi_i = S(d(xi, C_i)) with S the quintic smoothstep on
/// the window [eps/2, eps] and d the Chebyshev distance. Its gradient has
/// l1-norm at most 1.875 / (eps/2) = 3.75 / eps.
struct PsiValue {
  double value;
  std::vector<double> gradient;
};

PsiValue psi(ChamberId i, const BasePoint& xi, const TailoringParams& params);

/// Coefficients c_k = 1 - s psi_k(xi), k = 0..q, with gradients in xi.
struct TailoringCoefficients {
  std::vector<double> c;                       // size q+1
  std::vector<std::vector<double>> gradient;   // gradient[k][j] = d c_k / d xi_j
};

TailoringCoefficients tailoring_coefficients(const BasePoint& xi, double s,
                                             const TailoringParams& params);

/// f_s(u) = c_0 + sum_j c_j u_j with c evaluated at xi = Log(u).
///
/// f_s is not holomorphic for s > 0, so both Wirtinger derivatives are
/// returned, together with the log-polar partials used by the optimizer
/// (u_j = exp(xi_j + i theta_j)).
struct TailoredValue {
  std::complex<double> value;
  std::vector<std::complex<double>> d_du;      // df/du_j
  std::vector<std::complex<double>> d_dubar;   // df/d(conj u_j)
  std::vector<std::complex<double>> d_dxi;     // df/dxi_j
  std::vector<std::complex<double>> d_dtheta;  // df/dtheta_j
};

/// Throws std::invalid_argument if some u_j == 0.
TailoredValue f_s(std::span<const std::complex<double>> u, double s,
                  const TailoringParams& params);

/// Log-polar variant; avoids the round trip through u.
TailoredValue f_s_logpolar(std::span<const double> xi, std::span<const double> theta, double s,
                           const TailoringParams& params);

/// Term moduli of the tailored form at xi: (|c_0|, c_1 e^{xi_1}, ...).
std::vector<double> tailored_moduli(const BasePoint& xi, double s, const TailoringParams& params);

/// Argument search for a zero of f_1 with |u_j| = e^{xi_j}.
bool tailored_amoeba_contains(const BasePoint& xi, const TailoringParams& params,
                              int grid_per_dim, double tol);

/// Locates where the path xi_i = t (i in I), xi_j = -L (j not in I) leaves
/// the chamber of the constant term of f_1, i.e. meets the boundary of the
/// tailored amoeba facing the base torus. Bisection on t in [-L, 1] with
/// final bracket width < tol. I holds 1-based indices; s = 0 gives the
/// untailored amoeba. Throws std::runtime_error when the endpoints do not
/// bracket a crossing.
BasePoint boundary_point_on_diagonal(std::span<const int> I, int q, const TailoringParams& params,
                                     double tol, double s = 1.0);

/// Signed dominance of the constant term of f_s: |c_0| - sum_{k>=1} c_k e^{xi_k}.
double constant_term_margin(const BasePoint& xi, const TailoringParams& params, double s = 1.0);

}  // namespace syzkit::tropical
