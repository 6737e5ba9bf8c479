#include "syzkit/tropical.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "syzkit/kernels.hpp"
#include "syzkit/smoothstep.hpp"

namespace syzkit::tropical {

namespace {

void check_chamber(const BasePoint& xi, ChamberId i) {
  if (i.index < 0 || static_cast<std::size_t>(i.index) > xi.dim()) {
    throw std::invalid_argument("chamber index " + std::to_string(i.index) + " out of range");
  }
}

// Value of the affine form indexed by k (0 for the constant term).
double form(const BasePoint& xi, int k) { return k == 0 ? 0.0 : xi[k - 1]; }

}  // namespace

void TailoringParams::validate() const {
  if (!(eps > 0.0)) throw std::invalid_argument("tailoring eps must be positive");
  if (!(L >= 10.0 * eps)) {
    throw std::invalid_argument("tailoring L must be at least 10*eps (got L=" + std::to_string(L) +
                                ", eps=" + std::to_string(eps) + ")");
  }
}

Classification classify_chamber(const BasePoint& xi, double tol) {
  const int q = static_cast<int>(xi.dim());
  double best = form(xi, 0);
  int arg = 0;
  for (int k = 1; k <= q; ++k) {
    if (form(xi, k) > best) {
      best = form(xi, k);
      arg = k;
    }
  }
  std::vector<int> near;
  for (int k = 0; k <= q; ++k) {
    if (best - form(xi, k) <= tol) near.push_back(k);
  }
  if (near.size() == 1) return ChamberId{arg};
  const int dim = q - (static_cast<int>(near.size()) - 1);
  return TropicalCell{std::move(near), dim};
}

std::vector<TropicalCell> enumerate_spine_cells(int q) {
  if (q < 1) throw std::invalid_argument("enumerate_spine_cells: q must be >= 1");
  if (q > 20) throw std::invalid_argument("enumerate_spine_cells: q too large");
  std::vector<TropicalCell> cells;
  const unsigned total = 1u << (q + 1);
  for (unsigned mask = 0; mask < total; ++mask) {
    const int size = std::popcount(mask);
    if (size < 2) continue;
    std::vector<int> ties;
    for (int k = 0; k <= q; ++k) {
      if (mask & (1u << k)) ties.push_back(k);
    }
    cells.push_back({std::move(ties), q - (size - 1)});
  }
  std::sort(cells.begin(), cells.end(), [](const TropicalCell& a, const TropicalCell& b) {
    if (a.dim != b.dim) return a.dim > b.dim;
    return a.tie_set < b.tie_set;
  });
  return cells;
}

double dominance_gap(const BasePoint& xi) {
  double first = -std::numeric_limits<double>::infinity();
  double second = first;
  for (int k = 0; k <= static_cast<int>(xi.dim()); ++k) {
    const double v = form(xi, k);
    if (v > first) {
      second = first;
      first = v;
    } else if (v > second) {
      second = v;
    }
  }
  return first - second;
}

ChamberProjection project_to_chamber(const BasePoint& xi, ChamberId i) {
  check_chamber(xi, i);
  const int q = static_cast<int>(xi.dim());
  // Facet normals a with the chamber = {y : a.y >= 0 for every row}.
  Eigen::MatrixXd facets = Eigen::MatrixXd::Zero(q, q);
  if (i.index == 0) {
    for (int k = 0; k < q; ++k) facets(k, k) = -1.0;
  } else {
    const int c = i.index - 1;
    int row = 0;
    facets(row++, c) = 1.0;
    for (int k = 0; k < q; ++k) {
      if (k == c) continue;
      facets(row, c) = 1.0;
      facets(row, k) = -1.0;
      ++row;
    }
  }

  const Eigen::Map<const Eigen::VectorXd> x(xi.xi.data(), q);
  ChamberProjection best{{}, std::numeric_limits<double>::infinity()};
  const unsigned total = 1u << q;
  for (unsigned active = 0; active < total; ++active) {
    Eigen::VectorXd y = x;
    const int na = std::popcount(active);
    if (na > 0) {
      Eigen::MatrixXd a(na, q);
      int r = 0;
      for (int k = 0; k < q; ++k) {
        if (active & (1u << k)) a.row(r++) = facets.row(k);
      }
      // Orthogonal projection onto the null space of the active facets.
      const Eigen::VectorXd coeff = (a * a.transpose()).completeOrthogonalDecomposition().solve(a * x);
      y = x - a.transpose() * coeff;
    }
    const Eigen::VectorXd slack = facets * y;
    if (slack.minCoeff() < -1e-12) continue;
    const double d = (y - x).norm();
    if (d < best.distance) {
      best.distance = d;
      best.point.assign(y.data(), y.data() + q);
    }
  }
  return best;
}

double distance_to_chamber(const BasePoint& xi, ChamberId i) {
  return project_to_chamber(xi, i).distance;
}

ChebyshevDistance chebyshev_distance_to_chamber(const BasePoint& xi, ChamberId i) {
  check_chamber(xi, i);
  const std::size_t q = xi.dim();
  struct Branch {
    double value;
    int plus;   // coordinate with coefficient +w (or -1)
    int minus;  // coordinate with coefficient -w (or -1)
    double w;
  };
  std::vector<Branch> branches;
  branches.push_back({0.0, -1, -1, 0.0});
  if (i.index == 0) {
    for (std::size_t k = 0; k < q; ++k) branches.push_back({xi[k], static_cast<int>(k), -1, 1.0});
  } else {
    const int c = i.index - 1;
    branches.push_back({-xi[c], -1, c, 1.0});
    for (std::size_t k = 0; k < q; ++k) {
      if (static_cast<int>(k) == c) continue;
      branches.push_back({0.5 * (xi[k] - xi[c]), static_cast<int>(k), c, 0.5});
    }
  }
  std::size_t arg = 0;
  for (std::size_t b = 1; b < branches.size(); ++b) {
    if (branches[b].value > branches[arg].value) arg = b;
  }
  double runner = -std::numeric_limits<double>::infinity();
  for (std::size_t b = 0; b < branches.size(); ++b) {
    if (b != arg) runner = std::max(runner, branches[b].value);
  }
  ChebyshevDistance out{branches[arg].value, std::vector<double>(q, 0.0),
                        branches[arg].value - runner};
  if (branches[arg].plus >= 0) out.gradient[branches[arg].plus] += branches[arg].w;
  if (branches[arg].minus >= 0) out.gradient[branches[arg].minus] -= branches[arg].w;
  return out;
}

double polygon_margin(std::span<const double> moduli) {
  const double total = std::accumulate(moduli.begin(), moduli.end(), 0.0);
  const double top = *std::max_element(moduli.begin(), moduli.end());
  return top - (total - top);
}

bool polygon_condition(std::span<const double> moduli, double tol) {
  return polygon_margin(moduli) <= tol;
}

std::vector<double> untailored_moduli(const BasePoint& xi) {
  std::vector<double> m(xi.dim() + 1, 1.0);
  for (std::size_t j = 0; j < xi.dim(); ++j) m[j + 1] = std::exp(xi[j]);
  return m;
}

bool amoeba_contains(const BasePoint& xi, double tol) {
  return polygon_condition(untailored_moduli(xi), tol);
}

ArgumentSearch argument_search(std::span<const double> moduli, int grid_per_dim) {
  if (grid_per_dim < 8) throw std::invalid_argument("argument_search: grid_per_dim must be >= 8");
  const std::size_t q = moduli.size() - 1;
  const kernels::AngleTable table(static_cast<std::size_t>(grid_per_dim));
  const kernels::GridMin grid = kernels::grid_min_modulus_sq(moduli, table);
  const auto digits = kernels::decode_grid_index(grid.index, q, table.size());

  Eigen::VectorXd start(q);
  for (std::size_t k = 0; k < q; ++k) start[k] = table.angle(digits[k]);

  auto residual = [&](const Eigen::VectorXd& t) {
    Eigen::Vector2d r(moduli[0], 0.0);
    for (std::size_t k = 0; k < q; ++k) {
      r[0] += moduli[k + 1] * std::cos(t[k]);
      r[1] += moduli[k + 1] * std::sin(t[k]);
    }
    return r;
  };

  // Damped minimum-norm Gauss-Newton in the 2-dim residual space.
  auto descend = [&](Eigen::VectorXd theta) {
    Eigen::Vector2d r = residual(theta);
    double val = r.squaredNorm();
    double mu = 1e-6;
    for (int iter = 0; iter < 200 && val > 1e-30; ++iter) {
      Eigen::MatrixXd jac(2, q);
      for (std::size_t k = 0; k < q; ++k) {
        jac(0, k) = -moduli[k + 1] * std::sin(theta[k]);
        jac(1, k) = moduli[k + 1] * std::cos(theta[k]);
      }
      const Eigen::Matrix2d normal = jac * jac.transpose() + mu * Eigen::Matrix2d::Identity();
      const Eigen::VectorXd trial = theta - jac.transpose() * normal.ldlt().solve(r);
      const Eigen::Vector2d rt = residual(trial);
      if (rt.squaredNorm() < val) {
        theta = trial;
        r = rt;
        val = rt.squaredNorm();
        mu = std::max(mu * 0.1, 1e-15);
      } else {
        mu *= 10.0;
        if (mu > 1e6) break;
      }
    }
    return std::pair{theta, val};
  };

  auto [theta, best] = descend(start);
  // Collinear configurations are stationary for Gauss-Newton; restart from
  // small sign-pattern perturbations of the grid point when stuck there.
  const double scale = *std::max_element(moduli.begin(), moduli.end());
  const std::size_t patterns = std::min<std::size_t>(std::size_t{1} << q, 16);
  for (std::size_t pat = 1; pat < patterns && best > 1e-24 * scale * scale; ++pat) {
    Eigen::VectorXd kick = start;
    for (std::size_t k = 0; k < q; ++k) kick[k] += ((pat >> k) & 1 ? 0.05 : -0.05) * (1.0 + 0.1 * k);
    auto [t2, v2] = descend(kick);
    if (v2 < best) {
      theta = t2;
      best = v2;
    }
  }
  ArgumentSearch out{std::sqrt(std::min(best, grid.value)), {}};
  if (best <= grid.value) {
    out.angles.assign(theta.data(), theta.data() + q);
  } else {
    for (std::size_t k = 0; k < q; ++k) out.angles.push_back(table.angle(digits[k]));
  }
  return out;
}

bool amoeba_contains_oracle(const BasePoint& xi, int grid_per_dim, double tol) {
  return argument_search(untailored_moduli(xi), grid_per_dim).min_modulus < tol;
}

PsiValue psi(ChamberId i, const BasePoint& xi, const TailoringParams& params) {
  const ChebyshevDistance d = chebyshev_distance_to_chamber(xi, i);
  const Smoothstep s = window_step(d.value, 0.5 * params.eps, params.eps);
  PsiValue out{s.value, d.gradient};
  for (double& g : out.gradient) g *= s.slope;
  return out;
}

TailoringCoefficients tailoring_coefficients(const BasePoint& xi, double s,
                                             const TailoringParams& params) {
  const std::size_t q = xi.dim();
  TailoringCoefficients out{std::vector<double>(q + 1, 1.0),
                            std::vector<std::vector<double>>(q + 1, std::vector<double>(q, 0.0))};
  if (s == 0.0) return out;
  for (std::size_t k = 0; k <= q; ++k) {
    const PsiValue p = psi(ChamberId{static_cast<int>(k)}, xi, params);
    out.c[k] = 1.0 - s * p.value;
    for (std::size_t j = 0; j < q; ++j) out.gradient[k][j] = -s * p.gradient[j];
  }
  return out;
}

TailoredValue f_s_logpolar(std::span<const double> xi, std::span<const double> theta, double s,
                           const TailoringParams& params) {
  const std::size_t q = xi.size();
  if (theta.size() != q) throw std::invalid_argument("f_s: xi/theta size mismatch");
  const BasePoint base{std::vector<double>(xi.begin(), xi.end())};
  const TailoringCoefficients tc = tailoring_coefficients(base, s, params);

  std::vector<std::complex<double>> u(q);
  for (std::size_t k = 0; k < q; ++k) u[k] = std::polar(std::exp(xi[k]), theta[k]);

  TailoredValue out;
  out.value = tc.c[0];
  for (std::size_t k = 0; k < q; ++k) out.value += tc.c[k + 1] * u[k];
  out.d_dxi.assign(q, 0.0);
  out.d_dtheta.assign(q, 0.0);
  out.d_du.assign(q, 0.0);
  out.d_dubar.assign(q, 0.0);
  const std::complex<double> I(0.0, 1.0);
  for (std::size_t j = 0; j < q; ++j) {
    std::complex<double> dx = tc.gradient[0][j];
    for (std::size_t k = 0; k < q; ++k) dx += tc.gradient[k + 1][j] * u[k];
    dx += tc.c[j + 1] * u[j];
    out.d_dxi[j] = dx;
    out.d_dtheta[j] = I * tc.c[j + 1] * u[j];
    out.d_du[j] = 0.5 * (out.d_dxi[j] - I * out.d_dtheta[j]) / u[j];
    out.d_dubar[j] = 0.5 * (out.d_dxi[j] + I * out.d_dtheta[j]) / std::conj(u[j]);
  }
  return out;
}

TailoredValue f_s(std::span<const std::complex<double>> u, double s,
                  const TailoringParams& params) {
  std::vector<double> xi(u.size());
  std::vector<double> theta(u.size());
  for (std::size_t k = 0; k < u.size(); ++k) {
    if (u[k] == 0.0) throw std::invalid_argument("f_s: u coordinate " + std::to_string(k + 1) + " is zero");
    xi[k] = std::log(std::abs(u[k]));
    theta[k] = std::arg(u[k]);
  }
  TailoredValue out = f_s_logpolar(xi, theta, s, params);
  // Evaluate at the given u (not its polar round trip) when untailored.
  if (s == 0.0) {
    out.value = 1.0;
    for (const auto& uk : u) out.value += uk;
  }
  return out;
}

std::vector<double> tailored_moduli(const BasePoint& xi, double s, const TailoringParams& params) {
  const TailoringCoefficients tc = tailoring_coefficients(xi, s, params);
  std::vector<double> m(xi.dim() + 1);
  m[0] = std::abs(tc.c[0]);
  for (std::size_t j = 0; j < xi.dim(); ++j) m[j + 1] = std::abs(tc.c[j + 1]) * std::exp(xi[j]);
  return m;
}

bool tailored_amoeba_contains(const BasePoint& xi, const TailoringParams& params,
                              int grid_per_dim, double tol) {
  return argument_search(tailored_moduli(xi, 1.0, params), grid_per_dim).min_modulus < tol;
}

double constant_term_margin(const BasePoint& xi, const TailoringParams& params, double s) {
  const std::vector<double> m = tailored_moduli(xi, s, params);
  return m[0] - std::accumulate(m.begin() + 1, m.end(), 0.0);
}

BasePoint boundary_point_on_diagonal(std::span<const int> I, int q, const TailoringParams& params,
                                     double tol, double s) {
  if (I.empty()) throw std::invalid_argument("boundary_point_on_diagonal: I must be nonempty");
  for (int i : I) {
    if (i < 1 || i > q) throw std::invalid_argument("boundary_point_on_diagonal: index out of range");
  }
  auto point = [&](double t) {
    BasePoint xi{std::vector<double>(q, -params.L)};
    for (int i : I) xi.xi[i - 1] = t;
    return xi;
  };
  double lo = -params.L;
  double hi = 1.0;
  const double g_lo = constant_term_margin(point(lo), params, s);
  const double g_hi = constant_term_margin(point(hi), params, s);
  if (!(g_lo > 0.0 && g_hi <= 0.0)) {
    throw std::runtime_error("boundary_point_on_diagonal: no crossing bracketed on [-L, 1]");
  }
  while (hi - lo >= tol) {
    const double mid = 0.5 * (lo + hi);
    if (constant_term_margin(point(mid), params, s) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return point(0.5 * (lo + hi));
}

}  // namespace syzkit::tropical
