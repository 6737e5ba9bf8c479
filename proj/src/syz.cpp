#include "syzkit/syz.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>

#include <Eigen/Eigenvalues>

#include "syzkit/smoothstep.hpp"

namespace syzkit::syz {

namespace {

std::size_t zdim(const ModelShape& shape) { return 2 * static_cast<std::size_t>(shape.p + 1); }
std::size_t xi_at(const ModelShape& shape, int j) { return zdim(shape) + j; }
std::size_t theta_at(const ModelShape& shape, int j) { return zdim(shape) + shape.q + j; }

cplx z_at(const Eigen::VectorXd& x, int i) { return {x[2 * i], x[2 * i + 1]}; }

void check_u(std::span<const cplx> u) {
  for (std::size_t j = 0; j < u.size(); ++j) {
    if (u[j] == 0.0) throw std::invalid_argument("u coordinate " + std::to_string(j + 1) + " is zero");
  }
}

void check_sizes(const AmbientPoint& pt, const ModelShape& shape) {
  if (pt.z.size() != static_cast<std::size_t>(shape.p + 1) || pt.u.size() != static_cast<std::size_t>(shape.q)) {
    throw std::invalid_argument("point does not match model shape");
  }
}

// Falls from 1 at r = R/2 to 0 at r = R.
Smoothstep falloff(double r, double radius) {
  Smoothstep s = window_step(r, 0.5 * radius, radius);
  return {1.0 - s.value, -s.slope, -s.curvature};
}

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

void ModelShape::validate() const {
  if (p < 0) throw std::invalid_argument("shape.p must be >= 0");
  if (q < 1) throw std::invalid_argument("shape.q must be >= 1");
  if (!(eps_pert >= 0.0)) throw std::invalid_argument("shape.eps_pert must be >= 0");
  if (!(chi_radius > 0.0)) throw std::invalid_argument("shape.chi_radius must be > 0");
  if (!(s >= 0.0 && s <= 1.0)) throw std::invalid_argument("shape.s must lie in [0,1]");
  params.validate();
}

cplx constraint(const AmbientPoint& pt, const ModelShape& shape) {
  check_sizes(pt, shape);
  check_u(pt.u);
  cplx prod = 1.0;
  for (const cplx& zi : pt.z) prod *= zi;
  return prod - tropical::f_s(pt.u, shape.s, shape.params).value;
}

std::vector<double> project_syz(const AmbientPoint& pt) {
  check_u(pt.u);
  std::vector<double> out;
  const double r0 = std::norm(pt.z.at(0));
  for (std::size_t i = 1; i < pt.z.size(); ++i) out.push_back(r0 - std::norm(pt.z[i]));
  for (const cplx& uj : pt.u) out.push_back(std::log(std::abs(uj)));
  return out;
}

double potential_phi(const AmbientPoint& pt, const ModelShape& shape) {
  const std::vector<double> pi = project_syz(pt);
  double v = 0.0;
  for (int i = 0; i < shape.p; ++i) v += pi[i] * pi[i];
  for (int j = 0; j < shape.q; ++j) {
    const double d = pi[shape.p + j] + shape.params.L;
    v += d * d;
  }
  return v;
}

BumpValue bump_chi(std::span<const cplx> z, const ModelShape& shape) {
  const std::size_t n = z.size();
  std::vector<double> r(n);
  std::vector<double> b(n);
  std::vector<double> db(n);
  for (std::size_t i = 0; i < n; ++i) {
    r[i] = std::abs(z[i]);
    const Smoothstep f = falloff(r[i], shape.chi_radius);
    b[i] = f.value;
    db[i] = f.slope;
  }
  auto product_except = [&](std::size_t k, std::size_t l) {
    double prod = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (i == k && j == l) continue;
        prod *= 1.0 - b[i] * b[j];
      }
    }
    return prod;
  };
  BumpValue out{1.0 - product_except(n, n), std::vector<double>(2 * n, 0.0)};
  for (std::size_t k = 0; k < n; ++k) {
    if (db[k] == 0.0 || r[k] == 0.0) continue;
    double dchi_dr = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
      if (l == k) continue;
      dchi_dr += db[k] * b[l] * product_except(std::min(k, l), std::max(k, l));
    }
    out.gradient[2 * k] = dchi_dr * z[k].real() / r[k];
    out.gradient[2 * k + 1] = dchi_dr * z[k].imag() / r[k];
  }
  return out;
}

double potential_tilde(const AmbientPoint& pt, const ModelShape& shape) {
  double radius_sq = 0.0;
  for (const cplx& zi : pt.z) radius_sq += std::norm(zi);
  return potential_phi(pt, shape) + shape.eps_pert * bump_chi(pt.z, shape).value * radius_sq;
}

std::size_t coord_dim(const ModelShape& shape) { return zdim(shape) + 2 * static_cast<std::size_t>(shape.q); }

Eigen::VectorXd to_coords(const AmbientPoint& pt, const ModelShape& shape) {
  check_sizes(pt, shape);
  check_u(pt.u);
  Eigen::VectorXd x(coord_dim(shape));
  for (int i = 0; i <= shape.p; ++i) {
    x[2 * i] = pt.z[i].real();
    x[2 * i + 1] = pt.z[i].imag();
  }
  for (int j = 0; j < shape.q; ++j) {
    x[xi_at(shape, j)] = std::log(std::abs(pt.u[j]));
    x[theta_at(shape, j)] = std::arg(pt.u[j]);
  }
  return x;
}

AmbientPoint from_coords(const Eigen::VectorXd& x, const ModelShape& shape) {
  AmbientPoint pt;
  for (int i = 0; i <= shape.p; ++i) pt.z.push_back(z_at(x, i));
  for (int j = 0; j < shape.q; ++j) {
    pt.u.push_back(std::polar(std::exp(x[xi_at(shape, j)]), x[theta_at(shape, j)]));
  }
  pt.residual = constraint_coords(x, shape).norm();
  return pt;
}

double potential_tilde_coords(const Eigen::VectorXd& x, const ModelShape& shape) {
  double v = 0.0;
  const double r0 = std::norm(z_at(x, 0));
  double radius_sq = r0;
  for (int i = 1; i <= shape.p; ++i) {
    const double ri = std::norm(z_at(x, i));
    v += (r0 - ri) * (r0 - ri);
    radius_sq += ri;
  }
  for (int j = 0; j < shape.q; ++j) {
    const double d = x[xi_at(shape, j)] + shape.params.L;
    v += d * d;
  }
  if (shape.eps_pert != 0.0) {
    std::vector<cplx> z;
    for (int i = 0; i <= shape.p; ++i) z.push_back(z_at(x, i));
    v += shape.eps_pert * bump_chi(z, shape).value * radius_sq;
  }
  return v;
}

Eigen::VectorXd potential_phi_gradient(const Eigen::VectorXd& x, const ModelShape& shape) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(x.size());
  const double r0 = std::norm(z_at(x, 0));
  for (int i = 1; i <= shape.p; ++i) {
    const double eta = r0 - std::norm(z_at(x, i));
    g[0] += 4.0 * eta * x[0];
    g[1] += 4.0 * eta * x[1];
    g[2 * i] -= 4.0 * eta * x[2 * i];
    g[2 * i + 1] -= 4.0 * eta * x[2 * i + 1];
  }
  for (int j = 0; j < shape.q; ++j) g[xi_at(shape, j)] = 2.0 * (x[xi_at(shape, j)] + shape.params.L);
  return g;
}

Eigen::VectorXd potential_tilde_gradient(const Eigen::VectorXd& x, const ModelShape& shape) {
  Eigen::VectorXd g = potential_phi_gradient(x, shape);
  if (shape.eps_pert == 0.0) return g;
  std::vector<cplx> z;
  double radius_sq = 0.0;
  for (int i = 0; i <= shape.p; ++i) {
    z.push_back(z_at(x, i));
    radius_sq += std::norm(z.back());
  }
  const BumpValue chi = bump_chi(z, shape);
  for (std::size_t k = 0; k < zdim(shape); ++k) {
    g[k] += shape.eps_pert * (chi.gradient[k] * radius_sq + 2.0 * chi.value * x[k]);
  }
  return g;
}

Eigen::Vector2d constraint_coords(const Eigen::VectorXd& x, const ModelShape& shape) {
  cplx prod = 1.0;
  for (int i = 0; i <= shape.p; ++i) prod *= z_at(x, i);
  const tropical::TailoredValue f =
      tropical::f_s_logpolar(std::span<const double>(x.data() + zdim(shape), shape.q),
                             std::span<const double>(x.data() + zdim(shape) + shape.q, shape.q),
                             shape.s, shape.params);
  const cplx g = prod - f.value;
  return {g.real(), g.imag()};
}

Eigen::MatrixXd constraint_jacobian(const Eigen::VectorXd& x, const ModelShape& shape) {
  Eigen::MatrixXd jac(2, x.size());
  for (int i = 0; i <= shape.p; ++i) {
    cplx partial = 1.0;
    for (int k = 0; k <= shape.p; ++k) {
      if (k != i) partial *= z_at(x, k);
    }
    jac(0, 2 * i) = partial.real();
    jac(1, 2 * i) = partial.imag();
    jac(0, 2 * i + 1) = -partial.imag();
    jac(1, 2 * i + 1) = partial.real();
  }
  const tropical::TailoredValue f =
      tropical::f_s_logpolar(std::span<const double>(x.data() + zdim(shape), shape.q),
                             std::span<const double>(x.data() + zdim(shape) + shape.q, shape.q),
                             shape.s, shape.params);
  for (int j = 0; j < shape.q; ++j) {
    jac(0, xi_at(shape, j)) = -f.d_dxi[j].real();
    jac(1, xi_at(shape, j)) = -f.d_dxi[j].imag();
    jac(0, theta_at(shape, j)) = -f.d_dtheta[j].real();
    jac(1, theta_at(shape, j)) = -f.d_dtheta[j].imag();
  }
  return jac;
}

std::optional<Eigen::VectorXd> project_to_manifold(const Eigen::VectorXd& x0, const ModelShape& shape,
                                                   double tol, int max_iter) {
  Eigen::VectorXd x = x0;
  for (int it = 0; it < max_iter; ++it) {
    const Eigen::Vector2d g = constraint_coords(x, shape);
    if (g.norm() <= tol) return x;
    const Eigen::MatrixXd jac = constraint_jacobian(x, shape);
    const Eigen::Matrix2d jjt = jac * jac.transpose();
    if (!(jjt.determinant() > 1e-24 * std::max(1.0, jjt.squaredNorm()))) return std::nullopt;
    x -= jac.transpose() * jjt.inverse() * g;
    if (!x.allFinite()) return std::nullopt;
  }
  if (constraint_coords(x, shape).norm() <= tol) return x;
  return std::nullopt;
}

TangentGradient riemannian_grad(const Eigen::VectorXd& x, const ModelShape& shape) {
  const Eigen::MatrixXd jac = constraint_jacobian(x, shape);
  const Eigen::Matrix2d jjt = jac * jac.transpose();
  if (!(jjt.determinant() > 1e-24 * std::max(1.0, jjt.squaredNorm()))) {
    throw std::runtime_error("riemannian_grad: constraint differential is rank deficient");
  }
  const Eigen::VectorXd grad = potential_tilde_gradient(x, shape);
  TangentGradient out;
  out.vector = grad - jac.transpose() * jjt.inverse() * (jac * grad);
  out.norm = out.vector.norm();
  return out;
}

TangentGradient riemannian_grad(const AmbientPoint& pt, const ModelShape& shape) {
  return riemannian_grad(to_coords(pt, shape), shape);
}

namespace {

Eigen::MatrixXd tangent_basis(const Eigen::MatrixXd& jac) {
  const Eigen::Index n = jac.cols();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(jac.transpose());
  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
  return q.rightCols(n - 2);
}

// Columns: directional derivatives of the ambient projected gradient along the
// tangent basis, projected back onto the tangent space.
Eigen::MatrixXd tangent_derivative(const Eigen::VectorXd& x, const Eigen::MatrixXd& basis,
                                   const ModelShape& shape, double step) {
  const Eigen::Index d = basis.cols();
  Eigen::MatrixXd h(d, d);
  for (Eigen::Index k = 0; k < d; ++k) {
    const Eigen::VectorXd plus = riemannian_grad(Eigen::VectorXd(x + step * basis.col(k)), shape).vector;
    const Eigen::VectorXd minus = riemannian_grad(Eigen::VectorXd(x - step * basis.col(k)), shape).vector;
    h.col(k) = basis.transpose() * (plus - minus) / (2.0 * step);
  }
  return h;
}

}  // namespace

Eigen::MatrixXd restricted_hessian(const Eigen::VectorXd& x, const ModelShape& shape, double step) {
  const Eigen::MatrixXd h = tangent_derivative(x, tangent_basis(constraint_jacobian(x, shape)), shape, step);
  return 0.5 * (h + h.transpose());
}

HessianReport classify_spectrum(const Eigen::MatrixXd& h, double rel_threshold) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h, Eigen::EigenvaluesOnly);
  HessianReport out;
  out.eigenvalues.assign(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  double scale = 0.0;
  for (double e : out.eigenvalues) scale = std::max(scale, std::abs(e));
  out.zero_threshold = rel_threshold * scale;
  auto count = [&](double thr, int& neg, int& zero, int& pos) {
    neg = zero = pos = 0;
    for (double e : out.eigenvalues) {
      if (e < -thr) {
        ++neg;
      } else if (e > thr) {
        ++pos;
      } else {
        ++zero;
      }
    }
  };
  count(out.zero_threshold, out.neg_count, out.zero_count, out.pos_count);
  int n2 = 0, z2 = 0, p2 = 0;
  count(0.5 * out.zero_threshold, n2, z2, p2);
  out.stable = n2 == out.neg_count && z2 == out.zero_count && p2 == out.pos_count;
  return out;
}

std::vector<CatalogEntry> predicted_catalog(const ModelShape& shape, double tol) {
  shape.validate();
  const int q = shape.q;
  std::vector<std::vector<int>> subsets;
  for (unsigned mask = 0; mask < (1u << q); ++mask) {
    std::vector<int> I;
    for (int j = 0; j < q; ++j) {
      if (mask & (1u << j)) I.push_back(j + 1);
    }
    subsets.push_back(I);
  }
  std::sort(subsets.begin(), subsets.end(), [](const auto& a, const auto& b) {
    return a.size() != b.size() ? a.size() < b.size() : a < b;
  });
  std::vector<CatalogEntry> out;
  for (const auto& I : subsets) {
    if (I.empty()) {
      out.push_back({I, tropical::BasePoint{std::vector<double>(q, -shape.params.L)}});
    } else {
      out.push_back({I, tropical::boundary_point_on_diagonal(I, q, shape.params, tol, shape.s)});
    }
  }
  return out;
}

std::optional<std::size_t> match_catalog(const std::vector<CatalogEntry>& catalog,
                                         std::span<const double> eta, const tropical::BasePoint& xi,
                                         double radius_eta, double radius_xi) {
  for (double e : eta) {
    if (std::abs(e) > radius_eta) return std::nullopt;
  }
  std::optional<std::size_t> best;
  double best_dist = 0.0;
  for (std::size_t k = 0; k < catalog.size(); ++k) {
    double dist = 0.0;
    for (std::size_t j = 0; j < xi.dim(); ++j) dist = std::max(dist, std::abs(xi[j] - catalog[k].xi[j]));
    if (dist <= radius_xi && (!best || dist < best_dist)) {
      best = k;
      best_dist = dist;
    }
  }
  return best;
}

unsigned worker_count(int requested) {
  unsigned n = requested > 0 ? static_cast<unsigned>(requested) : std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("SYZ_SKELETON_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) n = std::min(n, static_cast<unsigned>(cap));
  }
  return n;
}

namespace {

struct StartResult {
  bool converged = false;
  Eigen::VectorXd x;
  double grad_norm = 0.0;
};

Eigen::VectorXd seed_point(const ModelShape& shape, const std::vector<CatalogEntry>& catalog,
                           std::size_t start, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
  const double L = shape.params.L;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(coord_dim(shape));

  auto set_z = [&](double radius, bool jitter) {
    for (int i = 0; i <= shape.p; ++i) {
      const double r = jitter ? radius * (0.5 + unit(rng)) : radius;
      const cplx z = std::polar(r, angle(rng));
      x[2 * i] = z.real();
      x[2 * i + 1] = z.imag();
    }
  };

  if (start % 2 == 0) {
    const CatalogEntry& entry = catalog[(start / 2) % catalog.size()];
    const std::size_t round = start / (2 * catalog.size());
    for (int j = 0; j < shape.q; ++j) {
      x[xi_at(shape, j)] = entry.xi[j] + 0.05 * (unit(rng) - 0.5);
      x[theta_at(shape, j)] = angle(rng);
    }
    for (int i : entry.I) x[theta_at(shape, i - 1)] = std::numbers::pi + 0.05 * (unit(rng) - 0.5);
    if (entry.I.empty()) {
      set_z(1.0, false);
    } else {
      static constexpr double kRadii[] = {0.0, 1e-3, 0.02, 0.1, 0.3};
      double radius = kRadii[round % std::size(kRadii)];
      if (round % std::size(kRadii) == 2) radius = 0.2 * shape.eps_pert * (0.5 + unit(rng));
      set_z(radius, round >= std::size(kRadii));
    }
  } else {
    for (int j = 0; j < shape.q; ++j) {
      x[xi_at(shape, j)] = -L - 1.0 + (L + 2.0) * unit(rng);
      x[theta_at(shape, j)] = angle(rng);
    }
    set_z(1.5, true);
  }
  return x;
}

StartResult run_start(const ModelShape& shape, const std::vector<CatalogEntry>& catalog, std::size_t start,
                      std::uint64_t seed, const SolverOptions& opt) {
  std::mt19937_64 rng(splitmix(seed ^ splitmix(start)));
  StartResult res;
  const std::optional<Eigen::VectorXd> projected = project_to_manifold(seed_point(shape, catalog, start, rng), shape);
  if (!projected) return res;
  Eigen::VectorXd x = *projected;
  try {
    TangentGradient g = riemannian_grad(x, shape);
    double mu = -1.0;
    for (int it = 0; it < opt.max_iter && g.norm > opt.grad_tol; ++it) {
      const Eigen::MatrixXd basis = tangent_basis(constraint_jacobian(x, shape));
      const Eigen::MatrixXd h = tangent_derivative(x, basis, shape, opt.fd_step);
      const Eigen::VectorXd r = basis.transpose() * g.vector;
      const Eigen::MatrixXd normal = h.transpose() * h;
      if (mu < 0.0) mu = 1e-6 * std::max(normal.diagonal().maxCoeff(), 1e-12);
      bool accepted = false;
      while (!accepted && mu < 1e12) {
        Eigen::MatrixXd damped = normal;
        damped.diagonal().array() += mu;
        Eigen::VectorXd delta = -damped.ldlt().solve(h.transpose() * r);
        const double len = delta.norm();
        if (len > 0.5) delta *= 0.5 / len;
        const std::optional<Eigen::VectorXd> trial = project_to_manifold(x + basis * delta, shape);
        if (trial) {
          const TangentGradient gt = riemannian_grad(*trial, shape);
          if (gt.norm < g.norm) {
            x = *trial;
            g = gt;
            mu = std::max(mu * 0.1, 1e-15);
            accepted = true;
            continue;
          }
        }
        mu *= 10.0;
      }
      if (!accepted) break;
    }
    res.x = x;
    res.grad_norm = g.norm;
    res.converged = g.norm < opt.accept_tol;
  } catch (const std::runtime_error&) {
    res.converged = false;
  }
  return res;
}

}  // namespace

CriticalSearch find_critical_manifolds(const ModelShape& shape, std::size_t n_starts, std::uint64_t seed,
                                       const SolverOptions& opt) {
  shape.validate();
  const std::vector<CatalogEntry> catalog = predicted_catalog(shape);
  std::vector<StartResult> results(n_starts);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < n_starts; k = next++) results[k] = run_start(shape, catalog, k, seed, opt);
  };
  const unsigned n_threads = std::min<std::size_t>(worker_count(opt.threads), std::max<std::size_t>(n_starts, 1));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  CriticalSearch out;
  out.n_starts = n_starts;
  const double radius_xi = std::max(opt.cluster_radius, shape.params.eps);
  for (std::size_t k = 0; k < n_starts; ++k) {
    const StartResult& r = results[k];
    if (!r.converged) {
      ++out.discarded;
      continue;
    }
    ++out.converged;
    const AmbientPoint pt = from_coords(r.x, shape);
    const std::vector<double> pi = project_syz(pt);
    const HessianReport hess =
        classify_spectrum(restricted_hessian(r.x, shape, opt.fd_step), opt.zero_rel_threshold);

    CriticalManifold* home = nullptr;
    for (CriticalManifold& m : out.manifolds) {
      if (m.index != hess.neg_count || m.nullity != hess.zero_count) continue;
      double dist = 0.0;
      for (int i = 0; i < shape.p; ++i) dist = std::max(dist, std::abs(pi[i] - m.eta[i]));
      for (int j = 0; j < shape.q; ++j) dist = std::max(dist, std::abs(pi[shape.p + j] - m.base_xi[j]));
      if (dist <= opt.cluster_radius) {
        home = &m;
        break;
      }
    }
    if (home == nullptr) {
      out.manifolds.emplace_back();
      home = &out.manifolds.back();
      home->index = hess.neg_count;
      home->nullity = hess.zero_count;
      home->grad_norm = std::numeric_limits<double>::infinity();
    }
    home->members.push_back(k);
    if (r.grad_norm < home->grad_norm) {
      home->grad_norm = r.grad_norm;
      home->hessian = hess;
      home->representative = pt;
      home->eta.assign(pi.begin(), pi.begin() + shape.p);
      home->base_xi = tropical::BasePoint{std::vector<double>(pi.begin() + shape.p, pi.end())};
      home->z_radius = 0.0;
      for (const cplx& zi : pt.z) home->z_radius = std::max(home->z_radius, std::abs(zi));
    }
  }
  for (CriticalManifold& m : out.manifolds) {
    if (const auto k = match_catalog(catalog, m.eta, m.base_xi, opt.cluster_radius, radius_xi)) {
      m.I = catalog[*k].I;
    }
  }
  std::stable_sort(out.manifolds.begin(), out.manifolds.end(), [](const auto& a, const auto& b) {
    if (a.index != b.index) return a.index < b.index;
    return a.base_xi.xi < b.base_xi.xi;
  });
  return out;
}

namespace {

// Real gradient of phi~ in ambient coordinates (Re z, Im z, Re u, Im u).
Eigen::VectorXd ambient_gradient(const Eigen::VectorXd& w, const ModelShape& shape) {
  const std::size_t nz = zdim(shape);
  Eigen::VectorXd x(coord_dim(shape));
  x.head(nz) = w.head(nz);
  for (int j = 0; j < shape.q; ++j) {
    const cplx u(w[nz + 2 * j], w[nz + 2 * j + 1]);
    x[xi_at(shape, j)] = std::log(std::abs(u));
    x[theta_at(shape, j)] = std::arg(u);
  }
  const Eigen::VectorXd gx = potential_tilde_gradient(x, shape);
  Eigen::VectorXd g(w.size());
  g.head(nz) = gx.head(nz);
  for (int j = 0; j < shape.q; ++j) {
    const double re = w[nz + 2 * j];
    const double im = w[nz + 2 * j + 1];
    const double r2 = re * re + im * im;
    g[nz + 2 * j] = gx[xi_at(shape, j)] * re / r2;
    g[nz + 2 * j + 1] = gx[xi_at(shape, j)] * im / r2;
  }
  return g;
}

}  // namespace

double levi_min_eigenvalue(const AmbientPoint& pt, const ModelShape& shape, double step) {
  check_sizes(pt, shape);
  check_u(pt.u);
  const int m = shape.p + 1 + shape.q;
  Eigen::VectorXd w(2 * m);
  std::vector<cplx> all(pt.z);
  all.insert(all.end(), pt.u.begin(), pt.u.end());
  for (int a = 0; a < m; ++a) {
    w[2 * a] = all[a].real();
    w[2 * a + 1] = all[a].imag();
  }
  Eigen::MatrixXd hr(2 * m, 2 * m);
  for (int k = 0; k < 2 * m; ++k) {
    Eigen::VectorXd wp = w, wm = w;
    wp[k] += step;
    wm[k] -= step;
    hr.col(k) = (ambient_gradient(wp, shape) - ambient_gradient(wm, shape)) / (2.0 * step);
  }
  hr = 0.5 * (hr + hr.transpose());

  Eigen::MatrixXcd h(m, m);
  for (int a = 0; a < m; ++a) {
    for (int b = 0; b < m; ++b) {
      h(a, b) = 0.25 * cplx(hr(2 * a, 2 * b) + hr(2 * a + 1, 2 * b + 1),
                            hr(2 * a, 2 * b + 1) - hr(2 * a + 1, 2 * b));
    }
  }
  // Holomorphic differential of z_0...z_p - 1 - sum u.
  Eigen::VectorXcd normal(m);
  for (int i = 0; i <= shape.p; ++i) {
    cplx partial = 1.0;
    for (int k = 0; k <= shape.p; ++k) {
      if (k != i) partial *= pt.z[k];
    }
    normal[i] = std::conj(partial);
  }
  for (int j = 0; j < shape.q; ++j) normal[shape.p + 1 + j] = -1.0;
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(normal);
  const Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(m, m);
  const Eigen::MatrixXcd basis = q.rightCols(m - 1);
  Eigen::MatrixXcd levi = basis.transpose() * h * basis.conjugate();
  levi = 0.5 * (levi + levi.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(levi, Eigen::EigenvaluesOnly);
  return es.eigenvalues()[0];
}

LeviReport check_kahler_positivity(const ModelShape& shape, std::size_t n_samples, std::uint64_t seed) {
  shape.validate();
  ModelShape flat = shape;
  flat.s = 0.0;
  std::mt19937_64 rng(splitmix(seed));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
  const double L = shape.params.L;
  LeviReport out{{}, std::numeric_limits<double>::infinity(), 0};
  while (out.samples.size() < n_samples) {
    const std::size_t k = out.samples.size();
    AmbientPoint pt;
    for (int j = 0; j < shape.q; ++j) pt.u.push_back(std::polar(std::exp(-L - 1.0 + (L + 2.0) * unit(rng)), angle(rng)));
    if (k % 3 == 2) {
      // Close to the pants, where the z-radius is small.
      cplx rest = 1.0;
      for (int j = 1; j < shape.q; ++j) rest += pt.u[j];
      pt.u[0] = -rest + std::polar(0.3 * unit(rng), angle(rng));
    }
    cplx g = 1.0;
    for (const cplx& uj : pt.u) g += uj;
    if (std::abs(g) < 1e-12 || pt.u[0] == 0.0) continue;
    const double r = std::pow(std::abs(g), 1.0 / (shape.p + 1));
    pt.z.assign(shape.p + 1, 0.0);
    cplx rest = 1.0;
    for (int i = 1; i <= shape.p; ++i) {
      pt.z[i] = std::polar(r, angle(rng));
      rest *= pt.z[i];
    }
    pt.z[0] = g / rest;
    pt.residual = std::abs(constraint(pt, flat));
    const double e = levi_min_eigenvalue(pt, flat);
    out.min_eigenvalue = std::min(out.min_eigenvalue, e);
    if (e <= 0.0) ++out.negative_count;
    out.samples.push_back({pt, e});
  }
  return out;
}

}  // namespace syzkit::syz
