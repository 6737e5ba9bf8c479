#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "syzkit/syz.hpp"

using namespace syzkit::syz;
using syzkit::tropical::BasePoint;

namespace {

ModelShape shape_of(int p, int q, double eps_pert = 1e-2) {
  ModelShape s;
  s.p = p;
  s.q = q;
  s.eps_pert = eps_pert;
  return s;
}

// A point of the untailored X: u given, |z_1| = r, |z_2..z_p| = 1, z_0 solved.
AmbientPoint point_on_flat(const ModelShape& shape, std::mt19937_64& rng, double r) {
  std::uniform_real_distribution<double> ang(-std::numbers::pi, std::numbers::pi), lr(-1.5, 0.5);
  AmbientPoint pt;
  cplx g = 1.0;
  for (int j = 0; j < shape.q; ++j) {
    pt.u.push_back(std::polar(std::exp(lr(rng)), ang(rng)));
    g += pt.u.back();
  }
  pt.z.assign(shape.p + 1, 0.0);
  cplx prod = 1.0;
  for (int i = 1; i <= shape.p; ++i) {
    pt.z[i] = std::polar(i == 1 ? r : 1.0, ang(rng));
    prod *= pt.z[i];
  }
  pt.z[0] = g / prod;
  return pt;
}

Eigen::VectorXd random_coords(const ModelShape& shape, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> c(-0.4, 0.4), xi(-2.0, 0.5), th(-3.0, 3.0);
  Eigen::VectorXd x(coord_dim(shape));
  const std::size_t nz = 2 * (shape.p + 1);
  for (std::size_t k = 0; k < nz; ++k) x[k] = c(rng);
  for (int j = 0; j < shape.q; ++j) {
    x[nz + j] = xi(rng);
    x[nz + shape.q + j] = th(rng);
  }
  return x;
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b))); }

// Levi form through the holomorphic chart (z_1..z_p, u) -> z_0 = g(u)/(z_1...z_p):
// second differences of phi~ o chart, measured against the pulled-back metric.
double chart_levi_min(const AmbientPoint& pt, const ModelShape& shape) {
  const int p = shape.p, q = shape.q, n = p + q;
  std::vector<cplx> w;
  for (int i = 1; i <= p; ++i) w.push_back(pt.z[i]);
  for (int j = 0; j < q; ++j) w.push_back(pt.u[j]);
  auto chart = [&](const std::vector<cplx>& c) {
    AmbientPoint a;
    cplx g = 1.0, prod = 1.0;
    for (int j = 0; j < q; ++j) {
      a.u.push_back(c[p + j]);
      g += c[p + j];
    }
    a.z.push_back(0.0);
    for (int i = 0; i < p; ++i) {
      a.z.push_back(c[i]);
      prod *= c[i];
    }
    a.z[0] = g / prod;
    return a;
  };
  auto f = [&](const Eigen::VectorXd& v) {
    std::vector<cplx> c(n);
    for (int a = 0; a < n; ++a) c[a] = {v[2 * a], v[2 * a + 1]};
    return potential_tilde(chart(c), shape);
  };
  Eigen::VectorXd v0(2 * n);
  for (int a = 0; a < n; ++a) {
    v0[2 * a] = w[a].real();
    v0[2 * a + 1] = w[a].imag();
  }
  auto second_differences = [&](double h) {
    Eigen::MatrixXd H(2 * n, 2 * n);
    for (int a = 0; a < 2 * n; ++a) {
      for (int b = a; b < 2 * n; ++b) {
        Eigen::VectorXd pp = v0, pm = v0, mp = v0, mm = v0;
        pp[a] += h;
        pp[b] += h;
        pm[a] += h;
        pm[b] -= h;
        mp[a] -= h;
        mp[b] += h;
        mm[a] -= h;
        mm[b] -= h;
        H(a, b) = H(b, a) = (f(pp) - f(pm) - f(mp) + f(mm)) / (4 * h * h);
      }
    }
    return H;
  };
  // One Richardson step removes the h^2 term.
  const Eigen::MatrixXd H = (4.0 * second_differences(5e-4) - second_differences(1e-3)) / 3.0;
  Eigen::MatrixXcd A(n, n);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      A(a, b) = 0.25 * cplx(H(2 * a, 2 * b) + H(2 * a + 1, 2 * b + 1), H(2 * a, 2 * b + 1) - H(2 * a + 1, 2 * b));
    }
  }
  // Holomorphic Jacobian of the chart, ambient order (z_0, ..., z_p, u).
  Eigen::MatrixXcd D = Eigen::MatrixXcd::Zero(p + 1 + q, n);
  cplx g = 1.0, prod = 1.0;
  for (int j = 0; j < q; ++j) g += w[p + j];
  for (int i = 0; i < p; ++i) prod *= w[i];
  for (int i = 0; i < p; ++i) {
    D(0, i) = -g / (prod * w[i]);
    D(1 + i, i) = 1.0;
  }
  for (int j = 0; j < q; ++j) {
    D(0, p + j) = 1.0 / prod;
    D(p + 1 + j, p + j) = 1.0;
  }
  // Forms are c^T M conj(c); transpose to the usual Hermitian convention.
  const Eigen::MatrixXcd Ah = A.transpose();
  const Eigen::MatrixXcd G = (D.adjoint() * D);
  const Eigen::MatrixXcd Lc = G.llt().matrixL();
  const Eigen::MatrixXcd Li = Lc.inverse();
  Eigen::MatrixXcd M = Li * Ah * Li.adjoint();
  M = 0.5 * (M + M.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(M, Eigen::EigenvaluesOnly);
  return es.eigenvalues()[0];
}

}  // namespace

TEST_CASE("shape validation") {
  CHECK_NOTHROW(shape_of(1, 1).validate());
  CHECK_THROWS_AS(shape_of(-1, 1).validate(), std::invalid_argument);
  CHECK_THROWS_AS(shape_of(1, 0).validate(), std::invalid_argument);
  CHECK_THROWS_AS(shape_of(1, 1, -1e-3).validate(), std::invalid_argument);
  CHECK_NOTHROW(shape_of(1, 1, 0.0).validate());
  ModelShape bad = shape_of(1, 1);
  bad.s = 1.5;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("projection and potential") {
  const ModelShape shape = shape_of(1, 2);
  AmbientPoint pt{{cplx(2.0, 0.0), cplx(0.0, 1.0)}, {cplx(std::exp(-1.0), 0.0), cplx(0.0, -1.0)}, 0.0};
  const auto pi = project_syz(pt);
  REQUIRE(pi.size() == 3);
  CHECK(pi[0] == doctest::Approx(3.0));
  CHECK(pi[1] == doctest::Approx(-1.0));
  CHECK(pi[2] == doctest::Approx(0.0));
  const double L = shape.params.L;
  CHECK(potential_phi(pt, shape) == doctest::Approx(9.0 + (L - 1) * (L - 1) + L * L));
  AmbientPoint zero_u = pt;
  zero_u.u[0] = 0.0;
  CHECK_THROWS_AS(project_syz(zero_u), std::invalid_argument);
}

TEST_CASE("bump chi support") {
  const ModelShape shape = shape_of(2, 1);
  const double R = shape.chi_radius;
  const std::vector<cplx> near = {0.1 * R, cplx(0, 0.4 * R), 5.0};
  CHECK(bump_chi(near, shape).value == 1.0);
  const std::vector<cplx> far = {0.1 * R, 1.01 * R, 2.0};
  CHECK(bump_chi(far, shape).value == 0.0);
  const std::vector<cplx> mid = {0.0, 0.75 * R, 3.0};
  const double v = bump_chi(mid, shape).value;
  CHECK(v > 0.0);
  CHECK(v < 1.0);
  // Symmetric in the z's.
  const std::vector<cplx> swapped = {0.75 * R, 3.0, 0.0};
  CHECK(bump_chi(swapped, shape).value == doctest::Approx(v));
}

TEST_CASE("analytic gradients match central differences") {
  std::mt19937_64 rng(1);
  for (auto [p, q] : {std::pair{1, 1}, std::pair{1, 2}, std::pair{2, 2}, std::pair{3, 1}}) {
    ModelShape shape = shape_of(p, q, 0.05);
    for (int t = 0; t < 20; ++t) {
      const Eigen::VectorXd x = random_coords(shape, rng);
      const Eigen::VectorXd g = potential_tilde_gradient(x, shape);
      const double h = 1e-6;
      for (Eigen::Index k = 0; k < x.size(); ++k) {
        Eigen::VectorXd a = x, b = x;
        a[k] += h;
        b[k] -= h;
        const double fd = (potential_tilde_coords(a, shape) - potential_tilde_coords(b, shape)) / (2 * h);
        CHECK(rel_err(g[k], fd) < 1e-6);
      }
      // Constraint Jacobian, with the tailored f_1 away from psi kinks.
      const Eigen::MatrixXd J = constraint_jacobian(x, shape);
      for (Eigen::Index k = 0; k < x.size(); ++k) {
        Eigen::VectorXd a = x, b = x;
        a[k] += h;
        b[k] -= h;
        const Eigen::Vector2d fd = (constraint_coords(a, shape) - constraint_coords(b, shape)) / (2 * h);
        CHECK(rel_err(J(0, k), fd[0]) < 1e-5);
        CHECK(rel_err(J(1, k), fd[1]) < 1e-5);
      }
    }
  }
}

TEST_CASE("bump chi gradient matches central differences") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> c(-0.3, 0.3);
  const ModelShape shape = shape_of(2, 1);
  for (int t = 0; t < 100; ++t) {
    std::vector<cplx> z = {{c(rng), c(rng)}, {c(rng), c(rng)}, {c(rng), c(rng)}};
    const BumpValue b = bump_chi(z, shape);
    for (int k = 0; k < 6; ++k) {
      auto zp = z, zm = z;
      const cplx d = (k % 2 == 0) ? cplx(1e-7, 0) : cplx(0, 1e-7);
      zp[k / 2] += d;
      zm[k / 2] -= d;
      const double fd = (bump_chi(zp, shape).value - bump_chi(zm, shape).value) / 2e-7;
      CHECK(std::abs(b.gradient[k] - fd) < 1e-6);
    }
  }
}

TEST_CASE("coordinates round trip and projection to X") {
  std::mt19937_64 rng(3);
  const ModelShape shape = shape_of(2, 2);
  for (int t = 0; t < 20; ++t) {
    const Eigen::VectorXd x = random_coords(shape, rng);
    const auto y = project_to_manifold(x, shape);
    REQUIRE(y.has_value());
    CHECK(constraint_coords(*y, shape).norm() <= 1e-13);
    const AmbientPoint pt = from_coords(*y, shape);
    CHECK(std::abs(constraint(pt, shape)) < 1e-12);
    const Eigen::VectorXd back = to_coords(pt, shape);
    for (Eigen::Index k = 0; k < y->size(); ++k) {
      double d = back[k] - (*y)[k];
      if (k >= static_cast<Eigen::Index>(2 * (shape.p + 1) + shape.q)) d = std::remainder(d, 2 * std::numbers::pi);
      CHECK(std::abs(d) < 1e-12);
    }
  }
}

TEST_CASE("riemannian gradient is tangent") {
  std::mt19937_64 rng(4);
  const ModelShape shape = shape_of(1, 2);
  for (int t = 0; t < 20; ++t) {
    const auto y = project_to_manifold(random_coords(shape, rng), shape);
    REQUIRE(y.has_value());
    const TangentGradient g = riemannian_grad(*y, shape);
    const Eigen::MatrixXd J = constraint_jacobian(*y, shape);
    CHECK((J * g.vector).norm() < 1e-10 * std::max(1.0, g.norm));
    CHECK(g.norm == doctest::Approx(g.vector.norm()));
  }
}

TEST_CASE("spectrum classification") {
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(4, 4);
  h.diagonal() << -2.0, 1e-9, 3.0, 5.0;
  const HessianReport r = classify_spectrum(h, 1e-5);
  CHECK(r.neg_count == 1);
  CHECK(r.zero_count == 1);
  CHECK(r.pos_count == 2);
  CHECK(r.stable);
  CHECK(r.zero_threshold == doctest::Approx(5e-5));
}

TEST_CASE("predicted catalog") {
  const ModelShape shape = shape_of(1, 2);
  const auto cat = predicted_catalog(shape);
  REQUIRE(cat.size() == 4);
  CHECK(cat[0].I.empty());
  CHECK(cat[0].xi.xi == std::vector<double>{-5.0, -5.0});
  CHECK(cat[1].I == std::vector<int>{1});
  CHECK(cat[2].I == std::vector<int>{2});
  CHECK(cat[3].I == std::vector<int>{1, 2});
  CHECK(cat[3].xi[0] == cat[3].xi[1]);
  CHECK(cat[1].xi[1] == -5.0);
  const std::vector<double> eta = {0.0};
  CHECK(match_catalog(cat, eta, BasePoint{{-5.0, -5.0}}, 1e-3, 1e-3) == std::optional<std::size_t>{0});
  CHECK(match_catalog(cat, eta, BasePoint{{-4.0, -5.0}}, 1e-3, 1e-3) == std::nullopt);
  const std::vector<double> off = {0.1};
  CHECK(match_catalog(cat, off, BasePoint{{-5.0, -5.0}}, 1e-3, 1e-3) == std::nullopt);
}

TEST_CASE("base torus is a critical manifold") {
  const ModelShape shape = shape_of(1, 1);
  const double L = shape.params.L;
  // eta = 0, xi = -L: |z_0| = |z_1| with z_0 z_1 = f_1(u) = 1 there.
  AmbientPoint pt{{cplx(1.0, 0.0), cplx(1.0, 0.0)}, {std::polar(std::exp(-L), 0.3)}, 0.0};
  CHECK(std::abs(constraint(pt, shape)) < 1e-15);
  CHECK(riemannian_grad(pt, shape).norm < 1e-12);
  const HessianReport h = classify_spectrum(restricted_hessian(to_coords(pt, shape), shape), 1e-5);
  CHECK(h.neg_count == 0);
  CHECK(h.zero_count == 2);
}

TEST_CASE("critical search on (1,1)") {
  const ModelShape shape = shape_of(1, 1);
  SolverOptions opt;
  opt.threads = 1;
  const CriticalSearch a = find_critical_manifolds(shape, 40, 7, opt);
  CHECK(a.n_starts == 40);
  CHECK(a.converged + a.discarded == 40);
  bool found_base = false, found_leg = false;
  for (const auto& m : a.manifolds) {
    CHECK(m.grad_norm < opt.accept_tol);
    if (m.I && m.I->empty()) found_base = true;
    if (m.I && *m.I == std::vector<int>{1}) found_leg = true;
  }
  CHECK(found_base);
  CHECK(found_leg);

  opt.threads = 3;
  const CriticalSearch b = find_critical_manifolds(shape, 40, 7, opt);
  REQUIRE(a.manifolds.size() == b.manifolds.size());
  for (std::size_t k = 0; k < a.manifolds.size(); ++k) {
    CHECK(a.manifolds[k].members == b.manifolds[k].members);
    CHECK(a.manifolds[k].base_xi.xi == b.manifolds[k].base_xi.xi);
    CHECK(a.manifolds[k].index == b.manifolds[k].index);
  }
}

TEST_CASE("levi form agrees with the holomorphic chart") {
  std::mt19937_64 rng(5);
  for (auto [p, q] : {std::pair{1, 1}, std::pair{1, 2}, std::pair{2, 1}}) {
    const ModelShape shape = shape_of(p, q, 0.05);
    ModelShape flat = shape;
    flat.s = 0.0;
    for (int t = 0; t < 6; ++t) {
      const AmbientPoint pt = point_on_flat(flat, rng, t % 2 == 0 ? 0.22 : 0.8);
      const double direct = levi_min_eigenvalue(pt, flat);
      const double oracle = chart_levi_min(pt, flat);
      CHECK(std::abs(direct - oracle) < 1e-4 * std::max(1.0, std::abs(oracle)));
    }
  }
}

TEST_CASE("levi form degenerates near z = 0 without the perturbation") {
  const ModelShape shape = shape_of(1, 1, 0.0);
  ModelShape flat = shape;
  flat.s = 0.0;
  // z_0 = z_1 = t on the pants u = -1 + t^2.
  for (double t : {1e-3, 1e-2}) {
    AmbientPoint pt{{cplx(t, 0), cplx(t, 0)}, {cplx(-1.0 + t * t, 0)}, 0.0};
    const double e = levi_min_eigenvalue(pt, flat);
    CHECK(std::abs(e) < 1e-3);
  }
  ModelShape pert = flat;
  pert.eps_pert = 1e-2;
  AmbientPoint pt{{cplx(1e-3, 0), cplx(1e-3, 0)}, {cplx(-1.0 + 1e-6, 0)}, 0.0};
  CHECK(levi_min_eigenvalue(pt, pert) > 5e-3);
}

TEST_CASE("kahler sampling is deterministic and on the hypersurface") {
  const ModelShape shape = shape_of(1, 1);
  const LeviReport a = check_kahler_positivity(shape, 30, 9);
  const LeviReport b = check_kahler_positivity(shape, 30, 9);
  REQUIRE(a.samples.size() == 30);
  CHECK(a.min_eigenvalue == b.min_eigenvalue);
  for (const auto& s : a.samples) {
    CHECK(s.point.residual < 1e-10 * std::max(1.0, std::abs(s.point.z[0])));
    const auto pi = project_syz(s.point);
    CHECK(std::abs(pi[0]) < 1e-9 * std::max(1.0, std::norm(s.point.z[0])));
  }
}

TEST_CASE("worker count honors the cap") {
  CHECK(worker_count(3) >= 1);
  CHECK(worker_count(1) == 1);
}
