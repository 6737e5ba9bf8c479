#include "syzkit/skeleton.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace syzkit::skeleton {

bool IntMatrix::is_zero() const {
  return std::all_of(data.begin(), data.end(), [](std::int64_t v) { return v == 0; });
}

IntMatrix operator*(const IntMatrix& a, const IntMatrix& b) {
  if (a.cols != b.rows) throw std::logic_error("IntMatrix: dimension mismatch in product");
  IntMatrix c(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t k = 0; k < a.cols; ++k) {
      const std::int64_t v = a(i, k);
      if (v == 0) continue;
      for (std::size_t j = 0; j < b.cols; ++j) c(i, j) += v * b(k, j);
    }
  }
  return c;
}

std::size_t ChainComplex::rank(int k) const {
  if (k < 0 || k > top_degree()) return 0;
  return generators[k].size();
}

std::size_t ChainComplex::size() const {
  std::size_t n = 0;
  for (const auto& g : generators) n += g.size();
  return n;
}

void ChainComplex::check_shapes() const {
  if (boundary.size() != generators.size()) throw std::logic_error("ChainComplex: boundary count mismatch");
  for (int k = 0; k <= top_degree(); ++k) {
    if (boundary[k].cols != rank(k) || boundary[k].rows != rank(k - 1)) {
      throw std::logic_error("ChainComplex: boundary matrix in degree " + std::to_string(k) + " has wrong shape");
    }
  }
}

bool ChainComplex::is_complex() const {
  check_shapes();
  for (int k = 2; k <= top_degree(); ++k) {
    if (!(boundary[k - 1] * boundary[k]).is_zero()) return false;
  }
  return true;
}

bool ChainMap::commutes(const ChainComplex& source, const ChainComplex& target) const {
  const int top = std::max(source.top_degree(), target.top_degree());
  if (static_cast<int>(matrices.size()) != top + 1) return false;
  for (int k = 0; k <= top; ++k) {
    if (matrices[k].rows != target.rank(k) || matrices[k].cols != source.rank(k)) return false;
  }
  for (int k = 1; k <= top; ++k) {
    const IntMatrix zero_t(target.rank(k - 1), target.rank(k));
    const IntMatrix zero_s(source.rank(k - 1), source.rank(k));
    const IntMatrix& dt = k <= target.top_degree() ? target.boundary[k] : zero_t;
    const IntMatrix& ds = k <= source.top_degree() ? source.boundary[k] : zero_s;
    if (!(matrices[k - 1] * ds == dt * matrices[k])) return false;
  }
  return true;
}

void SkeletonSpec::validate() const {
  if (p < 0) throw std::invalid_argument("skeleton: p must be >= 0");
  if (q < 1) throw std::invalid_argument("skeleton: q must be >= 1");
  if (!u_order.empty()) {
    std::vector<int> sorted = u_order;
    std::sort(sorted.begin(), sorted.end());
    std::vector<int> expect(q);
    std::iota(expect.begin(), expect.end(), 1);
    if (sorted != expect) throw std::invalid_argument("skeleton: u_order must be a permutation of 1..q");
  }
}

namespace {

std::string subset_label(unsigned mask, int n) {
  std::string s = "{";
  bool first = true;
  for (int i = 0; i < n; ++i) {
    if (mask & (1u << i)) {
      if (!first) s += ",";
      s += std::to_string(i + 1);
      first = false;
    }
  }
  return s + "}";
}

ChainComplex with_zero_boundaries(std::vector<std::vector<std::string>> gens) {
  ChainComplex c;
  c.generators = std::move(gens);
  for (int k = 0; k <= c.top_degree(); ++k) c.boundary.emplace_back(c.rank(k - 1), c.rank(k));
  return c;
}

}  // namespace

ChainComplex point_chain(const std::string& label) { return with_zero_boundaries({{label}}); }

ChainComplex torus_chain(int k, const std::string& prefix) {
  if (k < 0) throw std::invalid_argument("torus_chain: k must be >= 0");
  std::vector<std::vector<std::string>> gens(k + 1);
  for (unsigned mask = 0; mask < (1u << k); ++mask) {
    gens[std::popcount(mask)].push_back(prefix + subset_label(mask, k));
  }
  return with_zero_boundaries(std::move(gens));
}

namespace {

// Offsets of the (i, n-i) blocks inside degree n of a tensor product.
struct BlockLayout {
  std::vector<std::vector<std::size_t>> offset;  // offset[n][i]
  std::vector<std::size_t> total;

  BlockLayout(const std::vector<std::size_t>& ra, const std::vector<std::size_t>& rb) {
    const int ta = static_cast<int>(ra.size()) - 1;
    const int tb = static_cast<int>(rb.size()) - 1;
    offset.assign(ta + tb + 1, std::vector<std::size_t>(ta + 1, 0));
    total.assign(ta + tb + 1, 0);
    for (int n = 0; n <= ta + tb; ++n) {
      for (int i = 0; i <= ta; ++i) {
        offset[n][i] = total[n];
        const int j = n - i;
        if (j >= 0 && j <= tb) total[n] += ra[i] * rb[j];
      }
    }
  }
};

std::vector<std::size_t> ranks_of(const ChainComplex& c) {
  std::vector<std::size_t> r;
  for (int k = 0; k <= c.top_degree(); ++k) r.push_back(c.rank(k));
  return r;
}

}  // namespace

ChainComplex tensor(const ChainComplex& a, const ChainComplex& b) {
  a.check_shapes();
  b.check_shapes();
  const int ta = a.top_degree();
  const int tb = b.top_degree();
  const BlockLayout lay(ranks_of(a), ranks_of(b));
  ChainComplex c;
  c.generators.resize(ta + tb + 1);
  for (int n = 0; n <= ta + tb; ++n) {
    for (int i = 0; i <= ta; ++i) {
      const int j = n - i;
      if (j < 0 || j > tb) continue;
      for (const auto& ga : a.generators[i]) {
        for (const auto& gb : b.generators[j]) c.generators[n].push_back(ga + "|" + gb);
      }
    }
  }
  for (int n = 0; n <= ta + tb; ++n) {
    IntMatrix d(c.rank(n - 1), c.rank(n));
    for (int i = 0; i <= ta; ++i) {
      const int j = n - i;
      if (j < 0 || j > tb) continue;
      const std::size_t nb = b.rank(j);
      for (std::size_t ia = 0; ia < a.rank(i); ++ia) {
        for (std::size_t ib = 0; ib < nb; ++ib) {
          const std::size_t col = lay.offset[n][i] + ia * nb + ib;
          if (i >= 1) {
            for (std::size_t r = 0; r < a.rank(i - 1); ++r) {
              const std::int64_t v = a.boundary[i](r, ia);
              if (v != 0) d(lay.offset[n - 1][i - 1] + r * nb + ib, col) += v;
            }
          }
          if (j >= 1) {
            const std::int64_t sign = (i % 2 == 0) ? 1 : -1;
            const std::size_t nb1 = b.rank(j - 1);
            for (std::size_t r = 0; r < nb1; ++r) {
              const std::int64_t v = b.boundary[j](r, ib);
              if (v != 0) d(lay.offset[n - 1][i] + ia * nb1 + r, col) += sign * v;
            }
          }
        }
      }
    }
    c.boundary.push_back(std::move(d));
  }
  return c;
}

ChainMap tensor(const ChainMap& f, const ChainMap& g) {
  std::vector<std::size_t> fs, ft, gs, gt;
  for (const auto& m : f.matrices) {
    fs.push_back(m.cols);
    ft.push_back(m.rows);
  }
  for (const auto& m : g.matrices) {
    gs.push_back(m.cols);
    gt.push_back(m.rows);
  }
  const BlockLayout src(fs, gs);
  const BlockLayout tgt(ft, gt);
  const int tf = static_cast<int>(fs.size()) - 1;
  const int tg = static_cast<int>(gs.size()) - 1;
  ChainMap h;
  for (int n = 0; n <= tf + tg; ++n) {
    IntMatrix m(tgt.total[n], src.total[n]);
    for (int i = 0; i <= tf; ++i) {
      const int j = n - i;
      if (j < 0 || j > tg) continue;
      const IntMatrix& fi = f.matrices[i];
      const IntMatrix& gj = g.matrices[j];
      for (std::size_t a = 0; a < fi.cols; ++a) {
        for (std::size_t b = 0; b < gj.cols; ++b) {
          const std::size_t col = src.offset[n][i] + a * gj.cols + b;
          for (std::size_t ra = 0; ra < fi.rows; ++ra) {
            const std::int64_t va = fi(ra, a);
            if (va == 0) continue;
            for (std::size_t rb = 0; rb < gj.rows; ++rb) {
              const std::int64_t vb = gj(rb, b);
              if (vb != 0) m(tgt.offset[n][i] + ra * gj.rows + rb, col) += va * vb;
            }
          }
        }
      }
    }
    h.matrices.push_back(std::move(m));
  }
  return h;
}

ChainMap identity_map(const ChainComplex& c) {
  ChainMap id;
  for (int k = 0; k <= c.top_degree(); ++k) {
    IntMatrix m(c.rank(k), c.rank(k));
    for (std::size_t i = 0; i < c.rank(k); ++i) m(i, i) = 1;
    id.matrices.push_back(std::move(m));
  }
  return id;
}

namespace {

struct BoundaryCell {
  unsigned tau;
  unsigned e;
};

std::vector<std::vector<BoundaryCell>> boundary_cells(int q) {
  std::vector<std::vector<BoundaryCell>> cells(std::max(q, 1));
  const unsigned full = (1u << q) - 1;
  for (unsigned tau = 1; tau <= full; ++tau) {
    const unsigned rest = full & ~tau;
    for (unsigned e = 0;; e = (e - rest) & rest) {
      cells[std::popcount(e) + std::popcount(tau) - 1].push_back({tau, e});
      if (e == rest) break;
    }
  }
  for (auto& level : cells) {
    std::sort(level.begin(), level.end(), [](const BoundaryCell& a, const BoundaryCell& b) {
      return a.tau != b.tau ? a.tau < b.tau : a.e < b.e;
    });
  }
  return cells;
}

}  // namespace

ChainComplex fltz_boundary_chain(int q, const std::vector<int>& order) {
  SkeletonSpec{0, q, true, order}.validate();
  std::vector<int> rank_of(q);
  for (int k = 0; k < q; ++k) rank_of[(order.empty() ? k + 1 : order[k]) - 1] = k;

  const auto cells = boundary_cells(q);
  ChainComplex c;
  for (const auto& level : cells) {
    c.generators.emplace_back();
    for (const auto& cell : level) {
      c.generators.back().push_back("d" + subset_label(cell.tau, q) + "x" + subset_label(cell.e, q));
    }
  }
  auto index_of = [&](int deg, unsigned tau, unsigned e) {
    const auto& level = cells[deg];
    const auto it = std::lower_bound(level.begin(), level.end(), BoundaryCell{tau, e},
                                     [](const BoundaryCell& a, const BoundaryCell& b) {
                                       return a.tau != b.tau ? a.tau < b.tau : a.e < b.e;
                                     });
    return static_cast<std::size_t>(it - level.begin());
  };
  for (int deg = 0; deg < static_cast<int>(cells.size()); ++deg) {
    IntMatrix d(c.rank(deg - 1), c.rank(deg));
    for (std::size_t col = 0; col < cells[deg].size(); ++col) {
      const BoundaryCell cell = cells[deg][col];
      if (std::popcount(cell.tau) < 2) continue;
      const std::int64_t koszul = (std::popcount(cell.e) % 2 == 0) ? 1 : -1;
      for (int t = 0; t < q; ++t) {
        if (!(cell.tau & (1u << t))) continue;
        int pos = 0;
        for (int s = 0; s < q; ++s) {
          if ((cell.tau & (1u << s)) && rank_of[s] < rank_of[t]) ++pos;
        }
        const std::int64_t sign = (pos % 2 == 0) ? 1 : -1;
        d(index_of(deg - 1, cell.tau & ~(1u << t), cell.e), col) += koszul * sign;
      }
    }
    c.boundary.push_back(std::move(d));
  }
  return c;
}

namespace {

// Chain-level retraction of the boundary chain onto the zero-section torus.
ChainMap boundary_to_torus(int q) {
  const auto cells = boundary_cells(q);
  const ChainComplex torus = torus_chain(q, "u");
  ChainMap m;
  const int top = std::max(q, static_cast<int>(cells.size()) - 1);
  for (int k = 0; k <= top; ++k) {
    const std::size_t src = k < static_cast<int>(cells.size()) ? cells[k].size() : 0;
    IntMatrix mat(torus.rank(k), src);
    for (std::size_t col = 0; col < src; ++col) {
      const BoundaryCell cell = cells[k][col];
      if (std::popcount(cell.tau) != 1) continue;
      // Generators of the torus chain in degree k are the k-subsets in mask order.
      std::size_t row = 0;
      for (unsigned mask = 0; mask < cell.e; ++mask) {
        if (std::popcount(mask) == k) ++row;
      }
      mat(row, col) = 1;
    }
    m.matrices.push_back(std::move(mat));
  }
  return m;
}

ChainMap pad(ChainMap m, const ChainComplex& source, const ChainComplex& target) {
  const int top = std::max(source.top_degree(), target.top_degree());
  while (static_cast<int>(m.matrices.size()) <= top) {
    const int k = static_cast<int>(m.matrices.size());
    m.matrices.emplace_back(target.rank(k), source.rank(k));
  }
  return m;
}

}  // namespace

FltzModel fltz_chain(const SkeletonSpec& spec) {
  spec.validate();
  const ChainComplex tq = torus_chain(spec.q, "u");
  const ChainComplex tp = torus_chain(spec.p, "z");
  const ChainComplex dq = fltz_boundary_chain(spec.q, spec.u_order);
  FltzModel out;
  out.L = tensor(tq, tp);
  out.boundary = tensor(dq, tp);
  out.inclusion = pad(tensor(boundary_to_torus(spec.q), identity_map(tp)), out.boundary, out.L);
  return out;
}

LsingModel lsing_chain(int p) {
  if (p < 0) throw std::invalid_argument("lsing_chain: p must be >= 0");
  LsingModel out;
  out.cone = point_chain("c");
  out.link = torus_chain(p, "z");
  ChainMap aug;
  aug.matrices.emplace_back(1, 1);
  aug.matrices[0](0, 0) = 1;
  out.augmentation = pad(aug, out.link, out.cone);
  return out;
}

GluedSkeleton glued_skeleton(const SkeletonSpec& spec) {
  spec.validate();
  const FltzModel fl = fltz_chain(spec);
  const LsingModel ls = lsing_chain(spec.p);
  const ChainComplex dq = fltz_boundary_chain(spec.q, spec.u_order);
  GluedSkeleton gs;
  gs.L1 = fl.L;
  gs.L12 = fl.boundary;
  gs.f = fl.inclusion;
  gs.L2 = tensor(dq, ls.cone);
  gs.g = pad(tensor(identity_map(dq), ls.augmentation), gs.L12, gs.L2);

  const int top = std::max({gs.L1.top_degree(), gs.L2.top_degree(), gs.L12.top_degree() + 1});
  ChainComplex& c = gs.glued;
  c.generators.resize(top + 1);
  for (int n = 0; n <= top; ++n) {
    for (std::size_t k = 0; k < gs.L1.rank(n); ++k) c.generators[n].push_back("L1:" + gs.L1.generators[n][k]);
    for (std::size_t k = 0; k < gs.L2.rank(n); ++k) c.generators[n].push_back("L2:" + gs.L2.generators[n][k]);
    for (std::size_t k = 0; k < gs.L12.rank(n - 1); ++k) c.generators[n].push_back("s:" + gs.L12.generators[n - 1][k]);
  }
  auto block = [](const ChainComplex& x, int k) -> IntMatrix {
    if (k < 0 || k > x.top_degree()) return IntMatrix(x.rank(k - 1), x.rank(k));
    return x.boundary[k];
  };
  auto map_at = [](const ChainMap& m, const ChainComplex& s, const ChainComplex& t, int k) -> IntMatrix {
    if (k < 0 || k >= static_cast<int>(m.matrices.size())) return IntMatrix(t.rank(k), s.rank(k));
    return m.matrices[k];
  };
  for (int n = 0; n <= top; ++n) {
    IntMatrix d(c.rank(n - 1), c.rank(n));
    const std::size_t a1 = gs.L1.rank(n), b1 = gs.L2.rank(n);
    const std::size_t a0 = gs.L1.rank(n - 1), b0 = gs.L2.rank(n - 1);
    const IntMatrix da = block(gs.L1, n), db = block(gs.L2, n), dc = block(gs.L12, n - 1);
    const IntMatrix fc = map_at(gs.f, gs.L12, gs.L1, n - 1), gc = map_at(gs.g, gs.L12, gs.L2, n - 1);
    for (std::size_t i = 0; i < a0; ++i) {
      for (std::size_t j = 0; j < a1; ++j) d(i, j) = da(i, j);
      for (std::size_t j = 0; j < fc.cols; ++j) d(i, a1 + b1 + j) = fc(i, j);
    }
    for (std::size_t i = 0; i < b0; ++i) {
      for (std::size_t j = 0; j < b1; ++j) d(a0 + i, a1 + j) = db(i, j);
      for (std::size_t j = 0; j < gc.cols; ++j) d(a0 + i, a1 + b1 + j) = -gc(i, j);
    }
    for (std::size_t i = 0; i < dc.rows; ++i) {
      for (std::size_t j = 0; j < dc.cols; ++j) d(a0 + b0 + i, a1 + b1 + j) = -dc(i, j);
    }
    c.boundary.push_back(std::move(d));
  }
  return gs;
}

std::vector<mpz_class> smith_invariants(const IntMatrix& m) {
  const std::size_t rows = m.rows, cols = m.cols;
  std::vector<mpz_class> a(rows * cols);
  for (std::size_t k = 0; k < a.size(); ++k) a[k] = static_cast<long>(m.data[k]);
  auto at = [&](std::size_t i, std::size_t j) -> mpz_class& { return a[i * cols + j]; };

  std::vector<mpz_class> diag;
  for (std::size_t t = 0; t < std::min(rows, cols); ++t) {
    // Smallest nonzero entry of the trailing block as pivot.
    std::size_t pi = rows, pj = cols;
    for (std::size_t i = t; i < rows; ++i) {
      for (std::size_t j = t; j < cols; ++j) {
        if (sgn(at(i, j)) != 0 && (pi == rows || abs(at(i, j)) < abs(at(pi, pj)))) {
          pi = i;
          pj = j;
          if (abs(at(pi, pj)) == 1) break;
        }
      }
      if (pi != rows && abs(at(pi, pj)) == 1) break;
    }
    if (pi == rows) break;
    for (std::size_t j = 0; j < cols; ++j) std::swap(at(t, j), at(pi, j));
    for (std::size_t i = 0; i < rows; ++i) std::swap(at(i, t), at(i, pj));

    for (;;) {
      bool clean = true;
      for (std::size_t i = t + 1; i < rows; ++i) {
        if (sgn(at(i, t)) == 0) continue;
        mpz_class qt;
        mpz_fdiv_q(qt.get_mpz_t(), at(i, t).get_mpz_t(), at(t, t).get_mpz_t());
        for (std::size_t j = t; j < cols; ++j) {
          if (sgn(at(t, j)) != 0) at(i, j) -= qt * at(t, j);
        }
        if (sgn(at(i, t)) != 0) clean = false;
      }
      for (std::size_t j = t + 1; j < cols; ++j) {
        if (sgn(at(t, j)) == 0) continue;
        mpz_class qt;
        mpz_fdiv_q(qt.get_mpz_t(), at(t, j).get_mpz_t(), at(t, t).get_mpz_t());
        for (std::size_t i = t; i < rows; ++i) {
          if (sgn(at(i, t)) != 0) at(i, j) -= qt * at(i, t);
        }
        if (sgn(at(t, j)) != 0) clean = false;
      }
      if (clean) break;
      // Move the smallest remainder in the pivot row/column onto the pivot.
      std::size_t bi = t, bj = t;
      for (std::size_t i = t + 1; i < rows; ++i) {
        if (sgn(at(i, t)) != 0 && abs(at(i, t)) < abs(at(bi, bj))) {
          bi = i;
          bj = t;
        }
      }
      for (std::size_t j = t + 1; j < cols; ++j) {
        if (sgn(at(t, j)) != 0 && abs(at(t, j)) < abs(at(bi, bj))) {
          bi = t;
          bj = j;
        }
      }
      if (bi != t) {
        for (std::size_t j = 0; j < cols; ++j) std::swap(at(t, j), at(bi, j));
      } else if (bj != t) {
        for (std::size_t i = 0; i < rows; ++i) std::swap(at(i, t), at(i, bj));
      }
    }
    diag.push_back(abs(at(t, t)));
  }
  for (std::size_t i = 0; i < diag.size(); ++i) {
    for (std::size_t j = i + 1; j < diag.size(); ++j) {
      mpz_class g, l;
      mpz_gcd(g.get_mpz_t(), diag[i].get_mpz_t(), diag[j].get_mpz_t());
      mpz_lcm(l.get_mpz_t(), diag[i].get_mpz_t(), diag[j].get_mpz_t());
      diag[i] = g;
      diag[j] = l;
    }
  }
  return diag;
}

std::size_t rational_rank(const IntMatrix& m) { return smith_invariants(m).size(); }

HomologyTable homology(const ChainComplex& cc) {
  if (!cc.is_complex()) throw std::invalid_argument("homology: boundary does not square to zero");
  const int top = cc.top_degree();
  std::vector<std::vector<mpz_class>> inv(top + 2);
  for (int k = 1; k <= top; ++k) inv[k] = smith_invariants(cc.boundary[k]);
  HomologyTable h(top + 1);
  for (int k = 0; k <= top; ++k) {
    h[k].free_rank = cc.rank(k) - inv[k].size() - inv[k + 1].size();
    for (const mpz_class& d : inv[k + 1]) {
      if (d > 1) h[k].torsion.push_back(d);
    }
  }
  return h;
}

long euler_characteristic(const ChainComplex& cc) {
  long chi = 0;
  for (int k = 0; k <= cc.top_degree(); ++k) chi += (k % 2 == 0 ? 1 : -1) * static_cast<long>(cc.rank(k));
  return chi;
}

long euler_characteristic(const HomologyTable& h) {
  long chi = 0;
  for (std::size_t k = 0; k < h.size(); ++k) chi += (k % 2 == 0 ? 1 : -1) * static_cast<long>(h[k].free_rank);
  return chi;
}

namespace {

// Dense rational matrix with the few operations the exactness check needs.
struct RatMatrix {
  std::size_t rows = 0, cols = 0;
  std::vector<mpq_class> a;

  RatMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c) {}
  explicit RatMatrix(const IntMatrix& m) : rows(m.rows), cols(m.cols), a(m.data.size()) {
    for (std::size_t k = 0; k < a.size(); ++k) a[k] = static_cast<long>(m.data[k]);
  }
  mpq_class& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
  const mpq_class& operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }

  RatMatrix operator*(const RatMatrix& o) const {
    RatMatrix c(rows, o.cols);
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t k = 0; k < cols; ++k) {
        if (sgn((*this)(i, k)) == 0) continue;
        for (std::size_t j = 0; j < o.cols; ++j) {
          if (sgn(o(k, j)) != 0) c(i, j) += (*this)(i, k) * o(k, j);
        }
      }
    }
    return c;
  }
  bool is_zero() const {
    return std::all_of(a.begin(), a.end(), [](const mpq_class& v) { return sgn(v) == 0; });
  }
};

// Reduced row echelon form in place; returns pivot columns.
std::vector<std::size_t> rref(RatMatrix& m, std::size_t pivot_cols) {
  std::vector<std::size_t> pivots;
  std::size_t r = 0;
  for (std::size_t c = 0; c < pivot_cols && r < m.rows; ++c) {
    std::size_t p = r;
    while (p < m.rows && sgn(m(p, c)) == 0) ++p;
    if (p == m.rows) continue;
    for (std::size_t j = 0; j < m.cols; ++j) std::swap(m(r, j), m(p, j));
    const mpq_class inv = 1 / m(r, c);
    for (std::size_t j = c; j < m.cols; ++j) m(r, j) *= inv;
    for (std::size_t i = 0; i < m.rows; ++i) {
      if (i == r || sgn(m(i, c)) == 0) continue;
      const mpq_class f = m(i, c);
      for (std::size_t j = c; j < m.cols; ++j) {
        if (sgn(m(r, j)) != 0) m(i, j) -= f * m(r, j);
      }
    }
    pivots.push_back(c);
    ++r;
  }
  return pivots;
}

std::size_t rank_of(RatMatrix m) { return rref(m, m.cols).size(); }

RatMatrix nullspace(const RatMatrix& m) {
  RatMatrix r = m;
  const std::vector<std::size_t> piv = rref(r, r.cols);
  std::vector<bool> is_pivot(m.cols, false);
  for (std::size_t c : piv) is_pivot[c] = true;
  RatMatrix basis(m.cols, m.cols - piv.size());
  std::size_t k = 0;
  for (std::size_t free = 0; free < m.cols; ++free) {
    if (is_pivot[free]) continue;
    basis(free, k) = 1;
    for (std::size_t i = 0; i < piv.size(); ++i) basis(piv[i], k) = -r(i, free);
    ++k;
  }
  return basis;
}

// Rational homology of one degree: cycle representatives and a coordinate map.
struct RatHomology {
  std::size_t dim = 0;
  std::size_t n = 0;         // chain rank
  RatMatrix reps{0, 0};      // n x dim
  RatMatrix frame{0, 0};     // n x (b + dim): boundary basis then reps

  // Homology coordinates of cycles given as columns of v.
  RatMatrix coords(const RatMatrix& v) const {
    RatMatrix aug(n, frame.cols + v.cols);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < frame.cols; ++j) aug(i, j) = frame(i, j);
      for (std::size_t j = 0; j < v.cols; ++j) aug(i, frame.cols + j) = v(i, j);
    }
    const std::vector<std::size_t> piv = rref(aug, frame.cols);
    if (piv.size() != frame.cols) throw std::logic_error("homology frame is not independent");
    for (std::size_t i = frame.cols; i < n; ++i) {
      for (std::size_t j = 0; j < v.cols; ++j) {
        if (sgn(aug(i, frame.cols + j)) != 0) throw std::logic_error("vector is not a cycle");
      }
    }
    const std::size_t b = frame.cols - dim;
    RatMatrix out(dim, v.cols);
    for (std::size_t i = 0; i < dim; ++i) {
      for (std::size_t j = 0; j < v.cols; ++j) out(i, j) = aug(b + i, frame.cols + j);
    }
    return out;
  }
};

RatHomology rat_homology(const ChainComplex& c, int k) {
  RatHomology h;
  h.n = c.rank(k);
  const RatMatrix dk = (k >= 0 && k <= c.top_degree()) ? RatMatrix(c.boundary[k]) : RatMatrix(0, h.n);
  const RatMatrix z = (dk.rows == 0) ? [&] {
    RatMatrix id(h.n, h.n);
    for (std::size_t i = 0; i < h.n; ++i) id(i, i) = 1;
    return id;
  }()
                                     : nullspace(dk);
  const RatMatrix bnd = (k + 1 <= c.top_degree()) ? RatMatrix(c.boundary[k + 1]) : RatMatrix(h.n, 0);
  // Independent boundary columns, then cycles independent modulo boundaries.
  RatMatrix joint(h.n, bnd.cols + z.cols);
  for (std::size_t i = 0; i < h.n; ++i) {
    for (std::size_t j = 0; j < bnd.cols; ++j) joint(i, j) = bnd(i, j);
    for (std::size_t j = 0; j < z.cols; ++j) joint(i, bnd.cols + j) = z(i, j);
  }
  RatMatrix work = joint;
  const std::vector<std::size_t> piv = rref(work, work.cols);
  std::vector<std::size_t> bcols, hcols;
  for (std::size_t c0 : piv) (c0 < bnd.cols ? bcols : hcols).push_back(c0);
  h.dim = hcols.size();
  h.reps = RatMatrix(h.n, h.dim);
  h.frame = RatMatrix(h.n, bcols.size() + h.dim);
  for (std::size_t i = 0; i < h.n; ++i) {
    for (std::size_t j = 0; j < bcols.size(); ++j) h.frame(i, j) = joint(i, bcols[j]);
    for (std::size_t j = 0; j < h.dim; ++j) {
      h.reps(i, j) = joint(i, hcols[j]);
      h.frame(i, bcols.size() + j) = joint(i, hcols[j]);
    }
  }
  return h;
}

RatMatrix induced(const RatHomology& src, const RatHomology& tgt, const IntMatrix& map) {
  if (src.dim == 0 || tgt.dim == 0) return RatMatrix(tgt.dim, src.dim);
  return tgt.coords(RatMatrix(map) * src.reps);
}

IntMatrix map_block(const ChainMap& m, const ChainComplex& s, const ChainComplex& t, int k) {
  if (k < 0 || k >= static_cast<int>(m.matrices.size())) return IntMatrix(t.rank(k), s.rank(k));
  return m.matrices[k];
}

}  // namespace

MayerVietorisReport mayer_vietoris(const GluedSkeleton& gs) {
  // Direct sum L1 + L2 as a complex.
  ChainComplex sum;
  const int top_ab = std::max(gs.L1.top_degree(), gs.L2.top_degree());
  sum.generators.resize(top_ab + 1);
  for (int n = 0; n <= top_ab; ++n) {
    for (std::size_t k = 0; k < gs.L1.rank(n); ++k) sum.generators[n].push_back(gs.L1.generators[n][k]);
    for (std::size_t k = 0; k < gs.L2.rank(n); ++k) sum.generators[n].push_back(gs.L2.generators[n][k]);
    IntMatrix d(gs.L1.rank(n - 1) + gs.L2.rank(n - 1), gs.L1.rank(n) + gs.L2.rank(n));
    if (n <= gs.L1.top_degree()) {
      for (std::size_t i = 0; i < gs.L1.rank(n - 1); ++i) {
        for (std::size_t j = 0; j < gs.L1.rank(n); ++j) d(i, j) = gs.L1.boundary[n](i, j);
      }
    }
    if (n <= gs.L2.top_degree()) {
      for (std::size_t i = 0; i < gs.L2.rank(n - 1); ++i) {
        for (std::size_t j = 0; j < gs.L2.rank(n); ++j) {
          d(gs.L1.rank(n - 1) + i, gs.L1.rank(n) + j) = gs.L2.boundary[n](i, j);
        }
      }
    }
    sum.boundary.push_back(std::move(d));
  }

  const ChainComplex& c = gs.L12;
  const ChainComplex& cone = gs.glued;
  const int top = cone.top_degree() + 1;
  std::vector<RatHomology> hc, hs, hk;
  for (int n = 0; n <= top; ++n) {
    hc.push_back(rat_homology(c, n));
    hs.push_back(rat_homology(sum, n));
    hk.push_back(rat_homology(cone, n));
  }
  // alpha_n: H_n(L12) -> H_n(L1 + L2), beta_n: H_n(sum) -> H_n(cone), gamma_n: H_n(cone) -> H_{n-1}(L12).
  std::vector<RatMatrix> alpha, beta, gamma;
  for (int n = 0; n <= top; ++n) {
    const IntMatrix f = map_block(gs.f, c, gs.L1, n);
    const IntMatrix g = map_block(gs.g, c, gs.L2, n);
    IntMatrix a(sum.rank(n), c.rank(n));
    for (std::size_t j = 0; j < c.rank(n); ++j) {
      for (std::size_t i = 0; i < gs.L1.rank(n); ++i) a(i, j) = f(i, j);
      for (std::size_t i = 0; i < gs.L2.rank(n); ++i) a(gs.L1.rank(n) + i, j) = -g(i, j);
    }
    alpha.push_back(induced(hc[n], hs[n], a));

    IntMatrix b(cone.rank(n), sum.rank(n));
    for (std::size_t i = 0; i < sum.rank(n); ++i) b(i, i) = 1;
    beta.push_back(induced(hs[n], hk[n], b));

    if (n == 0) {
      gamma.emplace_back(0, hk[0].dim);
    } else {
      IntMatrix pr(c.rank(n - 1), cone.rank(n));
      const std::size_t off = sum.rank(n);
      for (std::size_t i = 0; i < c.rank(n - 1); ++i) pr(i, off + i) = 1;
      gamma.push_back(induced(hk[n], hc[n - 1], pr));
    }
  }

  MayerVietorisReport rep;
  auto check = [&](const RatMatrix& in, const RatMatrix& out, std::size_t dim, const std::string& where) {
    ++rep.slots_checked;
    const bool zero = (in.cols == 0 || out.rows == 0) ? true : (out * in).is_zero();
    const std::size_t r_in = rank_of(in);
    const std::size_t r_out = rank_of(out);
    if (!zero || r_in != dim - r_out) {
      rep.exact = false;
      rep.failures.push_back(where);
    }
  };
  for (int n = 0; n <= top; ++n) {
    const std::string tag = std::to_string(n);
    check(alpha[n], beta[n], hs[n].dim, "H_" + tag + "(L1+L2)");
    const RatMatrix none_in(hc[n].dim, 0);
    check(beta[n], n + 1 <= top ? gamma[n + 1] : RatMatrix(0, hk[n].dim), hk[n].dim, "H_" + tag + "(glued)");
    check(n + 1 <= top ? gamma[n + 1] : none_in, alpha[n], hc[n].dim, "H_" + tag + "(L12)");
  }
  return rep;
}

std::string format_homology(const HomologyTable& h) {
  std::ostringstream os;
  os << "(";
  for (std::size_t k = 0; k < h.size(); ++k) {
    if (k) os << ", ";
    if (h[k].free_rank == 0 && h[k].torsion.empty()) {
      os << "0";
      continue;
    }
    bool first = true;
    if (h[k].free_rank > 0) {
      os << "Z";
      if (h[k].free_rank > 1) os << "^" << h[k].free_rank;
      first = false;
    }
    for (const mpz_class& t : h[k].torsion) {
      os << (first ? "" : "+") << "Z/" << t.get_str();
      first = false;
    }
  }
  os << ")";
  return os.str();
}

}  // namespace syzkit::skeleton
