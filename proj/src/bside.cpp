#include "syzkit/bside.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace syzkit::bside {

bool GrlexLess::operator()(const Exponent& a, const Exponent& b) const {
  const int da = std::accumulate(a.begin(), a.end(), 0);
  const int db = std::accumulate(b.begin(), b.end(), 0);
  if (da != db) return da < db;
  return a < b;
}

LaurentPoly::LaurentPoly(int n, int m) : n_(n), m_(m) {
  if (n < 0 || m < 0) throw std::invalid_argument("LaurentPoly: negative variable count");
}

LaurentPoly LaurentPoly::constant(int n, int m, const mpq_class& c) {
  LaurentPoly p(n, m);
  p.add_term(Exponent(p.nvars(), 0), c);
  return p;
}

LaurentPoly LaurentPoly::monomial(int n, int m, const Exponent& e, const mpq_class& c) {
  LaurentPoly p(n, m);
  p.add_term(e, c);
  return p;
}

LaurentPoly LaurentPoly::z(int n, int m, int i) {
  if (i < 0 || i > n) throw std::invalid_argument("LaurentPoly::z: index out of range");
  Exponent e(n + 1 + m, 0);
  e[i] = 1;
  return monomial(n, m, e);
}

LaurentPoly LaurentPoly::u(int n, int m, int j, int k) {
  if (j < 1 || j > m) throw std::invalid_argument("LaurentPoly::u: index out of range");
  Exponent e(n + 1 + m, 0);
  e[n + j] = k;
  return monomial(n, m, e);
}

void LaurentPoly::add_term(const Exponent& e, const mpq_class& c) {
  if (e.size() != nvars()) throw std::invalid_argument("LaurentPoly: exponent length mismatch");
  for (int i = 0; i <= n_; ++i) {
    if (e[i] < 0) throw std::invalid_argument("LaurentPoly: negative z-exponent");
  }
  if (sgn(c) == 0) return;
  mpq_class v = c;
  v.canonicalize();
  auto [it, inserted] = terms_.try_emplace(e, v);
  if (!inserted) {
    it->second += v;
    if (sgn(it->second) == 0) terms_.erase(it);
  }
}

int LaurentPoly::z_degree() const {
  int d = 0;
  for (const auto& [e, c] : terms_) d = std::max(d, std::accumulate(e.begin(), e.begin() + n_ + 1, 0));
  return d;
}

void LaurentPoly::check_compatible(const LaurentPoly& o) const {
  if (n_ != o.n_ || m_ != o.m_) throw std::invalid_argument("LaurentPoly: variable-count mismatch");
}

LaurentPoly LaurentPoly::operator-() const {
  LaurentPoly r = *this;
  for (auto& [e, c] : r.terms_) c = -c;
  return r;
}

LaurentPoly& LaurentPoly::operator+=(const LaurentPoly& o) {
  check_compatible(o);
  for (const auto& [e, c] : o.terms_) add_term(e, c);
  return *this;
}

LaurentPoly& LaurentPoly::operator-=(const LaurentPoly& o) {
  check_compatible(o);
  for (const auto& [e, c] : o.terms_) add_term(e, -c);
  return *this;
}

LaurentPoly operator*(const LaurentPoly& a, const LaurentPoly& b) {
  a.check_compatible(b);
  LaurentPoly r(a.n_, a.m_);
  Exponent e(a.nvars());
  for (const auto& [ea, ca] : a.terms_) {
    for (const auto& [eb, cb] : b.terms_) {
      for (std::size_t v = 0; v < e.size(); ++v) e[v] = ea[v] + eb[v];
      r.add_term(e, ca * cb);
    }
  }
  return r;
}

LaurentPoly operator*(const mpq_class& c, const LaurentPoly& a) {
  LaurentPoly r(a.n_, a.m_);
  if (sgn(c) == 0) return r;
  r.terms_ = a.terms_;
  for (auto& [e, v] : r.terms_) v *= c;
  return r;
}

bool LaurentPoly::operator==(const LaurentPoly& o) const {
  check_compatible(o);
  return terms_ == o.terms_;
}

std::string LaurentPoly::to_string() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [e, c] : terms_) {
    std::string mono;
    for (std::size_t v = 0; v < e.size(); ++v) {
      if (e[v] == 0) continue;
      if (!mono.empty()) mono += "*";
      mono += static_cast<int>(v) <= n_ ? "z" + std::to_string(v) : "u" + std::to_string(v - n_);
      if (e[v] != 1) mono += "^" + std::to_string(e[v]);
    }
    mpq_class mag = abs(c);
    if (first) {
      if (sgn(c) < 0) os << "-";
    } else {
      os << (sgn(c) < 0 ? " - " : " + ");
    }
    first = false;
    if (mono.empty()) {
      os << mag.get_str();
    } else if (mag == 1) {
      os << mono;
    } else {
      os << mag.get_str() << "*" << mono;
    }
  }
  return os.str();
}

mpq_class LaurentPoly::evaluate(std::span<const mpq_class> zv, std::span<const mpq_class> uv) const {
  if (zv.size() != static_cast<std::size_t>(n_ + 1) || uv.size() != static_cast<std::size_t>(m_)) {
    throw std::invalid_argument("LaurentPoly::evaluate: point has the wrong dimension");
  }
  mpq_class total = 0;
  for (const auto& [e, c] : terms_) {
    mpq_class t = c;
    for (int i = 0; i <= n_; ++i) {
      for (int k = 0; k < e[i]; ++k) t *= zv[i];
    }
    for (int j = 0; j < m_; ++j) {
      const int k = e[n_ + 1 + j];
      if (k < 0 && sgn(uv[j]) == 0) throw std::domain_error("LaurentPoly::evaluate: negative power of zero");
      for (int r = 0; r < std::abs(k); ++r) {
        if (k > 0) {
          t *= uv[j];
        } else {
          t /= uv[j];
        }
      }
    }
    total += t;
  }
  return total;
}

namespace {

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t p) {
  return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % p);
}

std::uint64_t powmod(std::uint64_t a, std::uint64_t k, std::uint64_t p) {
  std::uint64_t r = 1;
  a %= p;
  while (k) {
    if (k & 1) r = mulmod(r, a, p);
    a = mulmod(a, a, p);
    k >>= 1;
  }
  return r;
}

std::uint64_t invmod(std::uint64_t a, std::uint64_t p) {
  if (a % p == 0) throw std::domain_error("invmod: zero has no inverse");
  return powmod(a, p - 2, p);
}

std::uint64_t reduce_mpz(const mpz_class& v, std::uint64_t p) {
  mpz_class r;
  mpz_fdiv_r_ui(r.get_mpz_t(), v.get_mpz_t(), p);
  return r.get_ui();
}

std::uint64_t reduce_mpq(const mpq_class& c, std::uint64_t p) {
  return mulmod(reduce_mpz(c.get_num(), p), invmod(reduce_mpz(c.get_den(), p), p), p);
}

}  // namespace

std::uint64_t LaurentPoly::evaluate_mod(std::span<const std::uint64_t> zv, std::span<const std::uint64_t> uv,
                                        std::uint64_t prime) const {
  if (zv.size() != static_cast<std::size_t>(n_ + 1) || uv.size() != static_cast<std::size_t>(m_)) {
    throw std::invalid_argument("LaurentPoly::evaluate_mod: point has the wrong dimension");
  }
  std::vector<std::uint64_t> uinv(m_, 0);
  std::uint64_t total = 0;
  for (const auto& [e, c] : terms_) {
    std::uint64_t t = reduce_mpq(c, prime);
    for (int i = 0; i <= n_; ++i) t = mulmod(t, powmod(zv[i], e[i], prime), prime);
    for (int j = 0; j < m_; ++j) {
      const int k = e[n_ + 1 + j];
      if (k >= 0) {
        t = mulmod(t, powmod(uv[j], k, prime), prime);
      } else {
        if (uinv[j] == 0) uinv[j] = invmod(uv[j], prime);
        t = mulmod(t, powmod(uinv[j], -k, prime), prime);
      }
    }
    total = (total + t) % prime;
  }
  return total;
}

LaurentPoly LaurentPoly::derivative(std::size_t v) const {
  if (v >= nvars()) throw std::invalid_argument("LaurentPoly::derivative: variable out of range");
  LaurentPoly r(n_, m_);
  for (const auto& [e, c] : terms_) {
    if (e[v] == 0) continue;
    Exponent d = e;
    d[v] -= 1;
    r.add_term(d, c * e[v]);
  }
  return r;
}

LaurentPoly pow(const LaurentPoly& a, unsigned k) {
  LaurentPoly r = LaurentPoly::constant(a.n(), a.m(), 1);
  LaurentPoly base = a;
  while (k) {
    if (k & 1) r = r * base;
    k >>= 1;
    if (k) base = base * base;
  }
  return r;
}

LaurentPoly full_product(int n, int m) {
  Exponent e(n + 1 + m, 0);
  std::fill(e.begin(), e.begin() + n + 1, 1);
  return LaurentPoly::monomial(n, m, e);
}

LaurentPoly z_product(int n, int m) {
  Exponent e(n + 1 + m, 0);
  std::fill(e.begin() + 1, e.begin() + n + 1, 1);
  return LaurentPoly::monomial(n, m, e);
}

LaurentPoly pants_polynomial(int n, int m) {
  LaurentPoly g = LaurentPoly::constant(n, m, 1);
  for (int j = 1; j <= m; ++j) g += LaurentPoly::u(n, m, j);
  return g;
}

namespace {

int full_power(const Exponent& e, int n) { return *std::min_element(e.begin(), e.begin() + n + 1); }

}  // namespace

bool is_normal(const LaurentPoly& a) {
  for (const auto& [e, c] : a.terms()) {
    if (full_power(e, a.n()) > 0) return false;
  }
  return true;
}

QuotientElement normal_form(const LaurentPoly& a) {
  const int n = a.n(), m = a.m();
  const LaurentPoly g = pants_polynomial(n, m);
  std::vector<LaurentPoly> gpow{LaurentPoly::constant(n, m, 1)};
  LaurentPoly out(n, m);
  for (const auto& [e, c] : a.terms()) {
    const int k = full_power(e, n);
    if (k == 0) {
      out.add_term(e, c);
      continue;
    }
    while (static_cast<int>(gpow.size()) <= k) gpow.push_back(gpow.back() * g);
    Exponent rest = e;
    for (int i = 0; i <= n; ++i) rest[i] -= k;
    out += LaurentPoly::monomial(n, m, rest, c) * gpow[k];
  }
  return {std::move(out)};
}

LaurentPoly rewrite_randomized(const LaurentPoly& a, std::mt19937_64& rng, std::size_t* steps) {
  const int n = a.n(), m = a.m();
  const LaurentPoly g = pants_polynomial(n, m);
  LaurentPoly cur = a;
  std::size_t count = 0;
  for (;;) {
    std::vector<const Exponent*> sites;
    for (const auto& [e, c] : cur.terms()) {
      if (full_power(e, n) > 0) sites.push_back(&e);
    }
    if (sites.empty()) break;
    const Exponent e = *sites[std::uniform_int_distribution<std::size_t>(0, sites.size() - 1)(rng)];
    const mpq_class c = cur.terms().at(e);
    Exponent rest = e;
    for (int i = 0; i <= n; ++i) rest[i] -= 1;
    cur.add_term(e, -c);
    cur += LaurentPoly::monomial(n, m, rest, c) * g;
    ++count;
  }
  if (steps) *steps = count;
  return cur;
}

LaurentPoly random_poly(int n, int m, int z_degree, int u_range, std::size_t max_terms, std::mt19937_64& rng) {
  LaurentPoly p(n, m);
  std::uniform_int_distribution<std::size_t> nterms(1, std::max<std::size_t>(max_terms, 1));
  std::uniform_int_distribution<int> num(-5, 5), den(1, 3), uexp(-u_range, u_range), zvar(0, n);
  std::uniform_int_distribution<int> zdeg(0, z_degree);
  const std::size_t t = nterms(rng);
  for (std::size_t k = 0; k < t; ++k) {
    Exponent e(n + 1 + m, 0);
    const int d = zdeg(rng);
    for (int r = 0; r < d; ++r) ++e[zvar(rng)];
    for (int j = 0; j < m; ++j) e[n + 1 + j] = uexp(rng);
    int a = num(rng);
    if (a == 0) a = 1;
    mpq_class c(a, den(rng));
    c.canonicalize();
    p.add_term(e, c);
  }
  return p;
}

namespace {

constexpr std::uint64_t kPrime = (std::uint64_t{1} << 61) - 1;

void require_shape(int n, int m) {
  if (n < 1) throw std::invalid_argument("bside: n must be >= 1");
  if (m < 0) throw std::invalid_argument("bside: m must be >= 0");
}

struct ModPoint {
  std::vector<std::uint64_t> z;
  std::vector<std::uint64_t> u;
};

// A point of X(n,m) over F_p: z_1..z_n, u nonzero, z_0 = g / f.
ModPoint sample_point(int n, int m, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::uint64_t> unit(1, kPrime - 1);
  ModPoint pt;
  pt.z.resize(n + 1);
  pt.u.resize(m);
  std::uint64_t f = 1, g = 1;
  for (int i = 1; i <= n; ++i) {
    pt.z[i] = unit(rng);
    f = mulmod(f, pt.z[i], kPrime);
  }
  for (int j = 0; j < m; ++j) {
    pt.u[j] = unit(rng);
    g = (g + pt.u[j]) % kPrime;
  }
  pt.z[0] = mulmod(g, invmod(f, kPrime), kPrime);
  return pt;
}

// Right kernel of a dense matrix over F_p, one basis vector per free column.
std::vector<std::vector<std::uint64_t>> kernel_mod(std::vector<std::vector<std::uint64_t>> a, std::size_t cols) {
  std::vector<std::size_t> pivots;
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < a.size(); ++c) {
    std::size_t p = r;
    while (p < a.size() && a[p][c] == 0) ++p;
    if (p == a.size()) continue;
    std::swap(a[r], a[p]);
    const std::uint64_t inv = invmod(a[r][c], kPrime);
    for (std::size_t j = c; j < cols; ++j) a[r][j] = mulmod(a[r][j], inv, kPrime);
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (i == r || a[i][c] == 0) continue;
      const std::uint64_t f = a[i][c];
      for (std::size_t j = c; j < cols; ++j) {
        if (a[r][j] != 0) a[i][j] = (a[i][j] + kPrime - mulmod(f, a[r][j], kPrime)) % kPrime;
      }
    }
    pivots.push_back(c);
    ++r;
  }
  std::vector<bool> is_pivot(cols, false);
  for (std::size_t c : pivots) is_pivot[c] = true;
  std::vector<std::vector<std::uint64_t>> basis;
  for (std::size_t free = 0; free < cols; ++free) {
    if (is_pivot[free]) continue;
    std::vector<std::uint64_t> v(cols, 0);
    v[free] = 1;
    for (std::size_t i = 0; i < pivots.size(); ++i) v[pivots[i]] = (kPrime - a[i][free]) % kPrime;
    basis.push_back(std::move(v));
  }
  return basis;
}

bool vanishes_mod(const LaurentPoly& a) {
  for (const auto& [e, c] : a.terms()) {
    if (reduce_mpq(c, kPrime) != 0) return false;
  }
  return true;
}

// Monomials z^a u^b with a in {0,1}^{n+1} or z_0 times the full product, and
// |b|_1 <= 1. Spans the relation z_0 f - g together with some of its shifts.
std::vector<Exponent> evaluation_basis(int n, int m) {
  std::vector<Exponent> zparts;
  for (unsigned mask = 0; mask < (1u << (n + 1)); ++mask) {
    Exponent e(n + 1 + m, 0);
    for (int i = 0; i <= n; ++i) e[i] = (mask >> i) & 1;
    zparts.push_back(e);
  }
  Exponent top(n + 1 + m, 0);
  std::fill(top.begin(), top.begin() + n + 1, 1);
  top[0] = 2;
  zparts.push_back(top);
  std::vector<Exponent> basis;
  for (const auto& zp : zparts) {
    basis.push_back(zp);
    for (int j = 0; j < m; ++j) {
      for (int s : {1, -1}) {
        Exponent e = zp;
        e[n + 1 + j] = s;
        basis.push_back(e);
      }
    }
  }
  return basis;
}

}  // namespace

BlowupReport verify_blowup_presentation(int n, int m, std::uint64_t seed) {
  require_shape(n, m);
  const LaurentPoly rel = LaurentPoly::z(n, m, 0) * z_product(n, m) - pants_polynomial(n, m);
  return verify_blowup_presentation(n, m, rel, seed);
}

BlowupReport verify_blowup_presentation(int n, int m, const LaurentPoly& relation, std::uint64_t seed) {
  require_shape(n, m);
  if (relation.n() != n || relation.m() != m) throw std::invalid_argument("bside: relation has the wrong shape");
  BlowupReport rep;
  rep.n = n;
  rep.m = m;

  const LaurentPoly nf_rel = normal_form(relation).poly;
  rep.relation_vanishes = nf_rel.is_zero();
  if (!rep.relation_vanishes) rep.residual = nf_rel.to_string();

  const LaurentPoly f = z_product(n, m);
  const LaurentPoly g = pants_polynomial(n, m);
  const LaurentPoly lhs = normal_form(LaurentPoly::z(n, m, 0) * f).poly;
  const LaurentPoly rhs = normal_form(g).poly;
  rep.substitution_holds = lhs == rhs;
  if (!rep.substitution_holds && rep.residual.empty()) rep.residual = (lhs - rhs).to_string();

  std::mt19937_64 rng(seed ^ (static_cast<std::uint64_t>(n) << 32) ^ static_cast<std::uint64_t>(m));
  const std::vector<Exponent> basis = evaluation_basis(n, m);
  rep.basis_size = basis.size();
  rep.samples = std::min<std::size_t>(2 * basis.size() + 8, 10000);
  std::vector<ModPoint> points;
  for (std::size_t s = 0; s < rep.samples; ++s) points.push_back(sample_point(n, m, rng));

  std::vector<std::vector<std::uint64_t>> eval(rep.samples, std::vector<std::uint64_t>(basis.size()));
  for (std::size_t b = 0; b < basis.size(); ++b) {
    const LaurentPoly mono = LaurentPoly::monomial(n, m, basis[b]);
    for (std::size_t s = 0; s < rep.samples; ++s) eval[s][b] = mono.evaluate_mod(points[s].z, points[s].u, kPrime);
  }
  const auto kernel = kernel_mod(eval, basis.size());
  rep.kernel_dim = kernel.size();

  rep.kernel_in_ideal = !kernel.empty();
  std::uniform_int_distribution<std::uint64_t> coef(0, kPrime - 1);
  const std::size_t trials = kernel.empty() ? 0 : std::max<std::size_t>(kernel.size(), 20);
  for (std::size_t t = 0; t < trials && rep.kernel_in_ideal; ++t) {
    std::vector<std::uint64_t> w(basis.size(), 0);
    if (t < kernel.size()) {
      w = kernel[t];
    } else {
      for (const auto& v : kernel) {
        const std::uint64_t c = coef(rng);
        for (std::size_t b = 0; b < basis.size(); ++b) w[b] = (w[b] + mulmod(c, v[b], kPrime)) % kPrime;
      }
    }
    LaurentPoly elem(n, m);
    for (std::size_t b = 0; b < basis.size(); ++b) {
      if (w[b] != 0) elem.add_term(basis[b], mpq_class(mpz_class(std::to_string(w[b]))));
    }
    ++rep.kernel_elements_checked;
    const LaurentPoly r = normal_form(elem).poly;
    if (!vanishes_mod(r)) {
      rep.kernel_in_ideal = false;
      if (rep.residual.empty()) rep.residual = "kernel element " + elem.to_string() + " has normal form " + r.to_string();
    }
  }

  rep.evaluation_separates = true;
  for (int t = 0; t < 20 && rep.evaluation_separates; ++t) {
    const LaurentPoly a = random_poly(n, m, n + 2, 1, 6, rng);
    const LaurentPoly r = normal_form(a).poly;
    bool nonzero_somewhere = false;
    for (const auto& pt : points) {
      const std::uint64_t va = a.evaluate_mod(pt.z, pt.u, kPrime);
      if (va != r.evaluate_mod(pt.z, pt.u, kPrime)) {
        rep.evaluation_separates = false;
        if (rep.residual.empty()) rep.residual = "evaluation differs from normal form for " + a.to_string();
        break;
      }
      if (va != 0) nonzero_somewhere = true;
    }
    if (rep.evaluation_separates && !r.is_zero() && !nonzero_somewhere) {
      rep.evaluation_separates = false;
      if (rep.residual.empty()) rep.residual = "nonzero normal form vanishes on all samples: " + r.to_string();
    }
  }
  return rep;
}

SmoothnessReport jacobian_smoothness(int n, int m) {
  if (n < 0 || m < 0) throw std::invalid_argument("bside: negative shape");
  const LaurentPoly F = full_product(n, m) - pants_polynomial(n, m);
  return jacobian_smoothness(F);
}

SmoothnessReport jacobian_smoothness(const LaurentPoly& F) {
  SmoothnessReport rep;
  const std::size_t nv = F.nvars();
  for (std::size_t v = 0; v < nv; ++v) rep.partials.push_back(F.derivative(v));

  auto var_name = [&](std::size_t v) {
    return static_cast<int>(v) <= F.n() ? "z" + std::to_string(v) : "u" + std::to_string(v - F.n());
  };
  const Exponent zero(nv, 0);
  for (std::size_t v = 0; v < nv; ++v) {
    const LaurentPoly& d = rep.partials[v];
    if (d.size() == 1 && d.terms().begin()->first == zero) {
      rep.has_constant_partial = true;
      rep.unit_ideal = true;
      const mpq_class c = d.terms().begin()->second;
      rep.certificate = "1 = (" + mpq_class(1 / c).get_str() + ")*dF/d" + var_name(v);
      return rep;
    }
  }

  // Euler combination E = sum x_v dF/dx_v; look for c with E - c F a nonzero constant.
  LaurentPoly E(F.n(), F.m());
  for (std::size_t v = 0; v < nv; ++v) {
    Exponent e(nv, 0);
    e[v] = 1;
    E += LaurentPoly::monomial(F.n(), F.m(), e) * rep.partials[v];
  }
  for (const auto& [e, c] : F.terms()) {
    if (e == zero) continue;
    const auto it = E.terms().find(e);
    const mpq_class lambda = it == E.terms().end() ? mpq_class(0) : it->second / c;
    const LaurentPoly rest = E - lambda * F;
    if (rest.size() == 1 && rest.terms().begin()->first == zero) {
      const mpq_class k = rest.terms().begin()->second;
      const LaurentPoly check = (1 / k) * rest;
      if (check == LaurentPoly::constant(F.n(), F.m(), 1)) {
        rep.unit_ideal = true;
        std::ostringstream os;
        os << "1 = (" << mpq_class(1 / k).get_str() << ")*sum_v x_v*dF/dx_v - (" << mpq_class(lambda / k).get_str()
           << ")*F";
        rep.certificate = os.str();
      }
    }
    break;
  }
  return rep;
}

namespace {

void require_cone_ring(const LaurentPoly& a) {
  for (const auto& [e, c] : a.terms()) {
    if (e[0] != 0) throw std::invalid_argument("cone image: element must not involve z_0");
  }
}

LaurentPoly drop_f_multiples(const LaurentPoly& a) {
  LaurentPoly r(a.n(), a.m());
  for (const auto& [e, c] : a.terms()) {
    bool divisible = true;
    for (int i = 1; i <= a.n(); ++i) divisible = divisible && e[i] >= 1;
    if (!divisible) r.add_term(e, c);
  }
  return r;
}

// Substitutes u_m = K = -1 - sum_{j<m} u_j, clearing negative powers of u_m.
ConeImage substitute_last_u(const LaurentPoly& a) {
  const int n = a.n(), m = a.m();
  ConeImage img{LaurentPoly(n, m), 0};
  if (m == 0) return img;
  const std::size_t last = static_cast<std::size_t>(n + m);
  int lowest = 0;
  for (const auto& [e, c] : a.terms()) lowest = std::min(lowest, e[last]);
  img.E = static_cast<unsigned>(-lowest);
  LaurentPoly K = LaurentPoly::constant(n, m, -1);
  for (int j = 1; j < m; ++j) K -= LaurentPoly::u(n, m, j);
  std::vector<LaurentPoly> kpow{LaurentPoly::constant(n, m, 1)};
  for (const auto& [e, c] : a.terms()) {
    const int k = e[last] + static_cast<int>(img.E);
    while (static_cast<int>(kpow.size()) <= k) kpow.push_back(kpow.back() * K);
    Exponent rest = e;
    rest[last] = 0;
    img.P += LaurentPoly::monomial(n, m, rest, c) * kpow[k];
  }
  return img;
}

LaurentPoly cone_K(int n, int m) {
  LaurentPoly K = LaurentPoly::constant(n, m, -1);
  for (int j = 1; j < m; ++j) K -= LaurentPoly::u(n, m, j);
  return K;
}

}  // namespace

ConeImage cone_image_f_then_g(const LaurentPoly& a) {
  require_cone_ring(a);
  ConeImage img = substitute_last_u(drop_f_multiples(a));
  img.P = drop_f_multiples(img.P);
  return img;
}

ConeImage cone_image_g_then_f(const LaurentPoly& a) {
  require_cone_ring(a);
  ConeImage img = substitute_last_u(a);
  img.P = drop_f_multiples(img.P);
  return img;
}

bool cone_images_equal(const ConeImage& a, const ConeImage& b) {
  if (a.P.m() == 0) return true;
  const LaurentPoly K = cone_K(a.P.n(), a.P.m());
  return drop_f_multiples(a.P * pow(K, b.E)) == drop_f_multiples(b.P * pow(K, a.E));
}

ConeReport cone_relation_check(int n, int m, std::uint64_t seed, std::size_t samples) {
  require_shape(n, m);
  ConeReport rep;
  rep.n = n;
  rep.m = m;
  const LaurentPoly f = z_product(n, m);
  const LaurentPoly g = pants_polynomial(n, m);
  const LaurentPoly ident = normal_form(LaurentPoly::z(n, m, 0) * f - g).poly;
  rep.identity_vanishes = ident.is_zero();
  if (!rep.identity_vanishes) rep.residual = ident.to_string();

  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL ^ (static_cast<std::uint64_t>(n) << 16) ^ static_cast<std::uint64_t>(m));
  auto sample_r = [&] {
    // Elements of R carry no z_0; its sampled exponent is folded into z_1.
    const LaurentPoly raw = random_poly(n, m, 4, 2, 5, rng);
    LaurentPoly out(n, m);
    for (const auto& [e, c] : raw.terms()) {
      Exponent s = e;
      s[1] += s[0];
      s[0] = 0;
      out.add_term(s, c);
    }
    return out;
  };
  rep.samples = samples;
  for (std::size_t t = 0; t < samples; ++t) {
    const LaurentPoly a = sample_r();
    const LaurentPoly moved = a + f * sample_r() + g * sample_r();
    const ConeImage ia = cone_image_f_then_g(a);
    const ConeImage ib = cone_image_g_then_f(a);
    const ConeImage ic = cone_image_f_then_g(moved);
    const ConeImage id = cone_image_g_then_f(moved);
    if (cone_images_equal(ia, ib) && cone_images_equal(ia, ic) && cone_images_equal(ia, id)) {
      ++rep.agreements;
    } else if (rep.residual.empty()) {
      rep.residual = "factorizations disagree on " + a.to_string();
    }
  }
  return rep;
}

}  // namespace syzkit::bside
