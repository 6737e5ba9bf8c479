#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <gmpxx.h>

// Exact Laurent polynomials in z_0..z_n (nonnegative exponents) and
// u_1^{+-1}..u_m^{+-1} over Q, the coordinate ring of X(n,m) given by
// z_0...z_n = 1 + u_1 + ... + u_m, and ring-level identity checks.
namespace syzkit::bside {

/// Exponent vector: n+1 z-entries followed by m u-entries.
using Exponent = std::vector<int>;

/// Graded lexicographic order: total degree first, then lexicographic.
struct GrlexLess {
  bool operator()(const Exponent& a, const Exponent& b) const;
};

class LaurentPoly {
 public:
  using TermMap = std::map<Exponent, mpq_class, GrlexLess>;

  LaurentPoly(int n, int m);

  static LaurentPoly constant(int n, int m, const mpq_class& c);
  /// Throws std::invalid_argument on a wrong length or a negative z-exponent.
  static LaurentPoly monomial(int n, int m, const Exponent& e, const mpq_class& c = 1);
  static LaurentPoly z(int n, int m, int i);           // 0 <= i <= n
  static LaurentPoly u(int n, int m, int j, int k = 1);  // u_j^k, 1 <= j <= m

  int n() const { return n_; }
  int m() const { return m_; }
  std::size_t nvars() const { return static_cast<std::size_t>(n_ + 1 + m_); }
  const TermMap& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool is_zero() const { return terms_.empty(); }

  void add_term(const Exponent& e, const mpq_class& c);
  /// Largest total z-degree among the terms (0 for the zero polynomial).
  int z_degree() const;

  LaurentPoly operator-() const;
  LaurentPoly& operator+=(const LaurentPoly& o);
  LaurentPoly& operator-=(const LaurentPoly& o);
  friend LaurentPoly operator+(LaurentPoly a, const LaurentPoly& b) { return a += b; }
  friend LaurentPoly operator-(LaurentPoly a, const LaurentPoly& b) { return a -= b; }
  friend LaurentPoly operator*(const LaurentPoly& a, const LaurentPoly& b);
  friend LaurentPoly operator*(const mpq_class& c, const LaurentPoly& a);
  bool operator==(const LaurentPoly& o) const;

  /// Canonical display, e.g. "1 + 2*u1 + u1^2" or "-1/2*z0*z1*u2^-1".
  std::string to_string() const;

  /// Exact evaluation; throws std::domain_error when a negative power of a
  /// zero u-value is needed.
  mpq_class evaluate(std::span<const mpq_class> z, std::span<const mpq_class> u) const;
  /// Evaluation modulo `prime` (< 2^62); values already reduced.
  std::uint64_t evaluate_mod(std::span<const std::uint64_t> z, std::span<const std::uint64_t> u,
                             std::uint64_t prime) const;

  /// Partial derivative in variable v (0..n for z, n+1.. for u).
  LaurentPoly derivative(std::size_t v) const;

 private:
  void check_compatible(const LaurentPoly& o) const;

  int n_;
  int m_;
  TermMap terms_;
};

LaurentPoly pow(const LaurentPoly& a, unsigned k);

/// z_0 z_1 ... z_n.
LaurentPoly full_product(int n, int m);
/// z_1 ... z_n (the f of the blowup presentation).
LaurentPoly z_product(int n, int m);
/// 1 + u_1 + ... + u_m.
LaurentPoly pants_polynomial(int n, int m);

struct QuotientElement {
  LaurentPoly poly;
};

/// No monomial divisible by z_0 z_1 ... z_n.
bool is_normal(const LaurentPoly& a);

/// Closed form of exhaustive rewriting z_0...z_n -> 1 + sum u: a monomial
/// with minimal z-exponent k becomes z^{a-k} u^b (1 + sum u)^k.
QuotientElement normal_form(const LaurentPoly& a);

/// One-step-at-a-time rewriting, choosing a reducible term uniformly at
/// random at every step. Counts rewrite steps in `steps` when given.
LaurentPoly rewrite_randomized(const LaurentPoly& a, std::mt19937_64& rng, std::size_t* steps = nullptr);

/// Random polynomial with total z-degree <= z_degree, u-exponents in
/// [-u_range, u_range] and small rational coefficients.
LaurentPoly random_poly(int n, int m, int z_degree, int u_range, std::size_t max_terms, std::mt19937_64& rng);

struct BlowupReport {
  int n = 0;
  int m = 0;
  bool relation_vanishes = false;      // (a) z_0 f - g reduces to 0
  bool substitution_holds = false;     // (b) nf(z_0 f) == nf(g)
  bool kernel_in_ideal = false;        // (c) evaluation-kernel elements reduce to 0
  bool evaluation_separates = false;   // (c) nonzero normal forms are nonzero somewhere
  std::size_t samples = 0;
  std::size_t basis_size = 0;
  std::size_t kernel_dim = 0;
  std::size_t kernel_elements_checked = 0;
  std::string residual;                // offending element, empty when all checks pass

  bool passed() const { return relation_vanishes && substitution_holds && kernel_in_ideal && evaluation_separates; }
};

/// Checks the presentation Q[z_1..z_n, u^{+-1}][z_0]/(z_0 f - g) of X(n,m)
/// with f = z_1...z_n and g = 1 + sum u. A custom `relation` replaces
/// z_0 f - g in check (a), for negative controls. Check (c) samples points of
/// X(n,m) over F_p with p = 2^61 - 1.
BlowupReport verify_blowup_presentation(int n, int m, std::uint64_t seed = 1);
BlowupReport verify_blowup_presentation(int n, int m, const LaurentPoly& relation, std::uint64_t seed = 1);

struct SmoothnessReport {
  std::vector<LaurentPoly> partials;
  bool has_constant_partial = false;
  bool unit_ideal = false;
  std::string certificate;  // identity 1 = ... when unit_ideal

  bool passed() const { return unit_ideal; }
};

/// Jacobian ideal of F = z_0...z_n - 1 - sum u. For m >= 1 a partial is -1;
/// for m = 0 the Euler identity 1 = (1/(n+1)) sum z_i dF/dz_i - F is used.
SmoothnessReport jacobian_smoothness(int n, int m);
/// Same search for an arbitrary F: a nonzero constant partial, or an Euler
/// combination sum x_i dF/dx_i - c F equal to a nonzero constant.
SmoothnessReport jacobian_smoothness(const LaurentPoly& F);

struct ConeReport {
  int n = 0;
  int m = 0;
  bool identity_vanishes = false;  // z_0 (z_1...z_n) - (1 + sum u) == 0 in the quotient
  std::size_t samples = 0;
  std::size_t agreements = 0;      // both factorizations agree and kill f h + g k
  std::string residual;

  bool passed() const { return identity_vanishes && agreements == samples; }
};

/// Image of an element of R = Q[z_1..z_n, u^{+-1}] in R/(f, g), written as
/// P * K^{-E} with K = u_m = -1 - sum_{j<m} u_j substituted and every
/// monomial divisible by f dropped. For m = 0 the target ring is zero.
struct ConeImage {
  LaurentPoly P;
  unsigned E = 0;
};

ConeImage cone_image_f_then_g(const LaurentPoly& a);
ConeImage cone_image_g_then_f(const LaurentPoly& a);
bool cone_images_equal(const ConeImage& a, const ConeImage& b);

ConeReport cone_relation_check(int n, int m, std::uint64_t seed = 1, std::size_t samples = 100);

}  // namespace syzkit::bside
