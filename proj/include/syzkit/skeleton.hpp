#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <gmpxx.h>

// Cellular chain models of the FLTZ Lagrangian L_{C^q} x T^p, its boundary at
// infinity, the torus degeneration cone L^sing_p and the glued skeleton, with
// integral homology by Smith normal form.
namespace syzkit::skeleton {

/// Dense integer matrix, row-major.
struct IntMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::int64_t> data;

  IntMatrix() = default;
  IntMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0) {}

  std::int64_t& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  std::int64_t operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
  bool is_zero() const;
  bool operator==(const IntMatrix&) const = default;
};

IntMatrix operator*(const IntMatrix& a, const IntMatrix& b);

/// Free Z-complex concentrated in degrees 0..top. boundary[k] maps degree k to
/// degree k-1 (boundary[0] has zero rows).
struct ChainComplex {
  std::vector<std::vector<std::string>> generators;
  std::vector<IntMatrix> boundary;

  int top_degree() const { return static_cast<int>(generators.size()) - 1; }
  std::size_t rank(int k) const;
  std::size_t size() const;
  /// Throws std::logic_error on inconsistent dimensions.
  void check_shapes() const;
  bool is_complex() const;  // d o d == 0
};

/// Degree-0 chain map; matrices[k] maps source degree k to target degree k.
struct ChainMap {
  std::vector<IntMatrix> matrices;

  /// f d == d f in every degree.
  bool commutes(const ChainComplex& source, const ChainComplex& target) const;
};

struct HomologyGroup {
  std::size_t free_rank = 0;
  std::vector<mpz_class> torsion;  // invariant factors > 1, each dividing the next

  bool operator==(const HomologyGroup&) const = default;
};

using HomologyTable = std::vector<HomologyGroup>;

struct SkeletonSpec {
  int p = 1;
  int q = 1;
  bool half_shift = true;    // (Z + 1/2) basepoint convention; no effect on homology
  std::vector<int> u_order;  // orientation order of the u-directions; empty = 1..q

  void validate() const;
};

ChainComplex point_chain(const std::string& label = "pt");

/// Minimal product cell structure on T^k: one generator per subset of
/// {1..k}, labelled prefix{...}, zero differential.
ChainComplex torus_chain(int k, const std::string& prefix = "t");

/// Koszul tensor product: d(a x b) = da x b + (-1)^{|a|} a x db.
ChainComplex tensor(const ChainComplex& a, const ChainComplex& b);
/// f x g on generators; every matrices[k] must be present for k up to the
/// larger top degree of source and target (empty blocks allowed).
ChainMap tensor(const ChainMap& f, const ChainMap& g);

ChainMap identity_map(const ChainComplex& c);

/// Support-stratification cells (tau, e) of the boundary at infinity of
/// L_{C^q}: tau a nonempty subset of [q] (the simplex at infinity of the cone
/// sigma = tau), e a cell of the subtorus tau^perp. Degree |e| + |tau| - 1,
/// d(tau, e) = (-1)^{|e|} sum_t (-1)^{pos(t)} (tau \ t, e) over t with
/// |tau \ t| >= 1. pos is the position of t in tau sorted by `order`.
ChainComplex fltz_boundary_chain(int q, const std::vector<int>& order = {});

struct FltzModel {
  ChainComplex L;         // L_{C^q} x T^p retracted onto T^q x T^p
  ChainComplex boundary;  // boundary chain (q) x T^p
  ChainMap inclusion;     // boundary -> L
};

/// (tau, e) x t maps to e x t when |tau| = 1 and to 0 otherwise.
FltzModel fltz_chain(const SkeletonSpec& spec);

struct LsingModel {
  ChainComplex cone;  // contractible: a single vertex
  ChainComplex link;  // T^p
  ChainMap augmentation;
};

LsingModel lsing_chain(int p);

struct GluedSkeleton {
  ChainComplex L1;         // L_{C^q} x T^p
  ChainComplex L2;         // boundary chain x cone(T^p)
  ChainComplex L12;        // boundary chain x T^p (the R factor collapsed)
  ChainMap f;              // L12 -> L1
  ChainMap g;              // L12 -> L2
  ChainComplex glued;      // mapping cone of (f, -g)
};

/// Homotopy pushout L1 <- L12 -> L2 as the mapping cone of (f, -g):
/// Cone_n = L1_n + L2_n + L12_{n-1}, d(a, b, c) = (da + f c, db - g c, -dc).
GluedSkeleton glued_skeleton(const SkeletonSpec& spec);

/// Smith normal form invariant factors (nonzero diagonal, each dividing the
/// next), in exact arithmetic.
std::vector<mpz_class> smith_invariants(const IntMatrix& m);

/// Throws std::invalid_argument unless d o d == 0.
HomologyTable homology(const ChainComplex& cc);

long euler_characteristic(const ChainComplex& cc);
long euler_characteristic(const HomologyTable& h);

/// Rank over Q.
std::size_t rational_rank(const IntMatrix& m);

struct MayerVietorisReport {
  bool exact = true;
  std::vector<std::string> failures;  // slot descriptions where exactness fails
  std::size_t slots_checked = 0;
};

/// Exactness over Q of
///   ... -> H_n(L12) -(f,-g)-> H_n(L1) + H_n(L2) -> H_n(glued) -> H_{n-1}(L12) -> ...
/// assembled from homology bases and induced maps.
MayerVietorisReport mayer_vietoris(const GluedSkeleton& gs);

std::string format_homology(const HomologyTable& h);

}  // namespace syzkit::skeleton
