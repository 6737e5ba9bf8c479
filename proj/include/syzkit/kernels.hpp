#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

// Data-parallel inner loops. Every kernel has a scalar reference and, where the
// target supports it, a SIMD variant. The SIMD variants perform the same
// floating-point operations in the same order as the reference, so results are
// bit-identical and the equivalence tests compare with ==.
namespace syzkit::kernels {

enum class Isa { kScalar, kAvx2 };

std::string_view isa_name(Isa isa);

/// Best instruction set available on the running CPU.
Isa detected_isa();

/// Instruction set used by the dispatching entry points. Honors the
/// SYZ_KERNEL_ISA environment variable ("scalar" or "avx2") when set.
Isa active_isa();

bool isa_supported(Isa isa);

/// Cosine/sine tables of the angles 2*pi*k/n, k = 0..n-1.
struct AngleTable {
  std::vector<double> cos;
  std::vector<double> sin;

  explicit AngleTable(std::size_t n);
  std::size_t size() const { return cos.size(); }
  double angle(std::size_t k) const;
};

struct GridMin {
  double value;       // minimal |a_0 + sum_k a_k e^{i theta_k}|^2 over the grid
  std::size_t index;  // linear grid index, theta_1 most significant digit
};

/// Exhaustive minimum of |a_0 + sum_{k=1}^{q} a_k e^{i theta_k}|^2 with every
/// theta_k ranging over the angle table (the phase of a_0 is fixed at zero).
/// moduli = (a_0, a_1, ..., a_q), q >= 1. Ties resolve to the smallest index.
GridMin grid_min_modulus_sq(std::span<const double> moduli, const AngleTable& table);
GridMin grid_min_modulus_sq(std::span<const double> moduli, const AngleTable& table, Isa isa);

/// Decodes a linear grid index into per-coordinate angle indices.
std::vector<std::size_t> decode_grid_index(std::size_t index, std::size_t q, std::size_t n);

namespace detail {
GridMin grid_min_scalar(std::span<const double> moduli, const AngleTable& table);
GridMin grid_min_avx2(std::span<const double> moduli, const AngleTable& table);
}  // namespace detail

}  // namespace syzkit::kernels
