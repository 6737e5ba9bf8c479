#include <cmath>
#include <cstdlib>
#include <numbers>
#include <stdexcept>
#include <string>

#include "syzkit/kernels.hpp"

namespace syzkit::kernels {

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return "scalar";
    case Isa::kAvx2:
      return "avx2";
  }
  return "unknown";
}

Isa detected_isa() {
#if defined(__x86_64__) || defined(_M_X64)
  if (__builtin_cpu_supports("avx2")) return Isa::kAvx2;
#endif
  return Isa::kScalar;
}

bool isa_supported(Isa isa) {
  return isa == Isa::kScalar || detected_isa() == Isa::kAvx2;
}

Isa active_isa() {
  static const Isa isa = [] {
    if (const char* env = std::getenv("SYZ_KERNEL_ISA")) {
      const std::string want(env);
      if (want == "scalar") return Isa::kScalar;
      if (want == "avx2" && isa_supported(Isa::kAvx2)) return Isa::kAvx2;
    }
    return detected_isa();
  }();
  return isa;
}

AngleTable::AngleTable(std::size_t n) : cos(n), sin(n) {
  if (n == 0) throw std::invalid_argument("AngleTable: need at least one angle");
  for (std::size_t k = 0; k < n; ++k) {
    const double a = angle(k);
    cos[k] = std::cos(a);
    sin[k] = std::sin(a);
  }
}

double AngleTable::angle(std::size_t k) const {
  return 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(cos.size());
}

GridMin grid_min_modulus_sq(std::span<const double> moduli, const AngleTable& table, Isa isa) {
  if (moduli.size() < 2) throw std::invalid_argument("grid_min_modulus_sq: need q >= 1 terms");
  if (moduli.size() > 64) throw std::invalid_argument("grid_min_modulus_sq: q too large");
  switch (isa) {
    case Isa::kAvx2:
      if (!isa_supported(Isa::kAvx2)) throw std::runtime_error("AVX2 not supported on this CPU");
      return detail::grid_min_avx2(moduli, table);
    case Isa::kScalar:
      break;
  }
  return detail::grid_min_scalar(moduli, table);
}

GridMin grid_min_modulus_sq(std::span<const double> moduli, const AngleTable& table) {
  return grid_min_modulus_sq(moduli, table, active_isa());
}

std::vector<std::size_t> decode_grid_index(std::size_t index, std::size_t q, std::size_t n) {
  std::vector<std::size_t> digits(q);
  for (std::size_t k = q; k-- > 0;) {
    digits[k] = index % n;
    index /= n;
  }
  return digits;
}

}  // namespace syzkit::kernels
