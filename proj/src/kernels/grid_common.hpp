#pragma once

#include <cstddef>
#include <span>

#include "syzkit/kernels.hpp"

namespace syzkit::kernels::detail {

// Partial sum a_0 + sum_{k=1}^{q-1} a_k e^{i theta_k} for the outer digits of
// `outer`. Shared by every variant so the inner loops see identical inputs.
struct PartialSum {
  double re;
  double im;
};

inline PartialSum outer_partial_sum(std::span<const double> moduli, const AngleTable& table,
                                    std::size_t outer) {
  const std::size_t q = moduli.size() - 1;
  const std::size_t n = table.size();
  // digits of `outer`, theta_1 most significant
  std::size_t digits[64];
  for (std::size_t k = q - 1; k >= 1; --k) {
    digits[k] = outer % n;
    outer /= n;
  }
  double re = moduli[0];
  double im = 0.0;
  for (std::size_t k = 1; k < q; ++k) {
    re = re + moduli[k] * table.cos[digits[k]];
    im = im + moduli[k] * table.sin[digits[k]];
  }
  return {re, im};
}

inline std::size_t outer_count(std::size_t q, std::size_t n) {
  std::size_t count = 1;
  for (std::size_t k = 1; k < q; ++k) count *= n;
  return count;
}

}  // namespace syzkit::kernels::detail
