#include "grid_common.hpp"

namespace syzkit::kernels::detail {

GridMin grid_min_scalar(std::span<const double> moduli, const AngleTable& table) {
  const std::size_t q = moduli.size() - 1;
  const std::size_t n = table.size();
  const double aq = moduli[q];
  const double* c = table.cos.data();
  const double* s = table.sin.data();

  GridMin best{0.0, 0};
  bool have = false;
  const std::size_t outer_total = outer_count(q, n);
  for (std::size_t outer = 0; outer < outer_total; ++outer) {
    const PartialSum ps = outer_partial_sum(moduli, table, outer);
    for (std::size_t j = 0; j < n; ++j) {
      const double re = ps.re + aq * c[j];
      const double im = ps.im + aq * s[j];
      const double v = re * re + im * im;
      if (!have || v < best.value) {
        best = {v, outer * n + j};
        have = true;
      }
    }
  }
  return best;
}

}  // namespace syzkit::kernels::detail
