#include "grid_common.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#include <immintrin.h>
#define SYZKIT_HAVE_AVX2_KERNEL 1
#endif

#include <stdexcept>

namespace syzkit::kernels::detail {

#ifdef SYZKIT_HAVE_AVX2_KERNEL

// No "fma" in the target list: the products and sums must round exactly like
// the scalar reference.
__attribute__((target("avx2"))) GridMin grid_min_avx2(std::span<const double> moduli,
                                                      const AngleTable& table) {
  const std::size_t q = moduli.size() - 1;
  const std::size_t n = table.size();
  const double* c = table.cos.data();
  const double* s = table.sin.data();
  const __m256d aq = _mm256_set1_pd(moduli[q]);
  const std::size_t body = n - n % 4;

  __m256d best_v = _mm256_set1_pd(__builtin_inf());
  __m256d best_i = _mm256_set1_pd(-1.0);
  const __m256d lane = _mm256_set_pd(3.0, 2.0, 1.0, 0.0);

  double tail_v = __builtin_inf();
  std::size_t tail_i = 0;
  bool tail_have = false;

  const std::size_t outer_total = outer_count(q, n);
  for (std::size_t outer = 0; outer < outer_total; ++outer) {
    const PartialSum ps = outer_partial_sum(moduli, table, outer);
    const __m256d pre = _mm256_set1_pd(ps.re);
    const __m256d pim = _mm256_set1_pd(ps.im);
    const double base = static_cast<double>(outer * n);
    for (std::size_t j = 0; j < body; j += 4) {
      const __m256d re = _mm256_add_pd(pre, _mm256_mul_pd(aq, _mm256_loadu_pd(c + j)));
      const __m256d im = _mm256_add_pd(pim, _mm256_mul_pd(aq, _mm256_loadu_pd(s + j)));
      const __m256d v = _mm256_add_pd(_mm256_mul_pd(re, re), _mm256_mul_pd(im, im));
      const __m256d better = _mm256_cmp_pd(v, best_v, _CMP_LT_OQ);
      const __m256d idx = _mm256_add_pd(_mm256_set1_pd(base + static_cast<double>(j)), lane);
      best_v = _mm256_blendv_pd(best_v, v, better);
      best_i = _mm256_blendv_pd(best_i, idx, better);
    }
    for (std::size_t j = body; j < n; ++j) {
      const double re = ps.re + moduli[q] * c[j];
      const double im = ps.im + moduli[q] * s[j];
      const double v = re * re + im * im;
      if (!tail_have || v < tail_v) {
        tail_v = v;
        tail_i = outer * n + j;
        tail_have = true;
      }
    }
  }

  alignas(32) double lv[4];
  alignas(32) double li[4];
  _mm256_store_pd(lv, best_v);
  _mm256_store_pd(li, best_i);
  GridMin best{tail_v, tail_i};
  bool have = tail_have;
  for (int k = 0; k < 4; ++k) {
    if (li[k] < 0.0) continue;
    const auto idx = static_cast<std::size_t>(li[k]);
    if (!have || lv[k] < best.value || (lv[k] == best.value && idx < best.index)) {
      best = {lv[k], idx};
      have = true;
    }
  }
  return best;
}

#else

GridMin grid_min_avx2(std::span<const double>, const AngleTable&) {
  throw std::logic_error("AVX2 kernel not compiled for this target");
}

#endif

}  // namespace syzkit::kernels::detail
