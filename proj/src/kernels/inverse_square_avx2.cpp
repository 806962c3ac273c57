#include "radsurvey/kernels/inverse_square.hpp"

#if defined(__AVX2__) && defined(__FMA__)

#include <immintrin.h>

namespace radsurvey::kernels::avx2 {

namespace {
inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}
}  // namespace

void inverse_square_sum(const SampleView& samples, std::span<const SourceTerm> sources, std::span<double> out) {
  const std::size_t m_count = samples.x.size();
  const std::size_t vec_end = m_count & ~std::size_t{3};
  std::size_t m = 0;
  for (; m < vec_end; m += 4) {
    const __m256d px = _mm256_loadu_pd(samples.x.data() + m);
    const __m256d py = _mm256_loadu_pd(samples.y.data() + m);
    const __m256d h2 = _mm256_loadu_pd(samples.h2.data() + m);
    __m256d sum = _mm256_setzero_pd();
    for (const auto& s : sources) {
      const __m256d dx = _mm256_sub_pd(px, _mm256_set1_pd(s.x));
      const __m256d dy = _mm256_sub_pd(py, _mm256_set1_pd(s.y));
      const __m256d d2 = _mm256_fmadd_pd(dx, dx, _mm256_fmadd_pd(dy, dy, h2));
      sum = _mm256_add_pd(sum, _mm256_div_pd(_mm256_set1_pd(s.alpha), d2));
    }
    _mm256_storeu_pd(out.data() + m, sum);
  }
  if (m < m_count) {
    SampleView tail{samples.x.subspan(m), samples.y.subspan(m), samples.h2.subspan(m)};
    scalar::inverse_square_sum(tail, sources, out.subspan(m));
  }
}

// Vector element wrapper: std::vector<__m256d> would drop the alignment attribute.
struct Lane {
  __m256d v;
};

NormalEquations normal_equations(const SampleView& samples, std::span<const double> counts,
                                 std::span<const SourceTerm> sources) {
  const std::size_t p = 3 * sources.size();
  const std::size_t m_count = samples.x.size();
  const std::size_t vec_end = m_count & ~std::size_t{3};

  std::vector<Lane> j(p);
  std::vector<Lane> acc_jtj(p * (p + 1) / 2, Lane{_mm256_setzero_pd()});
  std::vector<Lane> acc_jtr(p, Lane{_mm256_setzero_pd()});
  __m256d acc_sse = _mm256_setzero_pd();
  const __m256d two = _mm256_set1_pd(2.0);
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d neg_zero = _mm256_set1_pd(-0.0);

  for (std::size_t m = 0; m < vec_end; m += 4) {
    const __m256d px = _mm256_loadu_pd(samples.x.data() + m);
    const __m256d py = _mm256_loadu_pd(samples.y.data() + m);
    const __m256d h2 = _mm256_loadu_pd(samples.h2.data() + m);
    __m256d model = _mm256_setzero_pd();
    for (std::size_t r = 0; r < sources.size(); ++r) {
      const auto& s = sources[r];
      const __m256d alpha = _mm256_set1_pd(s.alpha);
      const __m256d dx = _mm256_sub_pd(px, _mm256_set1_pd(s.x));
      const __m256d dy = _mm256_sub_pd(py, _mm256_set1_pd(s.y));
      const __m256d d2 = _mm256_fmadd_pd(dx, dx, _mm256_fmadd_pd(dy, dy, h2));
      const __m256d inv = _mm256_div_pd(one, d2);
      model = _mm256_fmadd_pd(alpha, inv, model);
      const __m256d k = _mm256_mul_pd(_mm256_mul_pd(two, alpha), _mm256_mul_pd(inv, inv));
      j[3 * r + 0].v = _mm256_xor_pd(inv, neg_zero);
      j[3 * r + 1].v = _mm256_xor_pd(_mm256_mul_pd(k, dx), neg_zero);
      j[3 * r + 2].v = _mm256_xor_pd(_mm256_mul_pd(k, dy), neg_zero);
    }
    const __m256d res = _mm256_sub_pd(_mm256_loadu_pd(counts.data() + m), model);
    acc_sse = _mm256_fmadd_pd(res, res, acc_sse);
    std::size_t t = 0;
    for (std::size_t a = 0; a < p; ++a) {
      acc_jtr[a].v = _mm256_fmadd_pd(j[a].v, res, acc_jtr[a].v);
      for (std::size_t b = a; b < p; ++b, ++t) acc_jtj[t].v = _mm256_fmadd_pd(j[a].v, j[b].v, acc_jtj[t].v);
    }
  }

  NormalEquations ne;
  if (vec_end < m_count) {
    SampleView tail{samples.x.subspan(vec_end), samples.y.subspan(vec_end), samples.h2.subspan(vec_end)};
    ne = scalar::normal_equations(tail, counts.subspan(vec_end), sources);
  } else {
    ne.jtj.assign(p * p, 0.0);
    ne.jtr.assign(p, 0.0);
  }
  ne.sse += hsum(acc_sse);
  std::size_t t = 0;
  for (std::size_t a = 0; a < p; ++a) {
    ne.jtr[a] += hsum(acc_jtr[a].v);
    for (std::size_t b = a; b < p; ++b, ++t) {
      const double v = hsum(acc_jtj[t].v);
      ne.jtj[a * p + b] += v;
      if (b != a) ne.jtj[b * p + a] += v;
    }
  }
  return ne;
}

}  // namespace radsurvey::kernels::avx2

#else

// Non-x86 builds: the AVX2 entry points alias the reference kernels so the
// dispatcher and the equivalence tests stay uniform.
namespace radsurvey::kernels::avx2 {

void inverse_square_sum(const SampleView& samples, std::span<const SourceTerm> sources, std::span<double> out) {
  scalar::inverse_square_sum(samples, sources, out);
}

NormalEquations normal_equations(const SampleView& samples, std::span<const double> counts,
                                 std::span<const SourceTerm> sources) {
  return scalar::normal_equations(samples, counts, sources);
}

}  // namespace radsurvey::kernels::avx2

#endif
