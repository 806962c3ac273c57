#include "radsurvey/kernels/inverse_square.hpp"

namespace radsurvey::kernels::scalar {

void inverse_square_sum(const SampleView& samples, std::span<const SourceTerm> sources, std::span<double> out) {
  const std::size_t m_count = samples.x.size();
  for (std::size_t m = 0; m < m_count; ++m) {
    double sum = 0.0;
    for (const auto& s : sources) {
      const double dx = samples.x[m] - s.x;
      const double dy = samples.y[m] - s.y;
      sum += s.alpha / (dx * dx + dy * dy + samples.h2[m]);
    }
    out[m] = sum;
  }
}

NormalEquations normal_equations(const SampleView& samples, std::span<const double> counts,
                                 std::span<const SourceTerm> sources) {
  const std::size_t p = 3 * sources.size();
  NormalEquations ne;
  ne.jtj.assign(p * p, 0.0);
  ne.jtr.assign(p, 0.0);
  std::vector<double> j(p);

  const std::size_t m_count = samples.x.size();
  for (std::size_t m = 0; m < m_count; ++m) {
    double model = 0.0;
    for (std::size_t r = 0; r < sources.size(); ++r) {
      const auto& s = sources[r];
      const double dx = samples.x[m] - s.x;
      const double dy = samples.y[m] - s.y;
      const double inv = 1.0 / (dx * dx + dy * dy + samples.h2[m]);
      model += s.alpha * inv;
      const double k = 2.0 * s.alpha * inv * inv;
      j[3 * r + 0] = -inv;
      j[3 * r + 1] = -k * dx;
      j[3 * r + 2] = -k * dy;
    }
    const double res = counts[m] - model;
    ne.sse += res * res;
    for (std::size_t a = 0; a < p; ++a) {
      ne.jtr[a] += j[a] * res;
      for (std::size_t b = a; b < p; ++b) ne.jtj[a * p + b] += j[a] * j[b];
    }
  }
  for (std::size_t a = 0; a < p; ++a)
    for (std::size_t b = 0; b < a; ++b) ne.jtj[a * p + b] = ne.jtj[b * p + a];
  return ne;
}

}  // namespace radsurvey::kernels::scalar
