#pragma once

// Data-parallel inner loops of the inverse-square point-source model
//
//   model_m = sum_r alpha_r / ((x_m - x_r)^2 + (y_m - y_r)^2 + h_m^2)
//
// shared by the field simulator and the Gauss-Newton refinement. Every
// kernel has a scalar reference implementation and, on x86-64, an AVX2/FMA
// variant. The variant is chosen once at runtime from CPUID; setting the
// environment variable RADSURVEY_ISA=scalar forces the reference path.

#include <span>
#include <string_view>
#include <vector>

namespace radsurvey::kernels {

struct SourceTerm {
  double alpha = 0.0;
  double x = 0.0;
  double y = 0.0;
};

/// Structure-of-arrays view over M measurement positions.
struct SampleView {
  std::span<const double> x;
  std::span<const double> y;
  std::span<const double> h2;  // squared detector height per sample
};

/// Accumulated Gauss-Newton normal equations for residual r = c - model.
/// jtj is the full symmetric 3R x 3R matrix, row-major; parameters are
/// ordered (alpha_0, x_0, y_0, alpha_1, ...).
struct NormalEquations {
  std::vector<double> jtj;
  std::vector<double> jtr;
  double sse = 0.0;
};

enum class Isa { Scalar, Avx2 };

std::string_view to_string(Isa isa) noexcept;
bool avx2_supported() noexcept;
Isa active_isa() noexcept;
/// Test hook; requesting Avx2 on a machine without it falls back to Scalar.
void set_isa(Isa isa) noexcept;

/// out[m] = model_m.
void inverse_square_sum(const SampleView& samples, std::span<const SourceTerm> sources, std::span<double> out);

NormalEquations normal_equations(const SampleView& samples, std::span<const double> counts,
                                 std::span<const SourceTerm> sources);

namespace scalar {
void inverse_square_sum(const SampleView& samples, std::span<const SourceTerm> sources, std::span<double> out);
NormalEquations normal_equations(const SampleView& samples, std::span<const double> counts,
                                 std::span<const SourceTerm> sources);
}  // namespace scalar

namespace avx2 {
void inverse_square_sum(const SampleView& samples, std::span<const SourceTerm> sources, std::span<double> out);
NormalEquations normal_equations(const SampleView& samples, std::span<const double> counts,
                                 std::span<const SourceTerm> sources);
}  // namespace avx2

}  // namespace radsurvey::kernels
