#pragma once

#include "ergoplan/stl.hpp"

#include <span>
#include <vector>

namespace ergoplan::smooth {

enum class Mode { AGM, LSE };

struct SmoothConfig {
  Mode mode      = Mode::AGM;
  double beta    = 10.0; ///< LSE sharpness
  double epsilon = 1e-9; ///< AGM branch guard

  /// Throws InvalidArgument unless beta > 0 and 0 < epsilon <= 1e-6.
  void validate() const;
};

struct SmoothValueGrad {
  double value = 0.0;
  /// d value / d trace entry, laid out sample-major: grad[k * 6 + i].
  std::vector<double> grad;
};

/// Smooth minimum. AGM: geometric mean of (1 + r_i) minus one when every r_i
/// exceeds epsilon, otherwise the mean of the violations min(r_i, 0).
/// LSE: -(1/beta) log sum exp(-beta r_i).
[[nodiscard]] auto smooth_min(std::span<const double> values, const SmoothConfig& cfg) -> double;
/// Dual of smooth_min: -smooth_min(-r).
[[nodiscard]] auto smooth_max(std::span<const double> values, const SmoothConfig& cfg) -> double;

/// smooth_min with partial derivatives written to `weights` (same length as values).
auto smooth_min_grad(std::span<const double> values, const SmoothConfig& cfg, std::span<double> weights)
    -> double;
auto smooth_max_grad(std::span<const double> values, const SmoothConfig& cfg, std::span<double> weights)
    -> double;

/// Robustness recursion with every min/max replaced by its smooth counterpart.
[[nodiscard]] auto eval_smooth(const stl::Formula& f, const stl::TimedTrace& trace, std::size_t t_index,
                               const SmoothConfig& cfg) -> double;

/// eval_smooth plus its gradient with respect to every trace entry, by
/// reverse accumulation through the evaluation graph.
[[nodiscard]] auto eval_smooth_grad(const stl::Formula& f, const stl::TimedTrace& trace,
                                    std::size_t t_index, const SmoothConfig& cfg) -> SmoothValueGrad;

} // namespace ergoplan::smooth
