#include "ergoplan/smooth.hpp"

#include "ergoplan/error.hpp"
#include "signal_graph.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace ergoplan::smooth {

namespace {

void require_nonempty(std::span<const double> values) {
  if (values.empty()) { throw Error(ErrorCode::InvalidArgument, "smooth reduction over an empty list"); }
}

// AGM conjunction. The product branch is used only when every input clears
// epsilon; otherwise the violation branch, whose derivative at r_i = 0 is 0.
auto agm_min(std::span<const double> r, double epsilon, std::span<double> w) -> double {
  const auto m   = static_cast<double>(r.size());
  const bool all = std::all_of(r.begin(), r.end(), [&](double x) { return x > epsilon; });
  if (all) {
    double log_sum = 0.0;
    for (double x : r) { log_sum += std::log1p(x); }
    const double gm = std::exp(log_sum / m);
    if (!w.empty()) {
      for (std::size_t i = 0; i < r.size(); ++i) { w[i] = gm / (m * (1.0 + r[i])); }
    }
    return gm - 1.0;
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const bool neg = r[i] < 0.0;
    sum += neg ? r[i] : 0.0;
    if (!w.empty()) { w[i] = neg ? 1.0 / m : 0.0; }
  }
  return sum / m;
}

// Max-shifted log-sum-exp soft minimum.
auto lse_min(std::span<const double> r, double beta, std::span<double> w) -> double {
  const double lo = *std::min_element(r.begin(), r.end());
  double total    = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double e = std::exp(-beta * (r[i] - lo));
    total += e;
    if (!w.empty()) { w[i] = e; }
  }
  if (!w.empty()) {
    for (auto& x : w) { x /= total; }
  }
  return lo - std::log(total) / beta;
}

auto dispatch_min(std::span<const double> r, const SmoothConfig& cfg, std::span<double> w) -> double {
  require_nonempty(r);
  return cfg.mode == Mode::AGM ? agm_min(r, cfg.epsilon, w) : lse_min(r, cfg.beta, w);
}

} // namespace

void SmoothConfig::validate() const {
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw Error(ErrorCode::InvalidArgument, "smooth beta must be positive");
  }
  if (!(epsilon > 0.0) || epsilon > 1e-6) {
    throw Error(ErrorCode::InvalidArgument, "smooth epsilon must lie in (0, 1e-6]");
  }
}

auto smooth_min(std::span<const double> values, const SmoothConfig& cfg) -> double {
  return dispatch_min(values, cfg, {});
}

auto smooth_max(std::span<const double> values, const SmoothConfig& cfg) -> double {
  require_nonempty(values);
  std::vector<double> neg(values.size());
  std::transform(values.begin(), values.end(), neg.begin(), [](double x) { return -x; });
  return -dispatch_min(neg, cfg, {});
}

auto smooth_min_grad(std::span<const double> values, const SmoothConfig& cfg, std::span<double> weights)
    -> double {
  if (weights.size() != values.size()) { throw Error(ErrorCode::InvalidArgument, "weights size mismatch"); }
  return dispatch_min(values, cfg, weights);
}

auto smooth_max_grad(std::span<const double> values, const SmoothConfig& cfg, std::span<double> weights)
    -> double {
  if (weights.size() != values.size()) { throw Error(ErrorCode::InvalidArgument, "weights size mismatch"); }
  require_nonempty(values);
  std::vector<double> neg(values.size());
  std::transform(values.begin(), values.end(), neg.begin(), [](double x) { return -x; });
  // d/dr_i [-smin(-r)] = smin'_i(-r)
  return -dispatch_min(neg, cfg, weights);
}

auto eval_smooth(const stl::Formula& f, const stl::TimedTrace& trace, std::size_t t_index,
                 const SmoothConfig& cfg) -> double {
  cfg.validate();
  return detail::SignalGraph(f, trace, t_index, detail::Reduce{.exact = false, .cfg = cfg}).value();
}

auto eval_smooth_grad(const stl::Formula& f, const stl::TimedTrace& trace, std::size_t t_index,
                      const SmoothConfig& cfg) -> SmoothValueGrad {
  cfg.validate();
  const detail::SignalGraph graph(f, trace, t_index, detail::Reduce{.exact = false, .cfg = cfg});
  SmoothValueGrad out;
  out.value = graph.value();
  out.grad.assign(trace.size() * stl::kStateDim, 0.0);
  graph.backprop(out.grad);
  return out;
}

} // namespace ergoplan::smooth
