#pragma once

// Shared evaluation engine for exact and smooth robustness.
//
// A formula tree is unrolled into instances, each owning the contiguous range of
// sample indices at which its robustness is needed. Values are filled bottom-up;
// adjoints flow top-down for the smooth gradient.

#include "ergoplan/smooth.hpp"
#include "ergoplan/stl.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace ergoplan::detail {

/// Min/max reduction policy: exact or smooth.
struct Reduce {
  bool exact = true;
  smooth::SmoothConfig cfg{};

  [[nodiscard]] auto min(std::span<const double> r) const -> double;
  [[nodiscard]] auto max(std::span<const double> r) const -> double;
  auto min_grad(std::span<const double> r, std::span<double> w) const -> double;
  auto max_grad(std::span<const double> r, std::span<double> w) const -> double;
};

class SignalGraph {
 public:
  SignalGraph(const stl::Formula& root, const stl::TimedTrace& trace, std::size_t t_index, Reduce reduce);

  [[nodiscard]] auto value() const -> double { return insts_.front().val.front(); }

  /// Accumulates d value / d trace into `grad` (size trace.size() * 6).
  void backprop(std::span<double> grad) const;

 private:
  struct Inst {
    const stl::Node* node = nullptr;
    std::vector<std::size_t> kids;
    std::size_t first = 0;
    std::size_t last  = 0;
    stl::WindowOffsets win{};
    std::vector<double> val;

    [[nodiscard]] auto at(std::size_t t) const -> double { return val[t - first]; }
  };

  auto instantiate(const stl::Formula& f, std::size_t first, std::size_t last) -> std::size_t;
  void compute(Inst& inst);
  [[nodiscard]] auto window(const Inst& inst, std::size_t t) const -> stl::IndexRange;

  const stl::TimedTrace& trace_;
  Reduce reduce_;
  std::vector<Inst> insts_;
};

} // namespace ergoplan::detail
