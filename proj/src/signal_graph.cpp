#include "signal_graph.hpp"

#include "ergoplan/error.hpp"

#include <algorithm>
#include <string>

namespace ergoplan::detail {

auto Reduce::min(std::span<const double> r) const -> double {
  if (exact) { return *std::min_element(r.begin(), r.end()); }
  return smooth::smooth_min(r, cfg);
}

auto Reduce::max(std::span<const double> r) const -> double {
  if (exact) { return *std::max_element(r.begin(), r.end()); }
  return smooth::smooth_max(r, cfg);
}

auto Reduce::min_grad(std::span<const double> r, std::span<double> w) const -> double {
  if (exact) {
    // Subgradient: all weight on the first minimizer.
    const auto it = std::min_element(r.begin(), r.end());
    std::fill(w.begin(), w.end(), 0.0);
    w[static_cast<std::size_t>(it - r.begin())] = 1.0;
    return *it;
  }
  return smooth::smooth_min_grad(r, cfg, w);
}

auto Reduce::max_grad(std::span<const double> r, std::span<double> w) const -> double {
  if (exact) {
    const auto it = std::max_element(r.begin(), r.end());
    std::fill(w.begin(), w.end(), 0.0);
    w[static_cast<std::size_t>(it - r.begin())] = 1.0;
    return *it;
  }
  return smooth::smooth_max_grad(r, cfg, w);
}

SignalGraph::SignalGraph(const stl::Formula& root, const stl::TimedTrace& trace, std::size_t t_index,
                         Reduce reduce)
    : trace_{trace}, reduce_{reduce} {
  if (!root) { throw Error(ErrorCode::InvalidArgument, "null formula"); }
  if (t_index > trace.last_index()) {
    throw Error(ErrorCode::InvalidArgument,
                "t_index " + std::to_string(t_index) + " outside trace of " +
                    std::to_string(trace.size()) + " samples");
  }
  instantiate(root, t_index, t_index);
  // Pre-order layout: children always follow their parent.
  for (std::size_t i = insts_.size(); i-- > 0;) { compute(insts_[i]); }
}

auto SignalGraph::instantiate(const stl::Formula& f, std::size_t first, std::size_t last) -> std::size_t {
  const std::size_t id = insts_.size();
  insts_.push_back(Inst{.node = f.get(), .first = first, .last = last});
  const std::size_t n_last = trace_.last_index();

  std::vector<std::size_t> kids;
  switch (f->op) {
    case stl::Op::Pred: break;
    case stl::Op::Not:
    case stl::Op::And:
    case stl::Op::Or:
      for (const auto& c : f->children) { kids.push_back(instantiate(c, first, last)); }
      break;
    case stl::Op::Always:
    case stl::Op::Eventually:
    case stl::Op::Until: {
      const auto off = stl::window_offsets(trace_.dt(), f->interval);
      if (last + off.lo > n_last) {
        throw Error(ErrorCode::EmptyWindow, "window starting at sample " + std::to_string(last + off.lo) +
                                                " lies past the last sample " + std::to_string(n_last));
      }
      insts_[id].win   = off;
      const auto w_end = std::min(last + off.hi, n_last);
      if (f->op == stl::Op::Until) {
        kids.push_back(instantiate(f->children[0], first, w_end));
        kids.push_back(instantiate(f->children[1], first + off.lo, w_end));
      } else {
        kids.push_back(instantiate(f->children[0], first + off.lo, w_end));
      }
      break;
    }
  }
  insts_[id].kids = std::move(kids);
  return id;
}

auto SignalGraph::window(const Inst& inst, std::size_t t) const -> stl::IndexRange {
  return {t + inst.win.lo, std::min(t + inst.win.hi, trace_.last_index())};
}

void SignalGraph::compute(Inst& inst) {
  const stl::Node& node = *inst.node;
  inst.val.assign(inst.last - inst.first + 1, 0.0);
  std::vector<double> buf;

  for (std::size_t t = inst.first; t <= inst.last; ++t) {
    double v = 0.0;
    switch (node.op) {
      case stl::Op::Pred: v = node.pred.eval(trace_[t]); break;
      case stl::Op::Not: v = -insts_[inst.kids[0]].at(t); break;
      case stl::Op::And:
      case stl::Op::Or:
        buf.clear();
        for (auto k : inst.kids) { buf.push_back(insts_[k].at(t)); }
        v = node.op == stl::Op::And ? reduce_.min(buf) : reduce_.max(buf);
        break;
      case stl::Op::Always:
      case stl::Op::Eventually: {
        const auto& child = insts_[inst.kids[0]];
        const auto w      = window(inst, t);
        std::span<const double> vals{child.val.data() + (w.first - child.first), w.size()};
        v = node.op == stl::Op::Always ? reduce_.min(vals) : reduce_.max(vals);
        break;
      }
      case stl::Op::Until: {
        const auto& lhs = insts_[inst.kids[0]];
        const auto& rhs = insts_[inst.kids[1]];
        const auto w    = window(inst, t);
        std::vector<double> outer;
        outer.reserve(w.size());
        for (std::size_t tp = w.first; tp <= w.last; ++tp) {
          std::span<const double> held{lhs.val.data() + (t - lhs.first), tp - t + 1};
          const std::array<double, 2> pair{rhs.at(tp), reduce_.min(held)};
          outer.push_back(reduce_.min(pair));
        }
        v = reduce_.max(outer);
        break;
      }
    }
    inst.val[t - inst.first] = v;
  }
}

void SignalGraph::backprop(std::span<double> grad) const {
  std::vector<std::vector<double>> adj(insts_.size());
  for (std::size_t i = 0; i < insts_.size(); ++i) { adj[i].assign(insts_[i].val.size(), 0.0); }
  adj[0][0] = 1.0;

  std::vector<double> buf;
  std::vector<double> w;
  for (std::size_t i = 0; i < insts_.size(); ++i) {
    const Inst& inst      = insts_[i];
    const stl::Node& node = *inst.node;
    for (std::size_t t = inst.first; t <= inst.last; ++t) {
      const double a = adj[i][t - inst.first];
      if (a == 0.0) { continue; }
      switch (node.op) {
        case stl::Op::Pred:
          for (std::size_t d = 0; d < stl::kStateDim; ++d) {
            grad[t * stl::kStateDim + d] += a * node.pred.coeffs[d];
          }
          break;
        case stl::Op::Not: {
          const auto k = inst.kids[0];
          adj[k][t - insts_[k].first] -= a;
          break;
        }
        case stl::Op::And:
        case stl::Op::Or: {
          buf.clear();
          for (auto k : inst.kids) { buf.push_back(insts_[k].at(t)); }
          w.assign(buf.size(), 0.0);
          if (node.op == stl::Op::And) {
            reduce_.min_grad(buf, w);
          } else {
            reduce_.max_grad(buf, w);
          }
          for (std::size_t c = 0; c < inst.kids.size(); ++c) {
            const auto k = inst.kids[c];
            adj[k][t - insts_[k].first] += a * w[c];
          }
          break;
        }
        case stl::Op::Always:
        case stl::Op::Eventually: {
          const auto k      = inst.kids[0];
          const auto& child = insts_[k];
          const auto win    = window(inst, t);
          std::span<const double> vals{child.val.data() + (win.first - child.first), win.size()};
          w.assign(vals.size(), 0.0);
          if (node.op == stl::Op::Always) {
            reduce_.min_grad(vals, w);
          } else {
            reduce_.max_grad(vals, w);
          }
          for (std::size_t j = 0; j < vals.size(); ++j) { adj[k][win.first - child.first + j] += a * w[j]; }
          break;
        }
        case stl::Op::Until: {
          const auto kl    = inst.kids[0];
          const auto kr    = inst.kids[1];
          const auto& lhs  = insts_[kl];
          const auto& rhs  = insts_[kr];
          const auto win   = window(inst, t);
          const auto width = win.size();
          std::vector<double> inner(width);
          std::vector<std::array<double, 2>> pair_w(width);
          for (std::size_t j = 0; j < width; ++j) {
            const std::size_t tp = win.first + j;
            std::span<const double> held{lhs.val.data() + (t - lhs.first), tp - t + 1};
            const std::array<double, 2> pair{rhs.at(tp), reduce_.min(held)};
            inner[j] = reduce_.min_grad(pair, pair_w[j]);
          }
          std::vector<double> outer_w(width);
          reduce_.max_grad(inner, outer_w);
          std::vector<double> held_w;
          for (std::size_t j = 0; j < width; ++j) {
            const double d = a * outer_w[j];
            if (d == 0.0) { continue; }
            const std::size_t tp = win.first + j;
            adj[kr][tp - rhs.first] += d * pair_w[j][0];
            if (pair_w[j][1] == 0.0) { continue; }
            std::span<const double> held{lhs.val.data() + (t - lhs.first), tp - t + 1};
            held_w.assign(held.size(), 0.0);
            reduce_.min_grad(held, held_w);
            for (std::size_t q = 0; q < held.size(); ++q) {
              adj[kl][t - lhs.first + q] += d * pair_w[j][1] * held_w[q];
            }
          }
          break;
        }
      }
    }
  }
}

} // namespace ergoplan::detail
