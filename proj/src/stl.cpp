#include "ergoplan/stl.hpp"

#include "ergoplan/error.hpp"
#include "signal_graph.hpp"

#include <cmath>
#include <sstream>

namespace ergoplan {

auto to_string(ErrorCode code) -> std::string_view {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::EmptyWindow: return "EmptyWindow";
    case ErrorCode::DegenerateRegion: return "DegenerateRegion";
    case ErrorCode::HorizonTooShort: return "HorizonTooShort";
    case ErrorCode::HorizonExceeded: return "HorizonExceeded";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::Disconnected: return "Disconnected";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::MissingField: return "MissingField";
    case ErrorCode::BadBox: return "BadBox";
    case ErrorCode::TimeInconsistent: return "TimeInconsistent";
    case ErrorCode::RegionOutsideWorkspace: return "RegionOutsideWorkspace";
  }
  return "Unknown";
}

} // namespace ergoplan

namespace ergoplan::stl {

namespace {

// Grid snapping tolerance, in units of samples.
constexpr double kGridTol = 1e-9;

auto make_node(Op op, std::vector<Formula> children, Interval interval = {}) -> Formula {
  auto n      = std::make_shared<Node>();
  n->op       = op;
  n->children = std::move(children);
  n->interval = interval;
  for (const auto& c : n->children) {
    if (!c) { throw Error(ErrorCode::InvalidArgument, "null subformula"); }
  }
  return n;
}

void render(const Formula& f, std::ostringstream& os) {
  auto interval = [&](const Interval& i) { os << '[' << i.lo << ',' << i.hi << ']'; };
  switch (f->op) {
    case Op::Pred:
      if (!f->pred.label.empty()) {
        os << f->pred.label;
      } else {
        os << "mu(" << f->pred.offset;
        for (double c : f->pred.coeffs) { os << ',' << c; }
        os << ')';
      }
      return;
    case Op::Not: os << '!'; render(f->children[0], os); return;
    case Op::And:
    case Op::Or: {
      os << '(';
      for (std::size_t i = 0; i < f->children.size(); ++i) {
        if (i > 0) { os << (f->op == Op::And ? " & " : " | "); }
        render(f->children[i], os);
      }
      os << ')';
      return;
    }
    case Op::Always: os << "G"; interval(f->interval); render(f->children[0], os); return;
    case Op::Eventually: os << "F"; interval(f->interval); render(f->children[0], os); return;
    case Op::Until:
      os << '(';
      render(f->children[0], os);
      os << " U";
      interval(f->interval);
      os << ' ';
      render(f->children[1], os);
      os << ')';
      return;
  }
}

} // namespace

auto Interval::make(double lo, double hi) -> Interval {
  if (!std::isfinite(lo) || !std::isfinite(hi) || lo < 0.0 || lo > hi) {
    std::ostringstream os;
    os << "interval [" << lo << ", " << hi << "] must satisfy 0 <= lo <= hi";
    throw Error(ErrorCode::InvalidArgument, os.str());
  }
  return Interval{lo, hi};
}

TimedTrace::TimedTrace(double t0, double dt, std::vector<StateVec> samples)
    : t0_{t0}, dt_{dt}, samples_{std::move(samples)} {
  if (!(dt > 0.0) || !std::isfinite(dt) || !std::isfinite(t0)) {
    throw Error(ErrorCode::InvalidArgument, "trace needs a finite t0 and dt > 0");
  }
  // A single sample is allowed for degenerate (zero-length) motion segments.
  if (samples_.empty()) { throw Error(ErrorCode::InvalidArgument, "trace has no samples"); }
}

auto AffinePredicate::make(const StateVec& coeffs, double offset, std::string label) -> AffinePredicate {
  bool nonzero = false;
  for (double c : coeffs) {
    if (!std::isfinite(c)) { throw Error(ErrorCode::InvalidArgument, "non-finite predicate coefficient"); }
    nonzero = nonzero || c != 0.0;
  }
  if (!nonzero) { throw Error(ErrorCode::InvalidArgument, "predicate needs a nonzero coefficient"); }
  if (!std::isfinite(offset)) { throw Error(ErrorCode::InvalidArgument, "non-finite predicate offset"); }
  return AffinePredicate{coeffs, offset, std::move(label)};
}

auto Box3::make(const Vec3& lo, const Vec3& hi) -> Box3 {
  for (std::size_t j = 0; j < 3; ++j) {
    if (!std::isfinite(lo[j]) || !std::isfinite(hi[j]) || !(lo[j] < hi[j])) {
      std::ostringstream os;
      os << "box axis " << j + 1 << ": lo " << lo[j] << " must be below hi " << hi[j];
      throw Error(ErrorCode::BadBox, os.str());
    }
  }
  return Box3{lo, hi};
}

auto predicate(AffinePredicate mu) -> Formula {
  auto n  = std::make_shared<Node>();
  n->op   = Op::Pred;
  n->pred = std::move(mu);
  return n;
}

auto negation(Formula f) -> Formula { return make_node(Op::Not, {std::move(f)}); }

auto conjunction(std::vector<Formula> fs) -> Formula {
  if (fs.empty()) { throw Error(ErrorCode::InvalidArgument, "empty conjunction"); }
  return make_node(Op::And, std::move(fs));
}

auto disjunction(std::vector<Formula> fs) -> Formula {
  if (fs.empty()) { throw Error(ErrorCode::InvalidArgument, "empty disjunction"); }
  return make_node(Op::Or, std::move(fs));
}

auto always(Interval i, Formula f) -> Formula {
  return make_node(Op::Always, {std::move(f)}, Interval::make(i.lo, i.hi));
}

auto eventually(Interval i, Formula f) -> Formula {
  return make_node(Op::Eventually, {std::move(f)}, Interval::make(i.lo, i.hi));
}

auto until(Interval i, Formula lhs, Formula rhs) -> Formula {
  return make_node(Op::Until, {std::move(lhs), std::move(rhs)}, Interval::make(i.lo, i.hi));
}

auto node_count(const Formula& f) -> std::size_t {
  std::size_t n = 1;
  for (const auto& c : f->children) { n += node_count(c); }
  return n;
}

auto same_structure(const Formula& a, const Formula& b) -> bool {
  if (a->op != b->op || a->children.size() != b->children.size()) { return false; }
  if (a->op == Op::Pred) {
    return a->pred.coeffs == b->pred.coeffs && a->pred.offset == b->pred.offset &&
           a->pred.label == b->pred.label;
  }
  if (!(a->interval == b->interval)) { return false; }
  for (std::size_t i = 0; i < a->children.size(); ++i) {
    if (!same_structure(a->children[i], b->children[i])) { return false; }
  }
  return true;
}

auto to_string(const Formula& f) -> std::string {
  std::ostringstream os;
  render(f, os);
  return os.str();
}

auto window_offsets(double dt, const Interval& i) -> WindowOffsets {
  const double lo = std::ceil(i.lo / dt - kGridTol);
  const double hi = std::floor(i.hi / dt + kGridTol);
  if (lo > hi) {
    std::ostringstream os;
    os << "interval [" << i.lo << ", " << i.hi << "] contains no multiple of dt = " << dt;
    throw Error(ErrorCode::EmptyWindow, os.str());
  }
  return {static_cast<std::size_t>(lo), static_cast<std::size_t>(hi)};
}

auto window_indices(const TimedTrace& trace, std::size_t t_index, const Interval& i) -> IndexRange {
  if (t_index > trace.last_index()) {
    throw Error(ErrorCode::InvalidArgument, "t_index outside trace");
  }
  const auto off   = window_offsets(trace.dt(), i);
  const auto first = t_index + off.lo;
  if (first > trace.last_index()) {
    std::ostringstream os;
    os << "window of sample " << t_index << " starts after the trace ends";
    throw Error(ErrorCode::EmptyWindow, os.str());
  }
  return {first, std::min(t_index + off.hi, trace.last_index())};
}

auto eval_robustness(const Formula& f, const TimedTrace& trace, std::size_t t_index) -> double {
  return detail::SignalGraph(f, trace, t_index, detail::Reduce{}).value();
}

auto eval_bool(const Formula& f, const TimedTrace& trace, std::size_t t_index) -> bool {
  return eval_robustness(f, trace, t_index) > 0.0;
}

auto box_contains(const Box3& box, const std::string& label) -> Formula {
  std::vector<Formula> terms;
  terms.reserve(6);
  static constexpr const char* kAxis[] = {"p1", "p2", "p3"};
  for (std::size_t j = 0; j < 3; ++j) {
    StateVec upper{};
    upper[j] = -1.0;
    terms.push_back(predicate(AffinePredicate::make(upper, box.hi[j], label + ":hi-" + kAxis[j])));
    StateVec lower{};
    lower[j] = 1.0;
    terms.push_back(predicate(AffinePredicate::make(lower, -box.lo[j], label + ":" + kAxis[j] + "-lo")));
  }
  return conjunction(std::move(terms));
}

auto box_avoids(const Box3& box, const std::string& label) -> Formula {
  return negation(box_contains(box, label));
}

} // namespace ergoplan::stl
