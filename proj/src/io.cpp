#include "ergoplan/io.hpp"

#include "ergoplan/error.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

namespace ergoplan::io {

namespace {

using nlohmann::json;

auto fmt_double(double x) -> std::string {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return {buf, res.ptr};
}

auto fixed3(double x) -> std::string {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", x);
  return buf;
}

auto line_col(std::string_view text, std::size_t byte) -> std::pair<std::size_t, std::size_t> {
  std::size_t line = 1;
  std::size_t col  = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

// Field access with the path carried along for diagnostics.
class Field {
 public:
  Field(const json& j, std::string path) : j_{j}, path_{std::move(path)} {}

  [[nodiscard]] auto path() const -> const std::string& { return path_; }
  [[nodiscard]] auto raw() const -> const json& { return j_; }

  [[nodiscard]] auto has(const char* key) const -> bool { return j_.is_object() && j_.contains(key); }

  [[nodiscard]] auto operator[](const char* key) const -> Field {
    if (!j_.is_object()) { throw Error(ErrorCode::ParseError, path_ + ": expected an object"); }
    const std::string sub = path_.empty() ? key : path_ + "." + key;
    if (!j_.contains(key)) { throw Error(ErrorCode::MissingField, sub + ": missing"); }
    return {j_.at(key), sub};
  }

  [[nodiscard]] auto items() const -> std::vector<Field> {
    if (!j_.is_array()) { throw Error(ErrorCode::ParseError, path_ + ": expected an array"); }
    std::vector<Field> out;
    for (std::size_t i = 0; i < j_.size(); ++i) { out.emplace_back(j_[i], path_ + "[" + std::to_string(i) + "]"); }
    return out;
  }

  [[nodiscard]] auto number() const -> double {
    if (!j_.is_number()) { throw Error(ErrorCode::ParseError, path_ + ": expected a number"); }
    return j_.get<double>();
  }

  [[nodiscard]] auto integer() const -> int {
    if (!j_.is_number_integer()) { throw Error(ErrorCode::ParseError, path_ + ": expected an integer"); }
    return j_.get<int>();
  }

  [[nodiscard]] auto string() const -> std::string {
    if (!j_.is_string()) { throw Error(ErrorCode::ParseError, path_ + ": expected a string"); }
    return j_.get<std::string>();
  }

  [[nodiscard]] auto vec3() const -> Vec3 {
    const auto xs = items();
    if (xs.size() != 3) { throw Error(ErrorCode::ParseError, path_ + ": expected 3 numbers"); }
    return {xs[0].number(), xs[1].number(), xs[2].number()};
  }

  // Either a scalar applied to every axis or three numbers.
  [[nodiscard]] auto per_axis() const -> Vec3 {
    if (j_.is_number()) {
      const double x = number();
      return {x, x, x};
    }
    return vec3();
  }

  // lo/hi pair; ordering is checked later by validate_mission.
  [[nodiscard]] auto box() const -> Box3 {
    Box3 b;
    b.lo = (*this)["lo"].vec3();
    b.hi = (*this)["hi"].vec3();
    return b;
  }

 private:
  const json& j_;
  std::string path_;
};

auto box_json(const Box3& b) -> json { return json{{"lo", b.lo}, {"hi", b.hi}}; }

} // namespace

auto parse_mission(std::string_view text) -> Mission {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_col(text, e.byte);
    std::ostringstream os;
    os << "line " << line << ", column " << col << ": " << e.what();
    throw Error(ErrorCode::ParseError, os.str());
  }

  const Field root(doc, "");
  Mission m;
  m.workspace = root["workspace"].box();
  if (root.has("obstacles")) {
    for (const auto& f : root["obstacles"].items()) { m.obstacles.push_back(f.box()); }
  }
  for (const auto& f : root["operators"].items()) {
    OperatorSpec op;
    op.handover_box = f["box"].box();
    op.heading      = f["heading_rad"].number();
    for (const auto& p : f["preferences"].items()) {
      try {
        op.preferred_approaches.push_back(approach_from_string(p.string()));
      } catch (const Error& e) {
        throw Error(e.code(), p.path() + ": " + e.message());
      }
    }
    if (f.has("approach_depth")) { op.approach_box_depth = f["approach_depth"].number(); }
    if (f.has("behind_depth")) { op.behind_box_depth = f["behind_depth"].number(); }
    m.operators.push_back(std::move(op));
  }
  for (const auto& f : root["refills"].items()) { m.refills.push_back(f.box()); }
  m.depot    = root["depot"].vec3();
  m.capacity = root["capacity"].integer();

  const auto times = root["times"];
  m.t_total    = times["t_total"].number();
  m.t_handover = times["t_handover"].number();
  m.t_refill   = times["t_refill"].number();
  m.dt         = times["dt"].number();
  if (!(m.dt > 0.0) || !std::isfinite(m.t_total / m.dt)) {
    throw Error(ErrorCode::TimeInconsistent, "times.dt must be positive");
  }
  const double n = std::round(m.t_total / m.dt);
  if (n < 1.0) { throw Error(ErrorCode::TimeInconsistent, "times.t_total must cover at least one step"); }
  m.samples = static_cast<std::size_t>(n);

  const auto limits = root["limits"];
  m.limits.v_max    = limits["v_max"].per_axis();
  m.limits.a_max    = limits["a_max"].per_axis();

  validate_mission(m);
  return m;
}

auto load_mission(const std::filesystem::path& path) -> Mission {
  const std::string text = read_file(path);
  try {
    return parse_mission(text);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.message(), e.detail());
  }
}

auto serialize_mission(const Mission& m) -> std::string {
  json doc;
  doc["workspace"] = box_json(m.workspace);
  doc["obstacles"] = json::array();
  for (const auto& b : m.obstacles) { doc["obstacles"].push_back(box_json(b)); }
  doc["operators"] = json::array();
  for (const auto& op : m.operators) {
    json prefs = json::array();
    for (auto a : op.preferred_approaches) { prefs.push_back(std::string(to_string(a))); }
    doc["operators"].push_back(json{{"box", box_json(op.handover_box)},
                                    {"heading_rad", op.heading},
                                    {"preferences", prefs},
                                    {"approach_depth", op.approach_box_depth},
                                    {"behind_depth", op.behind_box_depth}});
  }
  doc["refills"] = json::array();
  for (const auto& b : m.refills) { doc["refills"].push_back(box_json(b)); }
  doc["depot"]    = m.depot;
  doc["capacity"] = m.capacity;
  doc["times"]    = json{{"t_total", m.t_total}, {"t_handover", m.t_handover}, {"t_refill", m.t_refill}, {"dt", m.dt}};
  doc["limits"]   = json{{"v_max", m.limits.v_max}, {"a_max", m.limits.a_max}};
  return doc.dump(2) + "\n";
}

auto heading_column(const stl::TimedTrace& trace) -> std::vector<double> {
  std::vector<double> out(trace.size(), 0.0);
  double held = 0.0;
  for (std::size_t k = 0; k < trace.size(); ++k) {
    const double v1 = trace[k][3];
    const double v2 = trace[k][4];
    if (std::hypot(v1, v2) >= 1e-6) { held = std::atan2(v2, v1); }
    out[k] = held;
  }
  return out;
}

auto write_csv(const dynamics::Trajectory& traj) -> std::string {
  const auto& tr       = traj.trace;
  const auto heading   = heading_column(tr);
  std::string out      = "t,p1,p2,p3,v1,v2,v3,a1,a2,a3,heading\n";
  const Vec3 no_control{};
  for (std::size_t k = 0; k < tr.size(); ++k) {
    const Vec3& a = traj.controls.empty() ? no_control : traj.controls[std::min(k, traj.controls.size() - 1)];
    out += fmt_double(tr.time(k));
    for (double x : tr[k]) { out += ',' + fmt_double(x); }
    for (double x : a) { out += ',' + fmt_double(x); }
    out += ',' + fmt_double(heading[k]) + '\n';
  }
  return out;
}

auto read_csv(std::string_view text, const Mission& m) -> dynamics::Trajectory {
  std::vector<stl::StateVec> samples;
  dynamics::ControlSeq controls;
  std::size_t line_no = 0;
  std::size_t pos     = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) { end = text.size(); }
    std::string_view line = text.substr(pos, end - pos);
    pos                   = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') { line.remove_suffix(1); }
    if (line.empty()) { continue; }
    if (line_no == 1) {
      if (line != "t,p1,p2,p3,v1,v2,v3,a1,a2,a3,heading") {
        throw Error(ErrorCode::ParseError, "line 1: unexpected header");
      }
      continue;
    }
    std::array<double, 11> row{};
    std::size_t col = 0;
    std::size_t p   = 0;
    while (true) {
      auto comma = line.find(',', p);
      const auto cell = line.substr(p, comma == std::string_view::npos ? line.size() - p : comma - p);
      if (col >= row.size()) { break; }
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), row[col]);
      if (res.ec != std::errc{} || res.ptr != cell.data() + cell.size()) {
        throw Error(ErrorCode::ParseError,
                    "line " + std::to_string(line_no) + ", column " + std::to_string(col + 1) + ": bad number");
      }
      ++col;
      if (comma == std::string_view::npos) { break; }
      p = comma + 1;
    }
    if (col != row.size()) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected 11 columns");
    }
    const std::size_t k = samples.size();
    if (std::abs(row[0] - static_cast<double>(k) * m.dt) > 1e-9) {
      throw Error(ErrorCode::GridMismatch, "line " + std::to_string(line_no) + ": time is off the mission grid");
    }
    samples.push_back({row[1], row[2], row[3], row[4], row[5], row[6]});
    controls.push_back({row[7], row[8], row[9]});
  }
  if (samples.size() != m.samples + 1) {
    throw Error(ErrorCode::GridMismatch, "expected " + std::to_string(m.samples + 1) + " rows, found " +
                                             std::to_string(samples.size()));
  }
  controls.pop_back();
  return {stl::TimedTrace(0.0, m.dt, std::move(samples)), std::move(controls)};
}

auto write_report(const planner::PlanResult& result, const ReportExtras& extras) -> std::string {
  json doc;
  doc["status"]            = std::string(planner::to_string(result.status));
  doc["exact_robustness"]  = result.exact_robustness;
  doc["smooth_robustness"] = result.smooth_robustness;
  doc["smooth_mode"]       = extras.smooth_mode;
  doc["iterations"]        = result.iterations;
  doc["route"]             = result.route.vertices;
  json parts               = json::array();
  for (const auto& s : result.per_subformula) { parts.push_back(json{{"label", s.label}, {"robustness", s.robustness}}); }
  doc["subformulas"] = parts;
  if (extras.wall_time_s) { doc["wall_time_s"] = *extras.wall_time_s; }
  return doc.dump(2) + "\n";
}

auto emit_svg(const dynamics::Trajectory& traj, const Mission& m) -> std::string {
  constexpr double kScale = 20.0; // px per meter
  const Box3& ws          = m.workspace;
  auto px                 = [&](double x) { return (x - ws.lo[0]) * kScale; };
  auto py                 = [&](double y) { return (ws.hi[1] - y) * kScale; };

  std::string out;
  auto rect = [&](const Box3& b, const char* style) {
    out += "    <rect x=\"" + fixed3(px(b.lo[0])) + "\" y=\"" + fixed3(py(b.hi[1])) + "\" width=\"" +
           fixed3((b.hi[0] - b.lo[0]) * kScale) + "\" height=\"" + fixed3((b.hi[1] - b.lo[1]) * kScale) +
           "\" style=\"" + style + "\"/>\n";
  };

  const double width  = (ws.hi[0] - ws.lo[0]) * kScale;
  const double height = (ws.hi[1] - ws.lo[1]) * kScale;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fixed3(width) + "\" height=\"" + fixed3(height) +
         "\" viewBox=\"0 0 " + fixed3(width) + " " + fixed3(height) + "\">\n";

  out += "  <g id=\"workspace\">\n";
  rect(ws, "fill:#ffffff;stroke:#000000;stroke-width:1");
  out += "  </g>\n  <g id=\"obstacles\">\n";
  for (const auto& b : m.obstacles) { rect(b, "fill:#808080;stroke:none"); }
  out += "  </g>\n  <g id=\"operators\">\n";
  for (const auto& op : m.operators) {
    const auto regions = derive_regions(op);
    rect(op.handover_box, "fill:#4a90d9;fill-opacity:0.6;stroke:#1f4f80");
    rect(clip_to(regions.behind, ws), "fill:#d94a4a;fill-opacity:0.3;stroke:#802020");
    for (const auto& [a, b] : regions.approaches) { rect(clip_to(b, ws), "fill:#4ad97a;fill-opacity:0.3;stroke:#208040"); }
  }
  out += "  </g>\n  <g id=\"refills\">\n";
  for (const auto& b : m.refills) { rect(b, "fill:#e0c040;fill-opacity:0.6;stroke:#806010"); }
  out += "  </g>\n  <g id=\"trajectory\">\n    <polyline fill=\"none\" stroke=\"#000000\" stroke-width=\"1\" points=\"";
  const auto& tr = traj.trace;
  for (std::size_t k = 0; k < tr.size(); ++k) {
    if (k > 0) { out += ' '; }
    out += fixed3(px(tr[k][0])) + ',' + fixed3(py(tr[k][1]));
  }
  out += "\"/>\n  </g>\n</svg>\n";
  return out;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) { throw Error(ErrorCode::InvalidArgument, "cannot open " + tmp.string() + " for writing"); }
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!f) { throw Error(ErrorCode::InvalidArgument, "write failed for " + tmp.string()); }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw Error(ErrorCode::InvalidArgument, "cannot rename onto " + path.string() + ": " + ec.message());
  }
}

auto read_file(const std::filesystem::path& path) -> std::string {
  std::ifstream f(path, std::ios::binary);
  if (!f) { throw Error(ErrorCode::ParseError, "cannot open " + path.string()); }
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

} // namespace ergoplan::io
