#include "obsplan/io.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

namespace obsplan {
namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string at_line(int line, const std::string& message) {
  return "line " + std::to_string(line) + ": " + message;
}

bool parse_double(std::string_view text, double& value) {
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  return ec == std::errc() && ptr == end && std::isfinite(value);
}

struct Entry {
  std::string value;
  int line;
};

double number(const std::map<std::string, Entry>& entries,
              const std::string& key) {
  const Entry& e = entries.at(key);
  double value = 0.0;
  if (!parse_double(e.value, value)) {
    throw ParseError(at_line(e.line, "invalid number '" + e.value +
                                         "' for key '" + key + "'"));
  }
  return value;
}

void require_positive(const std::map<std::string, Entry>& entries,
                      const std::string& key, double value) {
  if (!(value > 0.0)) {
    throw ValidationError(
        at_line(entries.at(key).line, key + " must be positive"));
  }
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    fields.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return fields;
}

struct Box {
  double x0, x1, y0, y1;
};

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f"};

std::string coord(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

Scheme parse_scheme(std::string_view name) {
  if (name == "euler") return Scheme::kEuler;
  if (name == "heun") return Scheme::kHeun;
  throw ParseError("unknown scheme '" + std::string(name) +
                   "' (expected euler or heun)");
}

ScenarioFile parse_scenario(std::string_view text) {
  static const std::vector<std::string> kKeys = {
      "kind", "v_mps", "turn_rate_max_dps", "x0_km",  "y0_km",
      "theta0_deg", "t_f_s", "n_grid", "sigma", "scheme"};

  std::map<std::string, Entry> entries;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto eol = text.find('\n', pos);
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError(at_line(line_no, "expected 'key = value'"));
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (std::find(kKeys.begin(), kKeys.end(), key) == kKeys.end()) {
      throw ParseError(at_line(line_no, "unknown key '" + key + "'"));
    }
    if (value.empty()) {
      throw ParseError(at_line(line_no, "missing value for key '" + key + "'"));
    }
    if (!entries.emplace(key, Entry{value, line_no}).second) {
      throw ParseError(at_line(line_no, "duplicate key '" + key + "'"));
    }
  }

  const auto need = [&](const std::string& key) {
    if (!entries.count(key)) {
      throw ParseError("missing required key '" + key + "'");
    }
  };
  need("kind");
  ScenarioFile file;
  Scenario& scn = file.scenario;
  const Entry& kind = entries.at("kind");
  if (kind.value == "P1") {
    scn.kind = ProblemKind::kFreeCourse;
  } else if (kind.value == "P3") {
    scn.kind = ProblemKind::kBoundedTurn;
  } else {
    throw ParseError(at_line(kind.line, "kind must be P1 or P3"));
  }
  const bool bounded = scn.kind == ProblemKind::kBoundedTurn;
  for (const char* key : {"v_mps", "x0_km", "y0_km", "t_f_s"}) need(key);
  if (bounded) {
    need("turn_rate_max_dps");
    need("theta0_deg");
  }

  scn.v = number(entries, "v_mps");
  require_positive(entries, "v_mps", scn.v);
  scn.v /= 1000.0;
  scn.x0 = number(entries, "x0_km");
  scn.y0 = number(entries, "y0_km");
  scn.t_f = number(entries, "t_f_s");
  require_positive(entries, "t_f_s", scn.t_f);
  if (entries.count("turn_rate_max_dps")) {
    const double rate = number(entries, "turn_rate_max_dps");
    if (bounded) require_positive(entries, "turn_rate_max_dps", rate);
    scn.turn_rate_max = rate * kDegToRad;
  }
  if (entries.count("theta0_deg")) {
    scn.theta0 = number(entries, "theta0_deg") * kDegToRad;
  }
  if (entries.count("sigma")) {
    scn.sigma = number(entries, "sigma");
    require_positive(entries, "sigma", scn.sigma);
  }
  if (entries.count("n_grid")) {
    const Entry& e = entries.at("n_grid");
    int n = 0;
    const char* end = e.value.data() + e.value.size();
    const auto [ptr, ec] = std::from_chars(e.value.data(), end, n);
    if (ec != std::errc() || ptr != end) {
      throw ParseError(at_line(e.line, "n_grid must be an integer"));
    }
    if (n < 2) throw ValidationError(at_line(e.line, "n_grid must be at least 2"));
    scn.n_grid = n;
  }
  if (entries.count("scheme")) {
    const Entry& e = entries.at("scheme");
    try {
      file.scheme = parse_scheme(e.value);
    } catch (const ParseError& err) {
      throw ParseError(at_line(e.line, err.what()));
    }
  }
  validate(scn);
  return file;
}

std::string format_exact(double value) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

std::string format_sig4(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", value);
  return buf;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj,
                          const ControlGrid& u, const Scenario& scn) {
  const int n = u.size();
  const bool free_course = scn.kind == ProblemKind::kFreeCourse;
  const auto rate = [&](int k) {
    if (!free_course) return u.values[k];
    if (k + 1 >= n) return 0.0;
    return (u.values[k + 1] - u.values[k]) / (traj.times[k + 1] - traj.times[k]);
  };
  out << kTrajectoryHeader << '\n';
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    const State& s = traj.states[k];
    const int interval = std::min(static_cast<int>(k), n - 1);
    out << format_exact(traj.times[k]) << ',' << format_exact(s.x) << ','
        << format_exact(s.y) << ',' << format_exact(s.theta) << ','
        << format_exact(rate(interval)) << ',' << format_exact(s.z1) << ','
        << format_exact(s.z2) << ',' << format_exact(s.z3) << '\n';
  }
}

void write_costate_csv(std::ostream& out, const CostateTrajectory& ct) {
  out << kCostateHeader << '\n';
  for (std::size_t k = 0; k < ct.costates.size(); ++k) {
    const Costate& c = ct.costates[k];
    out << format_exact(ct.times[k]) << ',' << format_exact(c.lx) << ','
        << format_exact(c.ly) << ',' << format_exact(c.ltheta) << ','
        << format_exact(ct.switching_rate[k]) << '\n';
  }
}

TrajectoryTable read_trajectory_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty trajectory file");
  if (trim(line) != kTrajectoryHeader) {
    throw ParseError("row 1: expected header '" +
                     std::string(kTrajectoryHeader) + "'");
  }
  TrajectoryTable table;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    const std::string_view content = trim(line);
    if (content.empty()) continue;
    const auto fields = split(content, ',');
    if (fields.size() != 8) {
      throw ParseError("row " + std::to_string(row) + ": expected 8 fields, got " +
                       std::to_string(fields.size()));
    }
    double v[8];
    for (int i = 0; i < 8; ++i) {
      if (!parse_double(trim(fields[i]), v[i])) {
        throw ParseError("row " + std::to_string(row) + ": invalid number '" +
                         std::string(fields[i]) + "'");
      }
    }
    table.t.push_back(v[0]);
    table.states.push_back({v[1], v[2], v[3], v[5], v[6], v[7]});
    table.u.push_back(v[4]);
  }
  if (table.t.size() < 3) {
    throw ParseError("trajectory needs at least 3 rows, got " +
                     std::to_string(table.t.size()));
  }
  return table;
}

ControlGrid control_from_table(const TrajectoryTable& table,
                               const Scenario& scn) {
  const std::size_t n = table.t.size() - 1;
  ControlGrid u = ControlGrid::constant(static_cast<int>(n), 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    u.values[k] = scn.kind == ProblemKind::kFreeCourse ? table.states[k].theta
                                                       : table.u[k];
  }
  return u;
}

void write_path_svg(std::ostream& out,
                    const std::vector<const Trajectory*>& paths) {
  Box box{0.0, 0.0, 0.0, 0.0};
  for (const Trajectory* p : paths) {
    for (const State& s : p->states) {
      box.x0 = std::min(box.x0, s.x);
      box.x1 = std::max(box.x1, s.x);
      box.y0 = std::min(box.y0, s.y);
      box.y1 = std::max(box.y1, s.y);
    }
  }
  const double span = std::max({box.x1 - box.x0, box.y1 - box.y0, 1e-3});
  const double pad = 0.05 * span;
  const double width = 640.0;
  const double scale = width / (box.x1 - box.x0 + 2 * pad);
  const double height = std::ceil((box.y1 - box.y0 + 2 * pad) * scale);
  const auto px = [&](double x) { return (x - box.x0 + pad) * scale; };
  const auto py = [&](double y) { return (box.y1 + pad - y) * scale; };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << coord(width)
      << "\" height=\"" << coord(height) << "\" viewBox=\"0 0 " << coord(width)
      << ' ' << coord(height) << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (std::size_t i = 0; i < paths.size(); ++i) {
    out << "<polyline fill=\"none\" stroke=\"" << kPalette[i % 8]
        << "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (const State& s : paths[i]->states) {
      if (!first) out << ' ';
      first = false;
      out << coord(px(s.x)) << ',' << coord(py(s.y));
    }
    out << "\"/>\n";
  }
  out << "<circle cx=\"" << coord(px(0.0)) << "\" cy=\"" << coord(py(0.0))
      << "\" r=\"4\" fill=\"black\"/>\n";
  out << "<text x=\"" << coord(px(0.0) + 6) << "\" y=\"" << coord(py(0.0) - 6)
      << "\" font-size=\"12\" font-family=\"sans-serif\">target</text>\n";
  out << "</svg>\n";
}

void write_series_svg(std::ostream& out, const std::vector<double>& t,
                      const std::vector<std::vector<double>>& series,
                      std::string_view y_label) {
  double lo = 0.0;
  double hi = 0.0;
  for (const auto& s : series) {
    for (double v : s) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (hi == lo) hi = lo + 1.0;
  const double width = 640.0;
  const double height = 400.0;
  const double margin = 40.0;
  const double t0 = t.front();
  const double t1 = t.back() > t0 ? t.back() : t0 + 1.0;
  const auto px = [&](double x) {
    return margin + (x - t0) / (t1 - t0) * (width - 2 * margin);
  };
  const auto py = [&](double y) {
    return height - margin - (y - lo) / (hi - lo) * (height - 2 * margin);
  };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" "
         "height=\"400\" viewBox=\"0 0 640 400\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<line x1=\"" << coord(px(t0)) << "\" y1=\"" << coord(py(0.0))
      << "\" x2=\"" << coord(px(t1)) << "\" y2=\"" << coord(py(0.0))
      << "\" stroke=\"#999\"/>\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    out << "<polyline fill=\"none\" stroke=\"" << kPalette[i % 8]
        << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t k = 0; k < series[i].size() && k < t.size(); ++k) {
      if (k) out << ' ';
      out << coord(px(t[k])) << ',' << coord(py(series[i][k]));
    }
    out << "\"/>\n";
  }
  out << "<text x=\"" << coord(margin) << "\" y=\"20\" font-size=\"12\" "
         "font-family=\"sans-serif\">"
      << y_label << " [" << format_sig4(lo) << ", " << format_sig4(hi)
      << "] vs t [s]</text>\n";
  out << "</svg>\n";
}

void write_summary(std::ostream& out, const Solution& sol,
                   const VerificationReport& report, const Scenario& scn,
                   Scheme scheme) {
  const State& start = sol.trajectory.states.front();
  out << "problem: " << (scn.kind == ProblemKind::kFreeCourse ? "P1" : "P3")
      << '\n';
  out << "scheme: " << scheme_name(scheme) << '\n';
  out << "t_f_s: " << format_exact(scn.t_f) << '\n';
  out << "n_grid: " << scn.n_grid << '\n';
  out << "objective: " << format_sig4(sol.objective_reported) << '\n';
  out << "objective_exact: " << format_exact(sol.objective_reported) << '\n';
  out << "det_fim: "
      << format_sig4(sol.objective_reported / std::pow(scn.sigma, 4)) << '\n';
  out << "initial_course_deg: " << format_sig4(start.theta / kDegToRad) << '\n';
  out << "arc_structure: " << report.arc_structure.label << '\n';
  out << "start: " << sol.start_label << '\n';
  out << "mirror_of: " << sol.mirror_of << '\n';
  out << "converged: " << (sol.converged ? "yes" : "no") << '\n';
  out << "iterations: " << sol.iterations << '\n';
  out << "projected_gradient_norm: " << format_exact(sol.projected_gradient_norm)
      << '\n';
  out << "verification: " << (report.passed ? "pass" : "fail") << '\n';
}

void print_report(std::ostream& out, const VerificationReport& r) {
  out << "arc_structure: " << r.arc_structure.label << '\n';
  for (const Arc& a : r.arc_structure.arcs) {
    out << "  " << arc_name(a.kind) << ' ' << a.first << '-' << a.last << '\n';
  }
  out << "transversality_residual: " << format_exact(r.transversality_residual)
      << '\n';
  out << "fact1_residual: " << format_exact(r.fact1_residual) << " (scale "
      << format_exact(r.fact1_scale) << ")\n";
  out << "bang_sign_violations: " << r.bang_sign_violations << '\n';
  out << "singular_theta_max_err: " << format_exact(r.singular_theta_max_err)
      << '\n';
  out << "hamiltonian_drift: " << format_exact(r.hamiltonian_drift) << '\n';
  out << "passed: " << (r.passed ? "yes" : "no") << '\n';
}

}  // namespace obsplan
