#include "dcp/output.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>

#include "dcp/errors.hpp"

namespace dcp {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

void write_curve_csv(std::ostream& os, const DcpCurve& c) {
  os << kCurveHeader << '\n';
  for (const auto& p : c.points)
    os << format_number(p.b) << ',' << p.m << ',' << format_number(p.dp) << ',' << format_number(p.dp_stderr)
       << ',' << format_number(p.slope) << ',' << format_number(p.dnu) << ','
       << format_number(p.dnu_fractional) << ',' << (p.singular ? 1 : 0) << '\n';
}

nlohmann::json curve_json(const DcpCurve& c) {
  nlohmann::json j;
  j["label"] = c.label;
  j["config_hash"] = c.config_hash;
  j["seed"] = c.seed;
  j["n_mc"] = c.n_mc;
  j["survival"] = c.survival;
  j["pulse_area_max"] = c.pulse_area;
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : c.points) {
    nlohmann::json q;
    q["b"] = p.b;
    q["m"] = p.m;
    q["dp_mean"] = p.dp;
    q["dp_stderr"] = p.dp_stderr;
    q["slope"] = p.slope;
    if (p.singular) {
      q["dnu_hz"] = nullptr;
      q["dnu_fractional"] = nullptr;
    } else {
      q["dnu_hz"] = p.dnu;
      q["dnu_fractional"] = p.dnu_fractional;
    }
    q["singular_flag"] = p.singular;
    pts.push_back(q);
  }
  j["points"] = pts;
  return j;
}

std::vector<TemplateRow> template_rows(const std::vector<int>& ps, const std::vector<double>& b) {
  std::vector<TemplateRow> rows;
  for (int p : ps)
    for (double x : b) {
      const auto t = longitudinal_template(x, p);
      rows.push_back({x, p, t.dphi_long, t.dp});
    }
  return rows;
}

void write_template_csv(std::ostream& os, const std::vector<TemplateRow>& rows) {
  os << kTemplateHeader << '\n';
  for (const auto& r : rows)
    os << format_number(r.b) << ',' << r.p << ',' << format_number(r.dphi_long) << ',' << format_number(r.dp)
       << '\n';
}

void write_phase_csv(std::ostream& os, const PhaseMap& map) {
  os << "rho,z,m,h0z,gz,phase\n";
  for (size_t i = 0; i < map.rho.size(); ++i)
    for (size_t j = 0; j < map.z.size(); ++j) {
      const size_t k = i * map.z.size() + j;
      os << format_number(map.rho[i]) << ',' << format_number(map.z[j]) << ',' << map.m << ','
         << format_number(map.h0z[k]) << ',' << format_number(map.gz[k]) << ',';
      if (!std::isnan(map.phase[k])) os << format_number(map.phase[k]);
      os << '\n';
    }
}

nlohmann::json evaluation_json(const Evaluation& e, const ParamSpace& space) {
  nlohmann::json j;
  nlohmann::json p = nlohmann::json::object();
  for (size_t i = 0; i < e.x.size() && i < space.size(); ++i) p[space.names[i]] = e.x[i];
  j["params"] = p;
  if (std::isfinite(e.chi2)) j["chi2"] = e.chi2;
  else j["chi2"] = nullptr;
  j["null_residuals"] = e.null_residuals;
  if (!e.error.empty()) j["error"] = e.error;
  return j;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Config, "cannot write '" + path + "'");
  out << text;
}

}  // namespace dcp
