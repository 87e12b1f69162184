#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "dcp/ensemble.hpp"
#include "dcp/fem.hpp"
#include "dcp/optimizer.hpp"

namespace dcp {

// Shortest text that reads back to the same double; "nan" and "inf" for
// non-finite values.
std::string format_number(double v);

inline constexpr const char* kCurveHeader = "b,m,dp_mean,dp_stderr,slope,dnu_hz,dnu_fractional,singular_flag";
inline constexpr const char* kTemplateHeader = "b,p,dphi_long,dp_template";

void write_curve_csv(std::ostream& os, const DcpCurve& c);
nlohmann::json curve_json(const DcpCurve& c);

struct TemplateRow {
  double b;
  int p;
  double dphi_long, dp;
};
std::vector<TemplateRow> template_rows(const std::vector<int>& ps, const std::vector<double>& b);
void write_template_csv(std::ostream& os, const std::vector<TemplateRow>& rows);

// rho, z, m, h0z, gz, phase (phase empty where below the floor).
void write_phase_csv(std::ostream& os, const PhaseMap& map);

nlohmann::json evaluation_json(const Evaluation& e, const ParamSpace& space);

void write_text(const std::string& path, const std::string& text);

}  // namespace dcp
