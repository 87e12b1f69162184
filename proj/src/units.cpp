#include "dcp/units.hpp"

#include <cctype>
#include <cstdlib>
#include <map>
#include <utility>

#include "dcp/constants.hpp"
#include "dcp/errors.hpp"

namespace dcp {
namespace {

struct Unit {
  Dim dim;
  double scale;
};

const std::map<std::string, Unit>& unit_table() {
  static const std::map<std::string, Unit> t = {
      {"m", {Dim::Length, 1.0}},
      {"cm", {Dim::Length, 1e-2}},
      {"mm", {Dim::Length, 1e-3}},
      {"um", {Dim::Length, 1e-6}},
      {"\xC2\xB5m", {Dim::Length, 1e-6}},
      {"\xCE\xBCm", {Dim::Length, 1e-6}},
      {"nm", {Dim::Length, 1e-9}},
      {"Hz", {Dim::Frequency, 1.0}},
      {"kHz", {Dim::Frequency, 1e3}},
      {"MHz", {Dim::Frequency, 1e6}},
      {"GHz", {Dim::Frequency, 1e9}},
      {"rad/s", {Dim::AngularFrequency, 1.0}},
      {"rad", {Dim::Angle, 1.0}},
      {"mrad", {Dim::Angle, 1e-3}},
      {"urad", {Dim::Angle, 1e-6}},
      {"deg", {Dim::Angle, pi / 180.0}},
      {"s", {Dim::Time, 1.0}},
      {"ms", {Dim::Time, 1e-3}},
      {"us", {Dim::Time, 1e-6}},
      {"K", {Dim::Temperature, 1.0}},
      {"mK", {Dim::Temperature, 1e-3}},
      {"uK", {Dim::Temperature, 1e-6}},
      {"\xC2\xB5K", {Dim::Temperature, 1e-6}},
      {"\xCE\xBCK", {Dim::Temperature, 1e-6}},
      {"nK", {Dim::Temperature, 1e-9}},
      {"m/s", {Dim::Velocity, 1.0}},
      {"mm/s", {Dim::Velocity, 1e-3}},
      {"S/m", {Dim::Conductivity, 1.0}},
      {"kg", {Dim::Mass, 1.0}},
      {"m/s2", {Dim::Acceleration, 1.0}},
      {"m/s^2", {Dim::Acceleration, 1.0}},
  };
  return t;
}

std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

}  // namespace

const char* dim_name(Dim d) {
  switch (d) {
    case Dim::Length: return "length";
    case Dim::Frequency: return "frequency";
    case Dim::AngularFrequency: return "angular frequency";
    case Dim::Angle: return "angle";
    case Dim::Time: return "time";
    case Dim::Temperature: return "temperature";
    case Dim::Velocity: return "velocity";
    case Dim::Conductivity: return "conductivity";
    case Dim::Mass: return "mass";
    case Dim::Acceleration: return "acceleration";
    case Dim::None: return "dimensionless";
  }
  return "?";
}

double parse_quantity(const std::string& text, Dim dim) {
  const std::string s = trim(text);
  const char* begin = s.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end == begin) throw Error(ErrorCode::Config, "not a number: '" + text + "'");
  std::string unit = trim(std::string(end));
  if (unit.empty()) return v;
  auto it = unit_table().find(unit);
  if (it == unit_table().end()) throw Error(ErrorCode::Config, "unknown unit '" + unit + "' in '" + text + "'");
  if (it->second.dim != dim)
    throw Error(ErrorCode::Config, "expected a " + std::string(dim_name(dim)) + " but got '" + text + "'");
  return v * it->second.scale;
}

}  // namespace dcp
