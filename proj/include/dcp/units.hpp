#pragma once

#include <string>

namespace dcp {

enum class Dim { Length, Frequency, AngularFrequency, Angle, Time, Temperature, Velocity, Conductivity, Mass, Acceleration, None };

// Parses "26 mm", "9.1926 GHz", "1 mrad", "20 um" into SI. A bare number is
// taken as already SI. Throws Error(Config) on an unknown or mismatched unit.
double parse_quantity(const std::string& text, Dim dim);

const char* dim_name(Dim d);

}  // namespace dcp
