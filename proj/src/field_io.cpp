#include "dcp/field_io.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "dcp/errors.hpp"

namespace dcp {

using nlohmann::json;

namespace {

constexpr int kFormatVersion = 1;
const char* const kNames[6] = {"f_rho", "f_phi", "f_z", "g_rho", "g_phi", "g_z"};

json array_json(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) {
    if (std::isfinite(x)) a.push_back(x);
    else a.push_back(nullptr);
  }
  return a;
}

std::vector<double> array_from(const json& j, const std::string& key, std::size_t expect) {
  if (!j.is_array()) throw Error(ErrorCode::Format, "field map: '" + key + "' must be an array");
  std::vector<double> v;
  v.reserve(j.size());
  for (const auto& x : j) {
    if (x.is_null()) v.push_back(std::numeric_limits<double>::quiet_NaN());
    else if (x.is_number()) v.push_back(x.get<double>());
    else throw Error(ErrorCode::Format, "field map: '" + key + "' holds a non-number");
  }
  if (expect && v.size() != expect)
    throw Error(ErrorCode::Format, "field map: '" + key + "' has " + std::to_string(v.size()) +
                                       " values, expected " + std::to_string(expect));
  return v;
}

const json& need(const json& j, const char* key) {
  if (!j.contains(key)) throw Error(ErrorCode::Format, std::string("field map: missing '") + key + "'");
  return j.at(key);
}

double need_number(const json& j, const char* key) {
  const json& v = need(j, key);
  if (!v.is_number()) throw Error(ErrorCode::Format, std::string("field map: '") + key + "' must be a number");
  return v.get<double>();
}

}  // namespace

const MapComponent* FieldMap::find(int m) const {
  for (const auto& c : comps)
    if (c.m == m) return &c;
  return nullptr;
}

FieldMap sample_field_map(const FieldModel& model, const std::vector<int>& ms, const std::vector<double>& rho,
                          const std::vector<double>& z) {
  FieldMap map;
  map.rho = rho;
  map.z = z;
  map.eigen_k = model.wavenumber();
  const std::size_t n = rho.size() * z.size();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  map.e0phi.assign(n, nan);
  map.h0rho.assign(n, nan);
  map.h0z.assign(n, nan);
  map.comps.resize(ms.size());
  FieldPoint pt;
  bool full = true;
  for (std::size_t s = 0; s < ms.size(); ++s) {
    map.comps[s].m = ms[s];
    for (const char* name : kNames) map.comps[s].arrays[name].assign(n, nan);
  }
  for (std::size_t i = 0; i < rho.size(); ++i) {
    for (std::size_t j = 0; j < z.size(); ++j) {
      const std::size_t at = i * z.size() + j;
      if (!model.point(rho[i], z[j], ms, pt)) continue;
      full = full && pt.full;
      map.e0phi[at] = pt.e0phi;
      map.h0rho[at] = pt.h0rho;
      map.h0z[at] = pt.h0z;
      for (std::size_t s = 0; s < ms.size(); ++s)
        for (int c = 0; c < 3; ++c) {
          map.comps[s].arrays[kNames[c]][at] = pt.f[s][c];
          map.comps[s].arrays[kNames[3 + c]][at] = pt.g[s][c];
        }
    }
  }
  if (!full)
    for (auto& c : map.comps)
      for (int k = 0; k < 5; ++k) c.arrays.erase(kNames[k]);
  return map;
}

json field_map_to_json(const FieldMap& map) {
  json j;
  j["format"] = "dcp-field-map";
  j["version"] = kFormatVersion;
  j["source"] = map.source;
  j["eigen_k"] = map.eigen_k;
  j["q0"] = map.q0;
  j["normalization"] = map.normalization;
  j["geometry_hash"] = map.geometry_hash;
  j["rho"] = array_json(map.rho);
  j["z"] = array_json(map.z);
  j["e0phi"] = array_json(map.e0phi);
  j["h0rho"] = array_json(map.h0rho);
  j["h0z"] = array_json(map.h0z);
  json comps = json::array();
  for (const auto& c : map.comps) {
    json jc;
    jc["m"] = c.m;
    for (const auto& [name, v] : c.arrays) jc[name] = array_json(v);
    comps.push_back(jc);
  }
  j["components"] = comps;
  return j;
}

FieldMap field_map_from_json(const json& j, std::vector<std::string>* warnings) {
  if (!j.is_object() || j.value("format", "") != "dcp-field-map")
    throw Error(ErrorCode::Format, "field map: not a dcp-field-map document");
  if (!need(j, "version").is_number_integer() || j.at("version").get<int>() != kFormatVersion)
    throw Error(ErrorCode::Format, "field map: unsupported version");
  FieldMap map;
  map.source = j.value("source", "");
  map.eigen_k = need_number(j, "eigen_k");
  map.q0 = j.contains("q0") ? need_number(j, "q0") : 0.0;
  map.normalization = need_number(j, "normalization");
  map.geometry_hash = j.value("geometry_hash", "");
  map.rho = array_from(need(j, "rho"), "rho", 0);
  map.z = array_from(need(j, "z"), "z", 0);
  const std::size_t n = map.size();
  map.e0phi = array_from(need(j, "e0phi"), "e0phi", n);
  map.h0rho = array_from(need(j, "h0rho"), "h0rho", n);
  map.h0z = array_from(need(j, "h0z"), "h0z", n);
  for (const auto& jc : need(j, "components")) {
    MapComponent c;
    if (!jc.contains("m") || !jc.at("m").is_number_integer())
      throw Error(ErrorCode::Format, "field map: component without integer 'm'");
    c.m = jc.at("m").get<int>();
    if (c.m < 0 || c.m > 4) throw Error(ErrorCode::Format, "field map: component m outside 0..4");
    for (auto it = jc.begin(); it != jc.end(); ++it) {
      if (it.key() == "m") continue;
      bool known = false;
      for (const char* name : kNames) known = known || it.key() == name;
      if (!known) throw Error(ErrorCode::Format, "field map: unknown component array '" + it.key() + "'");
      c.arrays[it.key()] = array_from(it.value(), it.key(), n);
    }
    map.comps.push_back(std::move(c));
  }
  if (!(map.normalization > 0) || !std::isfinite(map.normalization))
    throw Error(ErrorCode::Format, "field map: normalization must be positive");
  if (map.normalization != 1.0) {
    // Every field is linear in the drive, so one factor fixes all of them.
    const double s = 1.0 / map.normalization;
    for (auto* v : {&map.e0phi, &map.h0rho, &map.h0z})
      for (double& x : *v) x *= s;
    for (auto& c : map.comps)
      for (auto& [name, v] : c.arrays)
        for (double& x : v) x *= s;
    if (warnings)
      warnings->push_back("field map normalization " + std::to_string(map.normalization) +
                          " rescaled to 1");
    map.normalization = 1.0;
  }
  return map;
}

void export_field_map(const FieldMap& map, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Format, "cannot write '" + path + "'");
  out << field_map_to_json(map).dump() << '\n';
}

FieldMap import_field_map(const std::string& path, std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Format, "cannot open '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Format, "field map '" + path + "': " + e.what());
  }
  return field_map_from_json(j, warnings);
}

}  // namespace dcp
