#include "sitrep/geometry.h"

#include <cmath>
#include <fstream>
#include <set>

#include "sitrep/error.h"

namespace sitrep {

namespace {

Ring ParseRing(const nlohmann::json& j, const std::string& fips) {
  Ring ring;
  for (const auto& pt : j) {
    if (!pt.is_array() || pt.size() < 2 || !pt[0].is_number() ||
        !pt[1].is_number()) {
      throw ValidationError("county " + fips + ": malformed coordinate",
                            "geometry");
    }
    const double lon = pt[0].get<double>();
    const double lat = pt[1].get<double>();
    if (std::abs(lon) > 180.0 || std::abs(lat) > 90.0) {
      throw ValidationError("county " + fips + ": coordinate out of range",
                            "geometry");
    }
    ring.push_back({lon, lat});
  }
  return ring;
}

Polygon ParsePolygon(const nlohmann::json& j, const std::string& fips) {
  Polygon polygon;
  for (const auto& ring : j) polygon.push_back(ParseRing(ring, fips));
  return polygon;
}

std::string PropertyText(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) {
    // Numeric fips lose their leading zero in many exports.
    std::string s = std::to_string(v.get<long long>());
    while (s.size() < 5) s.insert(s.begin(), '0');
    return s;
  }
  return v.dump();
}

}  // namespace

nlohmann::json CountyGeometry::GeometryJson() const {
  auto polygon_json = [](const Polygon& p) {
    nlohmann::json rings = nlohmann::json::array();
    for (const auto& ring : p) {
      nlohmann::json pts = nlohmann::json::array();
      for (const auto& pt : ring) pts.push_back({pt[0], pt[1]});
      rings.push_back(std::move(pts));
    }
    return rings;
  };
  if (polygons.size() == 1) {
    return {{"type", "Polygon"}, {"coordinates", polygon_json(polygons[0])}};
  }
  nlohmann::json coords = nlohmann::json::array();
  for (const auto& p : polygons) coords.push_back(polygon_json(p));
  return {{"type", "MultiPolygon"}, {"coordinates", coords}};
}

const CountyGeometry* GeometryCollection::Find(std::string_view fips) const {
  for (const auto& c : counties) {
    if (c.fips == fips) return &c;
  }
  return nullptr;
}

GeometryCollection ParseGeometries(const nlohmann::json& collection) {
  if (!collection.is_object() ||
      collection.value("type", std::string()) != "FeatureCollection" ||
      !collection.contains("features") || !collection["features"].is_array()) {
    throw ValidationError("geometry file is not a GeoJSON FeatureCollection");
  }
  GeometryCollection out;
  std::set<std::string> seen;
  std::size_t index = 0;
  for (const auto& feature : collection["features"]) {
    const auto props = feature.value("properties", nlohmann::json::object());
    if (!props.is_object() || !props.contains("fips") || props["fips"].is_null()) {
      throw ValidationError("geometry feature " + std::to_string(index) +
                                " lacks a fips property",
                            "fips", index);
    }
    CountyGeometry county;
    county.fips = PropertyText(props["fips"]);
    if (!seen.insert(county.fips).second) {
      throw ValidationError("duplicate fips " + county.fips + " in geometry file",
                            "fips", index);
    }
    if (props.contains("name") && props["name"].is_string()) {
      county.name = props["name"].get<std::string>();
    } else if (props.contains("NAME") && props["NAME"].is_string()) {
      county.name = props["NAME"].get<std::string>();
    } else {
      county.name = county.fips;
    }
    const auto& geometry = feature.value("geometry", nlohmann::json());
    if (!geometry.is_null()) {
      const auto type = geometry.value("type", std::string());
      const auto& coords = geometry.at("coordinates");
      if (type == "Polygon") {
        county.polygons.push_back(ParsePolygon(coords, county.fips));
      } else if (type == "MultiPolygon") {
        for (const auto& p : coords) {
          county.polygons.push_back(ParsePolygon(p, county.fips));
        }
      } else {
        throw ValidationError("county " + county.fips +
                                  ": unsupported geometry type '" + type + "'",
                              "geometry", index);
      }
    }
    out.counties.push_back(std::move(county));
    ++index;
  }
  if (out.counties.empty()) {
    out.warnings.push_back("geometry collection is empty");
  }
  return out;
}

GeometryCollection LoadGeometries(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open geometry file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("geometry file '" + path + "' is not valid JSON: " +
                          e.what());
  }
  return ParseGeometries(j);
}

}  // namespace sitrep
