#ifndef SITREP_GEOMETRY_H_
#define SITREP_GEOMETRY_H_

#include <array>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace sitrep {

using LonLat = std::array<double, 2>;
using Ring = std::vector<LonLat>;
using Polygon = std::vector<Ring>;  // outer ring followed by holes

struct CountyGeometry {
  std::string fips;
  std::string name;
  std::vector<Polygon> polygons;

  // GeoJSON Polygon when there is one polygon, MultiPolygon otherwise.
  nlohmann::json GeometryJson() const;
};

struct GeometryCollection {
  std::vector<CountyGeometry> counties;
  std::vector<std::string> warnings;

  const CountyGeometry* Find(std::string_view fips) const;
};

// Parses a GeoJSON FeatureCollection whose features carry a `fips` property
// (and optionally `name`). Throws ValidationError for a feature without fips,
// a duplicate fips, or an unsupported geometry type.
GeometryCollection ParseGeometries(const nlohmann::json& collection);
GeometryCollection LoadGeometries(const std::string& path);

}  // namespace sitrep

#endif  // SITREP_GEOMETRY_H_
