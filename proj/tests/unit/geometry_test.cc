#include "sitrep/geometry.h"

#include <gtest/gtest.h>

#include "sitrep/error.h"

namespace sitrep {
namespace {

nlohmann::json Square(double x, double y) {
  return {{"type", "Polygon"},
          {"coordinates", {{{x, y}, {x + 1, y}, {x + 1, y + 1}, {x, y + 1}, {x, y}}}}};
}

nlohmann::json Feature(nlohmann::json properties, nlohmann::json geometry) {
  return {{"type", "Feature"}, {"properties", properties}, {"geometry", geometry}};
}

TEST(ParseGeometriesTest, ReadsPolygonsAndMultiPolygons) {
  nlohmann::json multi = {{"type", "MultiPolygon"},
                          {"coordinates", {Square(0, 0)["coordinates"],
                                           Square(5, 5)["coordinates"]}}};
  nlohmann::json fc = {{"type", "FeatureCollection"},
                       {"features",
                        {Feature({{"fips", "48001"}, {"name", "Anderson"}}, Square(0, 0)),
                         Feature({{"fips", 1001}, {"NAME", "Autauga"}}, multi),
                         Feature({{"fips", "48003"}}, nullptr)}}};
  const GeometryCollection g = ParseGeometries(fc);
  ASSERT_EQ(g.counties.size(), 3u);
  EXPECT_EQ(g.Find("48001")->name, "Anderson");
  EXPECT_EQ(g.Find("48001")->polygons.size(), 1u);
  EXPECT_EQ(g.Find("48001")->GeometryJson()["type"], "Polygon");
  ASSERT_NE(g.Find("01001"), nullptr);
  EXPECT_EQ(g.Find("01001")->polygons.size(), 2u);
  EXPECT_EQ(g.Find("01001")->GeometryJson()["type"], "MultiPolygon");
  EXPECT_EQ(g.Find("48003")->name, "48003");
  EXPECT_TRUE(g.Find("48003")->polygons.empty());
  EXPECT_EQ(g.Find("99999"), nullptr);
}

TEST(ParseGeometriesTest, Errors) {
  EXPECT_THROW(ParseGeometries({{"type", "Feature"}}), ValidationError);
  nlohmann::json missing = {{"type", "FeatureCollection"},
                            {"features", {Feature({{"name", "x"}}, Square(0, 0))}}};
  EXPECT_THROW(ParseGeometries(missing), ValidationError);
  nlohmann::json dup = {{"type", "FeatureCollection"},
                        {"features", {Feature({{"fips", "48001"}}, Square(0, 0)),
                                      Feature({{"fips", "48001"}}, Square(1, 1))}}};
  EXPECT_THROW(ParseGeometries(dup), ValidationError);
  nlohmann::json point = {
      {"type", "FeatureCollection"},
      {"features", {Feature({{"fips", "48001"}}, {{"type", "Point"}, {"coordinates", {0, 0}}})}}};
  EXPECT_THROW(ParseGeometries(point), ValidationError);
}

TEST(ParseGeometriesTest, EmptyCollectionWarns) {
  const auto g = ParseGeometries({{"type", "FeatureCollection"}, {"features", nlohmann::json::array()}});
  EXPECT_TRUE(g.counties.empty());
  EXPECT_FALSE(g.warnings.empty());
}

}  // namespace
}  // namespace sitrep
