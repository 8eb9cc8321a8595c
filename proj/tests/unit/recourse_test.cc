#include "sitrep/recourse.h"

#include <gtest/gtest.h>

#include <random>
#include <set>

#include "sitrep/error.h"
#include "support/fixtures.h"

namespace sitrep {
namespace {

using testing::DeskModel;
using testing::DeskSchema;

std::vector<double> Range(int lo, int hi) {
  std::vector<double> v;
  for (int i = lo; i <= hi; ++i) v.push_back(i);
  return v;
}

FeatureSpace DeskSpace() {
  return FeatureSpace(DeskSchema(2), PerturbationSampler({Range(0, 20), Range(0, 20)}),
                      {1.0, 1.0});
}

RecourseRequest DeskRequest(int k) {
  RecourseRequest request;
  request.features = {3.0, 3.0};
  request.desired = SeverityClass::kHigh;
  request.max_features = k;
  request.num_suggestions = 3;
  request.seed = 17;
  return request;
}

// Any point with x1 + x2 > 10 is High, so from (3, 3) the L1 distance to the
// boundary is 4 whether one or both features move.
constexpr double kDeskMinimalL1 = 4.0;

TEST(RecourseTest, DeskModelNearMinimalSingleFeature) {
  const auto model = DeskModel();
  const auto space = DeskSpace();
  const auto result = GenerateRecourse(model, space, DeskRequest(1));
  ASSERT_EQ(result.status, RecourseStatus::kOk);
  ASSERT_FALSE(result.suggestions.empty());
  const auto& best = result.suggestions.front();
  ASSERT_EQ(best.changes.size(), 1u);
  EXPECT_GT(best.changes[0].to, 7.0);
  EXPECT_GE(best.distance, kDeskMinimalL1);
  EXPECT_LE(best.distance, kDeskMinimalL1 * 1.1);
  EXPECT_EQ(best.result.label, SeverityClass::kHigh);
}

TEST(RecourseTest, DeskModelNearMinimalTwoFeatures) {
  const auto model = DeskModel();
  const auto space = DeskSpace();
  const auto result = GenerateRecourse(model, space, DeskRequest(2));
  ASSERT_FALSE(result.suggestions.empty());
  EXPECT_LE(result.suggestions.front().distance, kDeskMinimalL1 * 1.1);
  for (const auto& s : result.suggestions) {
    EXPECT_TRUE(ValidateRecourse(model, space.schema(), DeskRequest(2), s).ok());
  }
}

TEST(RecourseTest, AlreadyAtDesired) {
  const auto model = DeskModel();
  auto request = DeskRequest(1);
  request.desired = SeverityClass::kLow;
  const auto result = GenerateRecourse(model, DeskSpace(), request);
  EXPECT_EQ(result.status, RecourseStatus::kAlreadyAtDesired);
  ASSERT_EQ(result.suggestions.size(), 1u);
  EXPECT_TRUE(result.suggestions[0].changes.empty());
  EXPECT_EQ(result.ToJson()["status"], "already_at_desired");
}

TEST(RecourseTest, UnreachableClassReportsNoRecourse) {
  const auto model = testing::ConstantModel(2, SeverityClass::kLow);
  const auto result = GenerateRecourse(model, DeskSpace(), DeskRequest(2));
  EXPECT_EQ(result.status, RecourseStatus::kNoRecourseFound);
  EXPECT_TRUE(result.suggestions.empty());
}

TEST(RecourseTest, ImmutableFeaturesAreHonoured) {
  const auto model = DeskModel();
  auto request = DeskRequest(2);
  request.immutable = {"x1"};
  const auto result = GenerateRecourse(model, DeskSpace(), request);
  ASSERT_FALSE(result.suggestions.empty());
  for (const auto& s : result.suggestions) {
    for (const auto& c : s.changes) EXPECT_EQ(c.name, "x2");
  }
  request.immutable = {"x1", "x2"};
  EXPECT_THROW(GenerateRecourse(model, DeskSpace(), request), ConstraintError);
  request.immutable = {"x9"};
  EXPECT_THROW(GenerateRecourse(model, DeskSpace(), request), ValidationError);
}

TEST(RecourseTest, RejectsMalformedRequests) {
  const auto model = DeskModel();
  auto request = DeskRequest(0);
  EXPECT_THROW(GenerateRecourse(model, DeskSpace(), request), ValidationError);
  request = DeskRequest(1);
  request.num_suggestions = 0;
  EXPECT_THROW(GenerateRecourse(model, DeskSpace(), request), ValidationError);
  request = DeskRequest(1);
  request.features = {1.0};
  EXPECT_THROW(GenerateRecourse(model, DeskSpace(), request), ValidationError);
  RecourseSearchConfig bad;
  bad.population = 1;
  EXPECT_THROW(GenerateRecourse(model, DeskSpace(), DeskRequest(1), bad), ConfigError);
}

class SyntheticRecourseTest : public ::testing::Test {
 protected:
  const DatasetTable& table = testing::SmallSynthetic().table;
  FeatureSpace space = FeatureSpace::FromTable(table);
  ClassifierModel classifier{testing::SmallClassifier()};
  const ClassifierModel* model = &classifier;
  RecourseSearchConfig search{60, 15, 30};

  RecourseRequest RandomRequest(std::mt19937_64& rng) const {
    RecourseRequest request;
    const auto row = table.features(rng() % table.size());
    request.features.assign(row.begin(), row.end());
    const auto current = model->Predict(request.features).label;
    const int shift = 1 + static_cast<int>(rng() % 2);
    request.desired = static_cast<SeverityClass>((static_cast<int>(current) + shift) % 3);
    request.max_features = 1 + static_cast<int>(rng() % 5);
    request.num_suggestions = 1 + static_cast<int>(rng() % 3);
    request.seed = rng();
    return request;
  }
};

TEST_F(SyntheticRecourseTest, SuggestionsSatisfyContract) {
  std::mt19937_64 rng(23);
  int found = 0;
  for (int trial = 0; trial < 15; ++trial) {
    const auto request = RandomRequest(rng);
    const auto result = GenerateRecourse(*model, space, request, search);
    EXPECT_LE(result.suggestions.size(), static_cast<std::size_t>(request.num_suggestions));
    std::set<std::vector<std::pair<std::size_t, double>>> deltas;
    for (const auto& s : result.suggestions) {
      const auto verdict = ValidateRecourse(*model, space.schema(), request, s);
      EXPECT_TRUE(verdict.ok()) << verdict.ToJson().dump();
      EXPECT_LE(s.changes.size(), static_cast<std::size_t>(request.max_features));
      EXPECT_FALSE(s.changes.empty());
      std::vector<std::pair<std::size_t, double>> delta;
      for (const auto& c : s.changes) {
        EXPECT_GE(c.to, 0.0);
        EXPECT_EQ(c.from, request.features[c.feature]);
        delta.emplace_back(c.feature, c.to);
      }
      EXPECT_TRUE(deltas.insert(delta).second) << "duplicate suggestion";
    }
    if (result.status == RecourseStatus::kOk) ++found;
  }
  EXPECT_GT(found, 0);
}

TEST_F(SyntheticRecourseTest, DeterministicPerSeed) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 3; ++trial) {
    const auto request = RandomRequest(rng);
    const auto a = GenerateRecourse(*model, space, request, search);
    const auto b = GenerateRecourse(*model, space, request, search);
    EXPECT_EQ(a.ToJson(), b.ToJson());
  }
}

TEST_F(SyntheticRecourseTest, JsonRoundTrip) {
  std::mt19937_64 rng(8);
  const auto request = RandomRequest(rng);
  const auto result = GenerateRecourse(*model, space, request, search);
  for (const auto& s : result.suggestions) {
    const auto back = RecourseSuggestion::FromJson(s.ToJson(request.seed), space.schema());
    EXPECT_EQ(back.changes, s.changes);
    EXPECT_EQ(back.result.label, s.result.label);
    EXPECT_EQ(back.distance, s.distance);
  }
  EXPECT_THROW(RecourseSuggestion::FromJson({{"changes", 3}}, space.schema()),
               ValidationError);
}

TEST(ValidateRecourseTest, FlagsEachViolation) {
  const auto model = DeskModel();
  const auto schema = DeskSchema(2);
  const auto request = DeskRequest(1);

  RecourseSuggestion ok;
  ok.changes = {{0, "x1", 3.0, 8.0}};
  EXPECT_TRUE(ValidateRecourse(model, schema, request, ok).ok());

  RecourseSuggestion too_many;
  too_many.changes = {{0, "x1", 3.0, 6.0}, {1, "x2", 3.0, 6.0}};
  const auto budget = ValidateRecourse(model, schema, request, too_many);
  EXPECT_FALSE(budget.within_budget);
  EXPECT_TRUE(budget.reaches_desired);

  RecourseSuggestion negative;
  negative.changes = {{0, "x1", 3.0, -20.0}};
  const auto neg = ValidateRecourse(model, schema, request, negative);
  EXPECT_FALSE(neg.nonnegative);
  EXPECT_FALSE(neg.reaches_desired);

  RecourseSuggestion short_of_boundary;
  short_of_boundary.changes = {{0, "x1", 3.0, 7.0}};
  EXPECT_FALSE(ValidateRecourse(model, schema, request, short_of_boundary).reaches_desired);

  auto frozen = request;
  frozen.immutable = {"x1"};
  EXPECT_FALSE(ValidateRecourse(model, schema, frozen, ok).respects_immutable);

  RecourseSuggestion wrong_from;
  wrong_from.changes = {{0, "x1", 4.0, 8.0}};
  EXPECT_FALSE(ValidateRecourse(model, schema, request, wrong_from).well_formed);

  RecourseSuggestion duplicate;
  duplicate.changes = {{0, "x1", 3.0, 8.0}, {0, "x1", 3.0, 9.0}};
  const auto dup = ValidateRecourse(model, schema, request, duplicate);
  EXPECT_FALSE(dup.well_formed);
  EXPECT_FALSE(dup.failures.empty());
}

}  // namespace
}  // namespace sitrep
