#ifndef SITREP_DATASET_H_
#define SITREP_DATASET_H_

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sitrep/schema.h"
#include "sitrep/severity.h"

namespace sitrep {

// One (county, event) observation. `features` is aligned to the schema.
struct CountyRecord {
  std::string fips;
  std::string event_id;
  std::vector<double> features;
  std::optional<double> damage_dollars;

  friend bool operator==(const CountyRecord&, const CountyRecord&) = default;
};

// True for exactly five ASCII digits.
bool IsValidFips(std::string_view fips);

// Records sharing one schema. Labels are derived from damage_dollars.
class DatasetTable {
 public:
  DatasetTable() = default;
  // Validates every record: schema width, finite nonnegative values, fips
  // format, unique (fips, event_id). Throws ValidationError with the record
  // index as row.
  DatasetTable(FeatureSchema schema, std::vector<CountyRecord> records);

  const FeatureSchema& schema() const { return schema_; }
  const std::vector<CountyRecord>& records() const { return records_; }
  const CountyRecord& record(std::size_t i) const { return records_[i]; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  std::span<const double> features(std::size_t i) const {
    return records_[i].features;
  }
  const std::optional<SeverityClass>& label(std::size_t i) const {
    return labels_[i];
  }
  // True when every record carries damage_dollars.
  bool fully_labeled() const;
  std::array<std::size_t, 3> ClassCounts() const;

  std::optional<std::size_t> Find(std::string_view fips,
                                  std::string_view event_id) const;
  std::vector<std::size_t> RecordsForEvent(std::string_view event_id) const;
  std::vector<std::string> Events() const;

  DatasetTable Subset(std::span<const std::size_t> indices) const;

  friend bool operator==(const DatasetTable& a, const DatasetTable& b) {
    return a.schema_ == b.schema_ && a.records_ == b.records_;
  }

 private:
  FeatureSchema schema_;
  std::vector<CountyRecord> records_;
  std::vector<std::optional<SeverityClass>> labels_;
};

// CSV with header `fips,event_id,<schema features>[,damage_dollars]`. Columns
// are matched by name. Errors carry `<source>:<line>` and the column name.
DatasetTable ParseDataset(std::istream& in, const FeatureSchema& schema,
                          const std::string& source_name = "<input>");
DatasetTable LoadDataset(const std::string& path, const FeatureSchema& schema);

// Writes schema order with shortest round-trip number formatting.
void WriteDataset(const DatasetTable& table, std::ostream& out);
void SaveDataset(const DatasetTable& table, const std::string& path);

// Shortest decimal text that parses back to exactly `value`.
std::string FormatDouble(double value);

}  // namespace sitrep

#endif  // SITREP_DATASET_H_
