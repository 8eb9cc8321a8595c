#include "sitrep/dataset.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <utility>

#include "sitrep/error.h"

namespace sitrep {

namespace {

constexpr std::string_view kFipsColumn = "fips";
constexpr std::string_view kEventColumn = "event_id";
constexpr std::string_view kDamageColumn = "damage_dollars";

std::vector<std::string> SplitCsvLine(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cell.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cell.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
    } else {
      cell.push_back(c);
    }
  }
  cells.push_back(std::move(cell));
  return cells;
}

std::optional<double> ParseNumber(std::string_view text) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    return std::nullopt;
  }
  return value;
}

}  // namespace

bool IsValidFips(std::string_view fips) {
  return fips.size() == 5 &&
         std::all_of(fips.begin(), fips.end(),
                     [](char c) { return c >= '0' && c <= '9'; });
}

std::string FormatDouble(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

DatasetTable::DatasetTable(FeatureSchema schema,
                           std::vector<CountyRecord> records)
    : schema_(std::move(schema)), records_(std::move(records)) {
  std::set<std::pair<std::string, std::string>> keys;
  labels_.reserve(records_.size());
  for (std::size_t row = 0; row < records_.size(); ++row) {
    const auto& r = records_[row];
    if (!IsValidFips(r.fips)) {
      throw ValidationError("record " + std::to_string(row) +
                                ": malformed fips '" + r.fips +
                                "' (expected 5 digits)",
                            "fips", row);
    }
    if (r.event_id.empty()) {
      throw ValidationError("record " + std::to_string(row) + ": empty event_id",
                            "event_id", row);
    }
    if (!keys.emplace(r.fips, r.event_id).second) {
      throw ValidationError("record " + std::to_string(row) +
                                ": duplicate (fips, event_id) = (" + r.fips +
                                ", " + r.event_id + ")",
                            "fips", row);
    }
    if (r.features.size() != schema_.size()) {
      throw ValidationError("record " + std::to_string(row) + " has " +
                                std::to_string(r.features.size()) +
                                " features, schema has " +
                                std::to_string(schema_.size()),
                            std::nullopt, row);
    }
    for (std::size_t j = 0; j < r.features.size(); ++j) {
      const double v = r.features[j];
      if (!std::isfinite(v) || v < 0.0) {
        throw ValidationError("record " + std::to_string(row) + ": feature " +
                                  schema_.feature(j).name +
                                  " must be finite and >= 0, got " +
                                  FormatDouble(v),
                              schema_.feature(j).name, row);
      }
    }
    if (r.damage_dollars) {
      try {
        labels_.emplace_back(BucketSeverity(*r.damage_dollars));
      } catch (const ValidationError& e) {
        throw ValidationError("record " + std::to_string(row) + ": " + e.what(),
                              std::string(kDamageColumn), row);
      }
    } else {
      labels_.emplace_back(std::nullopt);
    }
  }
}

bool DatasetTable::fully_labeled() const {
  return std::all_of(labels_.begin(), labels_.end(),
                     [](const auto& l) { return l.has_value(); });
}

std::array<std::size_t, 3> DatasetTable::ClassCounts() const {
  std::array<std::size_t, 3> counts{};
  for (const auto& l : labels_) {
    if (l) ++counts[ClassIndex(*l)];
  }
  return counts;
}

std::optional<std::size_t> DatasetTable::Find(std::string_view fips,
                                              std::string_view event_id) const {
  for (std::size_t i = 0; i < records_.size(); ++i) {
    if (records_[i].fips == fips && records_[i].event_id == event_id) return i;
  }
  return std::nullopt;
}

std::vector<std::size_t> DatasetTable::RecordsForEvent(
    std::string_view event_id) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < records_.size(); ++i) {
    if (records_[i].event_id == event_id) out.push_back(i);
  }
  return out;
}

std::vector<std::string> DatasetTable::Events() const {
  std::set<std::string> events;
  for (const auto& r : records_) events.insert(r.event_id);
  return {events.begin(), events.end()};
}

DatasetTable DatasetTable::Subset(std::span<const std::size_t> indices) const {
  std::vector<CountyRecord> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(records_.at(i));
  return DatasetTable(schema_, std::move(out));
}

DatasetTable ParseDataset(std::istream& in, const FeatureSchema& schema,
                          const std::string& source_name) {
  std::string line;
  if (!std::getline(in, line)) {
    throw ValidationError(source_name + ": missing header row");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = SplitCsvLine(line);

  std::map<std::string, std::size_t> column;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (!column.emplace(header[c], c).second) {
      throw ValidationError(source_name + ": duplicate column '" + header[c] + "'",
                            header[c]);
    }
  }
  auto require = [&](std::string_view name) {
    auto it = column.find(std::string(name));
    if (it == column.end()) {
      throw ValidationError(
          source_name + ": missing column '" + std::string(name) + "'",
          std::string(name));
    }
    return it->second;
  };
  const std::size_t fips_col = require(kFipsColumn);
  const std::size_t event_col = require(kEventColumn);
  std::vector<std::size_t> feature_cols;
  feature_cols.reserve(schema.size());
  for (const auto& f : schema.features()) feature_cols.push_back(require(f.name));
  std::optional<std::size_t> damage_col;
  if (auto it = column.find(std::string(kDamageColumn)); it != column.end()) {
    damage_col = it->second;
  }
  const std::size_t known = 2 + schema.size() + (damage_col ? 1 : 0);
  if (known != header.size()) {
    for (const auto& name : header) {
      if (name != kFipsColumn && name != kEventColumn && name != kDamageColumn &&
          !schema.Find(name)) {
        throw ValidationError(source_name + ": unknown column '" + name + "'",
                              name);
      }
    }
  }

  std::vector<CountyRecord> records;
  std::set<std::pair<std::string, std::string>> seen;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::size_t row = records.size();
    const std::string where = source_name + ":" + std::to_string(line_no);
    auto cells = SplitCsvLine(line);
    if (cells.size() != header.size()) {
      throw ValidationError(where + ": expected " + std::to_string(header.size()) +
                                " cells, found " + std::to_string(cells.size()),
                            std::nullopt, row);
    }
    CountyRecord r;
    r.fips = cells[fips_col];
    r.event_id = cells[event_col];
    if (!IsValidFips(r.fips)) {
      throw ValidationError(where + ": malformed fips '" + r.fips + "'", "fips",
                            row);
    }
    r.features.reserve(schema.size());
    for (std::size_t j = 0; j < feature_cols.size(); ++j) {
      const auto& name = schema.feature(j).name;
      auto v = ParseNumber(cells[feature_cols[j]]);
      if (!v) {
        throw ValidationError(where + ": column " + name + " is not a number ('" +
                                  cells[feature_cols[j]] + "')",
                              name, row);
      }
      if (!std::isfinite(*v) || *v < 0.0) {
        throw ValidationError(where + ": column " + name +
                                  " must be finite and >= 0, got " +
                                  cells[feature_cols[j]],
                              name, row);
      }
      r.features.push_back(*v);
    }
    if (damage_col && !cells[*damage_col].empty()) {
      auto v = ParseNumber(cells[*damage_col]);
      if (!v) {
        throw ValidationError(where + ": column damage_dollars is not a number",
                              std::string(kDamageColumn), row);
      }
      if (!std::isfinite(*v) || *v < 0.0) {
        throw ValidationError(where + ": column damage_dollars must be finite "
                                  "and >= 0, got " + cells[*damage_col],
                              std::string(kDamageColumn), row);
      }
      r.damage_dollars = *v;
    }
    if (!seen.emplace(r.fips, r.event_id).second) {
      throw ValidationError(where + ": duplicate (fips, event_id) = (" + r.fips +
                                ", " + r.event_id + ")",
                            "fips", row);
    }
    records.push_back(std::move(r));
  }
  return DatasetTable(schema, std::move(records));
}

DatasetTable LoadDataset(const std::string& path, const FeatureSchema& schema) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open dataset '" + path + "'");
  return ParseDataset(in, schema, path);
}

void WriteDataset(const DatasetTable& table, std::ostream& out) {
  out << kFipsColumn << ',' << kEventColumn;
  for (const auto& f : table.schema().features()) out << ',' << f.name;
  out << ',' << kDamageColumn << '\n';
  for (const auto& r : table.records()) {
    out << r.fips << ',' << r.event_id;
    for (double v : r.features) out << ',' << FormatDouble(v);
    out << ',';
    if (r.damage_dollars) out << FormatDouble(*r.damage_dollars);
    out << '\n';
  }
}

void SaveDataset(const DatasetTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write dataset '" + path + "'");
  WriteDataset(table, out);
}

}  // namespace sitrep
