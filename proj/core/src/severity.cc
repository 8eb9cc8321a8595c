#include "sitrep/severity.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "sitrep/error.h"

namespace sitrep {

SeverityClass BucketSeverity(double damage_dollars) {
  if (!std::isfinite(damage_dollars)) {
    throw ValidationError("damage_dollars must be finite", "damage_dollars");
  }
  if (damage_dollars < 0.0) {
    throw ValidationError("damage_dollars must be nonnegative, got " +
                              std::to_string(damage_dollars),
                          "damage_dollars");
  }
  if (damage_dollars < kMediumDamageThreshold) return SeverityClass::kLow;
  if (damage_dollars < kHighDamageThreshold) return SeverityClass::kMedium;
  return SeverityClass::kHigh;
}

SeverityClass ClassFromIndex(int index) {
  if (index < 0 || index >= kNumSeverityClasses) {
    throw ValidationError("severity class index out of range: " +
                          std::to_string(index));
  }
  return static_cast<SeverityClass>(index);
}

std::string_view SeverityName(SeverityClass c) {
  switch (c) {
    case SeverityClass::kLow:
      return "Low";
    case SeverityClass::kMedium:
      return "Medium";
    case SeverityClass::kHigh:
      return "High";
  }
  return "Unknown";
}

SeverityClass ParseSeverity(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char ch) { return std::tolower(ch); });
  if (lower == "low") return SeverityClass::kLow;
  if (lower == "medium") return SeverityClass::kMedium;
  if (lower == "high") return SeverityClass::kHigh;
  throw ValidationError("unknown severity class '" + std::string(text) +
                            "' (expected Low, Medium or High)",
                        "desired");
}

}  // namespace sitrep
