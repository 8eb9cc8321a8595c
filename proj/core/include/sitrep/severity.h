#ifndef SITREP_SEVERITY_H_
#define SITREP_SEVERITY_H_

#include <array>
#include <string>
#include <string_view>

namespace sitrep {

// Property-damage severity buckets, ordered Low < Medium < High.
enum class SeverityClass : int { kLow = 0, kMedium = 1, kHigh = 2 };

inline constexpr int kNumSeverityClasses = 3;
inline constexpr std::array<SeverityClass, 3> kAllSeverityClasses = {
    SeverityClass::kLow, SeverityClass::kMedium, SeverityClass::kHigh};

// Damage thresholds in dollars. Each boundary belongs to the upper bucket.
inline constexpr double kMediumDamageThreshold = 10'000.0;
inline constexpr double kHighDamageThreshold = 100'000.0;

// Throws ValidationError for negative or non-finite input.
SeverityClass BucketSeverity(double damage_dollars);

inline int ClassIndex(SeverityClass c) { return static_cast<int>(c); }
SeverityClass ClassFromIndex(int index);

// "Low", "Medium", "High".
std::string_view SeverityName(SeverityClass c);

// Case-insensitive parse of the names above. Throws ValidationError.
SeverityClass ParseSeverity(std::string_view text);

}  // namespace sitrep

#endif  // SITREP_SEVERITY_H_
