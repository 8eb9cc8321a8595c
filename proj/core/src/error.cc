#include "sitrep/error.h"

#include <utility>

namespace sitrep {

ValidationError::ValidationError(const std::string& message,
                                 std::optional<std::string> field,
                                 std::optional<std::size_t> row)
    : Error(message), field_(std::move(field)), row_(row) {}

}  // namespace sitrep
