#pragma once

#include <functional>
#include <string_view>

namespace seqloc {

using WarningHandler = std::function<void(std::string_view)>;

/// Replaces the process-wide warning handler and returns the previous one.
/// Passing an empty handler restores the default (stderr, repeated messages
/// collapsed after a few occurrences).
WarningHandler set_warning_handler(WarningHandler handler);

/// Thread-safe.
void warn(std::string_view message);

}  // namespace seqloc
