#pragma once

#include <string_view>

namespace pankit {

/// Diagnostic sink for recoverable conditions; writes to stderr unless silenced.
void warn(std::string_view message);
void set_warnings_enabled(bool enabled);

} // namespace pankit
