#pragma once

#include <string_view>

namespace pbrc {

/// Writes "warning: <message>" to stderr unless warnings are silenced.
void log_warning(std::string_view message);
void set_warnings_enabled(bool enabled);

}  // namespace pbrc
