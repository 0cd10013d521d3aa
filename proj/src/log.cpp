#include "pbrc/log.hpp"

#include <atomic>
#include <iostream>

namespace pbrc {

namespace {
std::atomic<bool> g_warnings_enabled{true};
}

void log_warning(std::string_view message) {
    if (g_warnings_enabled.load(std::memory_order_relaxed)) {
        std::cerr << "warning: " << message << '\n';
    }
}

void set_warnings_enabled(bool enabled) {
    g_warnings_enabled.store(enabled, std::memory_order_relaxed);
}

}  // namespace pbrc
