#pragma once

#include <spdlog/spdlog.h>

namespace hdae {

/// Library logger writing to stderr; level from HYBRID_DAE_LOG
/// (trace, debug, info, warn, error, off). Defaults to warn.
spdlog::logger& log();

} // namespace hdae
