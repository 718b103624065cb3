#include "bellkit/version.hpp"

#ifndef BELLKIT_VERSION
#define BELLKIT_VERSION "0.0.0+unknown"
#endif

namespace bellkit {

std::string_view version() noexcept { return BELLKIT_VERSION; }

}  // namespace bellkit
