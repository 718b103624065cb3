#pragma once

#include <string_view>

namespace bellkit {

/// Release version with the git-describe suffix of the build tree.
std::string_view version() noexcept;

}  // namespace bellkit
