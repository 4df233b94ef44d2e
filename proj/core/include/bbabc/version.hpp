#pragma once

#include <string_view>

namespace bbabc {

// Project version plus `git describe` output captured at configure time.
std::string_view version() noexcept;

}  // namespace bbabc
