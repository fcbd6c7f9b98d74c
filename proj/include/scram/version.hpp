#pragma once

#include <compare>
#include <string_view>

namespace scram {

/// Componentwise integer comparison of dotted versions ("2.1" > "2.0",
/// "10.0" > "9.0"). Missing trailing components count as zero, so "2" == "2.0".
/// Throws Error if either side is not `\d+(\.\d+)*`.
std::strong_ordering compare_dotted(std::string_view a, std::string_view b);

bool is_dotted_version(std::string_view v);

} // namespace scram
