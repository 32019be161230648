#pragma once

#include <cstddef>
#include <string_view>

namespace groundsql::link {

/// Edit distance over code points (unit-cost insert, delete, substitute).
std::size_t levenshtein(std::string_view a, std::string_view b);

/// 1 - lev(norm(a), norm(b)) / max(|norm(a)|, |norm(b)|), where norm is the
/// identifier normal form. Two empty strings have similarity 1.
double similarity(std::string_view a, std::string_view b);

inline constexpr double kDefaultMinSimilarity = 0.8;

}  // namespace groundsql::link
