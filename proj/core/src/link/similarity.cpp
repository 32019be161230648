#include "groundsql/link/similarity.hpp"

#include <algorithm>
#include <vector>

#include "groundsql/sql/schema.hpp"
#include "groundsql/util/utf8.hpp"

namespace groundsql::link {

std::size_t levenshtein(std::string_view a, std::string_view b) {
  const std::u32string x = util::decode(a);
  const std::u32string y = util::decode(b);
  std::vector<std::size_t> row(y.size() + 1);
  for (std::size_t j = 0; j <= y.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= x.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= y.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (x[i - 1] == y[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[y.size()];
}

double similarity(std::string_view a, std::string_view b) {
  const std::string na = sql::normalize_identifier(a);
  const std::string nb = sql::normalize_identifier(b);
  const std::size_t longest = std::max(util::codepoint_count(na), util::codepoint_count(nb));
  if (longest == 0) return 1.0;
  return 1.0 - static_cast<double>(levenshtein(na, nb)) / static_cast<double>(longest);
}

}  // namespace groundsql::link
