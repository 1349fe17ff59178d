#include <algorithm>
#include <vector>

#include "cpc/metrics.hpp"

namespace cpc::metrics {

std::size_t levenshtein(std::u32string_view a, std::u32string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  if (b.empty()) return a.size();
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({up + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
  return levenshtein(std::u32string_view(to_scalars(a)), std::u32string_view(to_scalars(b)));
}

// Sellers' variant: free start and end in the haystack.
std::size_t substring_distance(std::u32string_view needle, std::u32string_view haystack) {
  std::vector<std::size_t> row(haystack.size() + 1, 0);
  for (std::size_t i = 1; i <= needle.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= haystack.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({up + 1, row[j - 1] + 1, diag + (needle[i - 1] == haystack[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return *std::min_element(row.begin(), row.end());
}

double anls_similarity(std::string_view a, std::string_view b) {
  const std::u32string na = to_scalars(normalize(a));
  const std::u32string nb = to_scalars(normalize(b));
  const std::size_t longest = std::max(na.size(), nb.size());
  if (longest == 0) return 1.0;
  return 1.0 - static_cast<double>(levenshtein(na, nb)) / static_cast<double>(longest);
}

}  // namespace cpc::metrics
