#include <map>

#include "cpc/error.hpp"
#include "cpc/ftgen.hpp"

namespace cpc::ftgen {
namespace {

// Single pass, so substituted values are never expanded again.
std::string expand(std::string_view tmpl, const std::map<std::string_view, std::string_view>& values) {
  std::string out;
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      const auto close = tmpl.find('}', i);
      if (close != std::string_view::npos) {
        const auto it = values.find(tmpl.substr(i + 1, close - i - 1));
        if (it != values.end()) {
          out.append(it->second);
          i = close + 1;
          continue;
        }
      }
    }
    out.push_back(tmpl[i++]);
  }
  return out;
}

}  // namespace

Sample make_connector_positive(std::string_view question, std::string_view cognitive, std::string_view perceptual,
                               const ConnectorTemplates& t) {
  if (question.empty() || cognitive.empty() || perceptual.empty()) throw EmptyAnswer();
  return {expand(t.query, {{"Q", question}, {"y", cognitive}}),
          expand(t.positive, {{"y_P", perceptual}, {"y_C", cognitive}})};
}

Sample make_connector_negative(std::string_view question, std::string_view cognitive, std::string_view perceptual,
                               std::string_view negative, const ConnectorTemplates& t) {
  if (question.empty() || cognitive.empty() || perceptual.empty() || negative.empty()) throw EmptyAnswer();
  if (negative == cognitive) throw NegEqualsPositive();
  return {expand(t.query, {{"Q", question}, {"y", negative}}),
          expand(t.negative, {{"y_P", perceptual}, {"y_neg", negative}, {"y_C", cognitive}})};
}

}  // namespace cpc::ftgen
