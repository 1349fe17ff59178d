#include <spdlog/spdlog.h>

#include "cpc/error.hpp"
#include "cpc/ftgen.hpp"

namespace cpc::ftgen {

std::string wrap_link_tokens(std::string_view answer) {
  if (answer.empty()) throw EmptyAnswer();
  std::string out;
  out.reserve(answer.size() + kLinkOpen.size() + kLinkClose.size());
  out.append(kLinkOpen).append(answer).append(kLinkClose);
  return out;
}

std::vector<LinkSpan> parse_link_spans(std::string_view response) {
  std::vector<LinkSpan> spans;
  std::size_t pos = 0;
  std::size_t open_at = std::string_view::npos;  // payload start of the open span
  while (pos < response.size()) {
    const auto next_open = response.find(kLinkOpen, pos);
    const auto next_close = response.find(kLinkClose, pos);
    if (next_open == std::string_view::npos && next_close == std::string_view::npos) break;
    if (next_open < next_close) {
      if (open_at != std::string_view::npos) {
        throw MalformedLinks("nested " + std::string(kLinkOpen) + " at byte " + std::to_string(next_open));
      }
      open_at = next_open + kLinkOpen.size();
      pos = open_at;
    } else {
      if (open_at == std::string_view::npos) {
        throw MalformedLinks("stray " + std::string(kLinkClose) + " at byte " + std::to_string(next_close));
      }
      if (next_close == open_at) throw MalformedLinks("empty span at byte " + std::to_string(open_at));
      spans.push_back({std::string(response.substr(open_at, next_close - open_at)), open_at, next_close});
      open_at = std::string_view::npos;
      pos = next_close + kLinkClose.size();
    }
  }
  if (open_at != std::string_view::npos) {
    throw MalformedLinks("unclosed " + std::string(kLinkOpen) + " at byte " +
                         std::to_string(open_at - kLinkOpen.size()));
  }
  return spans;
}

AugmentResult augment_cognitive_query(std::string_view question) {
  if (question.find(kLinkInstruction) != std::string_view::npos) throw AlreadyAugmented();
  AugmentResult r;
  if (question.empty()) {
    spdlog::warn("augmenting an empty question");
    r.query = std::string(kLinkInstruction);
    r.warned_empty = true;
    return r;
  }
  r.query.append(question).append("\n").append(kLinkInstruction);
  return r;
}

}  // namespace cpc::ftgen
