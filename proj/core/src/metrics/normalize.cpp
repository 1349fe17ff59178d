#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <string>

#include "cpc/error.hpp"
#include "cpc/metrics.hpp"

namespace cpc::metrics {
namespace {

bool is_ascii(std::string_view s) {
  for (unsigned char c : s) {
    if (c >= 0x80) return false;
  }
  return true;
}

bool is_ascii_space(unsigned char c) { return c == ' ' || (c >= 0x09 && c <= 0x0d); }

// Collapses whitespace runs into one ASCII space and trims both ends.
template <typename IsSpace>
std::string collapse(std::string_view in, IsSpace is_space_at) {
  std::string out;
  out.reserve(in.size());
  bool pending_space = false;
  std::size_t i = 0;
  while (i < in.size()) {
    std::size_t len = 0;
    if (is_space_at(in, i, len)) {
      pending_space = !out.empty();
      i += len;
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.append(in.substr(i, len));
    i += len;
  }
  return out;
}

std::string normalize_ascii(std::string_view s) {
  std::string lowered(s);
  for (char& c : lowered) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return collapse(lowered, [](std::string_view str, std::size_t i, std::size_t& len) {
    len = 1;
    return is_ascii_space(static_cast<unsigned char>(str[i]));
  });
}

std::string normalize_unicode(std::string_view s) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfkc_cf = icu::Normalizer2::getNFKCCasefoldInstance(status);
  if (U_FAILURE(status)) throw Error(std::string("ICU NFKC_Casefold unavailable: ") + u_errorName(status));

  const auto input = icu::UnicodeString::fromUTF8(icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
  icu::UnicodeString folded = nfkc_cf->normalize(input, status);
  if (U_FAILURE(status)) throw Error(std::string("ICU normalization failed: ") + u_errorName(status));

  std::string utf8;
  folded.toUTF8String(utf8);
  return collapse(utf8, [](std::string_view str, std::size_t i, std::size_t& len) {
    int32_t off = static_cast<int32_t>(i);
    UChar32 c = 0;
    U8_NEXT(reinterpret_cast<const uint8_t*>(str.data()), off, static_cast<int32_t>(str.size()), c);
    len = static_cast<std::size_t>(off) - i;
    return c >= 0 && u_isUWhiteSpace(c);
  });
}

}  // namespace

// NFKC_Casefold is NFKC plus full case folding (and removal of default
// ignorables), and is idempotent by construction.
std::string normalize(std::string_view s) {
  if (is_ascii(s)) return normalize_ascii(s);
  return normalize_unicode(s);
}

std::u32string to_scalars(std::string_view utf8) {
  std::u32string out;
  out.reserve(utf8.size());
  const auto* bytes = reinterpret_cast<const uint8_t*>(utf8.data());
  const auto n = static_cast<int32_t>(utf8.size());
  int32_t i = 0;
  while (i < n) {
    UChar32 c = 0;
    U8_NEXT(bytes, i, n, c);
    out.push_back(c < 0 ? U'�' : static_cast<char32_t>(c));
  }
  return out;
}

namespace detail {
// Exposed for the ASCII fast-path equivalence test.
std::string normalize_via_icu(std::string_view s) { return normalize_unicode(s); }
}  // namespace detail

}  // namespace cpc::metrics
