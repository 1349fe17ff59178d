#include "cpc/error.hpp"

namespace cpc {

MalformedRecord::MalformedRecord(std::size_t line, const std::string& reason)
    : Error("malformed record at line " + std::to_string(line) + ": " + reason),
      line_(line),
      reason_(reason) {}

}  // namespace cpc
