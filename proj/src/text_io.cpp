#include "text_io.hpp"

#include <charconv>
#include <cstdlib>

namespace iamod::detail {

double parse_double(std::string_view text, std::string_view what) {
  const std::string s(trim(text));
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size())
    throw Error(ErrorCode::ParseError, "bad number '" + s + "' for " + std::string(what));
  return v;
}

long long parse_int(std::string_view text, std::string_view what) {
  const auto s = trim(text);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
    throw Error(ErrorCode::ParseError,
                "bad integer '" + std::string(s) + "' for " + std::string(what));
  return v;
}

}  // namespace iamod::detail
