#include "riskstream/time.hpp"

#include <charconv>

#include "riskstream/errors.hpp"

namespace riskstream {

Duration parse_duration(const std::string& text) {
  if (text.empty()) throw ConfigError("empty duration");
  std::int64_t value = 0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr == first) throw ConfigError("bad duration: " + text);
  if (ptr == last) return seconds(value);
  if (ptr + 1 != last) throw ConfigError("bad duration: " + text);
  switch (*ptr) {
    case 's': return seconds(value);
    case 'm': return minutes(value);
    case 'h': return hours(value);
    case 'd': return days(value);
    case 'w': return weeks(value);
    default: throw ConfigError("bad duration unit in: " + text);
  }
}

std::string format_duration(Duration d) {
  struct Unit { std::int64_t size; char suffix; };
  constexpr Unit units[] = {{7 * 86400, 'w'}, {86400, 'd'}, {3600, 'h'}, {60, 'm'}, {1, 's'}};
  for (const auto& u : units) {
    if (d.seconds % u.size == 0 && (d.seconds != 0 || u.suffix == 's')) {
      return std::to_string(d.seconds / u.size) + u.suffix;
    }
  }
  return std::to_string(d.seconds) + 's';
}

}  // namespace riskstream
