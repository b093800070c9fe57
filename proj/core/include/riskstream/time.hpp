#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace riskstream {

// All stream time is an integer number of seconds on the simulation clock.
// Integer seconds keep replay deterministic and window boundaries exact.

struct Duration {
  std::int64_t seconds{0};
  constexpr auto operator<=>(const Duration&) const = default;
};

struct Timestamp {
  std::int64_t seconds{0};
  constexpr auto operator<=>(const Timestamp&) const = default;
};

constexpr Duration operator+(Duration a, Duration b) { return {a.seconds + b.seconds}; }
constexpr Duration operator-(Duration a, Duration b) { return {a.seconds - b.seconds}; }
constexpr Duration operator*(Duration d, std::int64_t k) { return {d.seconds * k}; }
constexpr Timestamp operator+(Timestamp t, Duration d) { return {t.seconds + d.seconds}; }
constexpr Timestamp operator-(Timestamp t, Duration d) { return {t.seconds - d.seconds}; }
constexpr Duration operator-(Timestamp a, Timestamp b) { return {a.seconds - b.seconds}; }

constexpr Duration seconds(std::int64_t n) { return {n}; }
constexpr Duration minutes(std::int64_t n) { return {n * 60}; }
constexpr Duration hours(std::int64_t n) { return {n * 3600}; }
constexpr Duration days(std::int64_t n) { return {n * 86400}; }
constexpr Duration weeks(std::int64_t n) { return {n * 7 * 86400}; }

// Parses "30s", "10m", "3h", "14d", "4w". A bare integer means seconds.
Duration parse_duration(const std::string& text);

// Renders a duration in the largest unit that divides it evenly ("4w", "90m").
std::string format_duration(Duration d);

}  // namespace riskstream
