#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "mba/errors.hpp"

namespace mba {

// All decimal output in this library rounds half-up at the stated number
// of decimals. Percentages of integer counts go through the exact integer
// path below so printed tables are reproducible bit for bit.

namespace detail {

inline std::string scaled_to_string(std::uint64_t scaled, int decimals) {
  std::string digits = std::to_string(scaled);
  if (decimals == 0) return digits;
  if (digits.size() <= static_cast<std::size_t>(decimals))
    digits.insert(0, static_cast<std::size_t>(decimals) + 1 - digits.size(),
                  '0');
  digits.insert(digits.size() - static_cast<std::size_t>(decimals), 1, '.');
  return digits;
}

}  // namespace detail

/// Half-up rendering of 100 * numer / denom with `decimals` places,
/// computed exactly in integers.
inline std::string render_percent(std::uint64_t numer, std::uint64_t denom,
                                  int decimals) {
  if (denom == 0) throw Error::config("render_percent: zero denominator");
  unsigned __int128 scale = 100;
  for (int i = 0; i < decimals; ++i) scale *= 10;
  unsigned __int128 q = static_cast<unsigned __int128>(numer) * scale;
  unsigned __int128 scaled = (2 * q + denom) / (2 * static_cast<unsigned __int128>(denom));
  return detail::scaled_to_string(static_cast<std::uint64_t>(scaled), decimals);
}

/// Half-up rendering of a nonnegative double at `decimals` places.
inline std::string render_fixed(double value, int decimals) {
  if (!(value >= 0))
    throw Error::config("render_fixed: negative or NaN value");
  long double scale = 1.0L;
  for (int i = 0; i < decimals; ++i) scale *= 10.0L;
  long double scaled = std::floor(static_cast<long double>(value) * scale + 0.5L);
  return detail::scaled_to_string(static_cast<std::uint64_t>(scaled), decimals);
}

/// render_fixed at 6 places with trailing zeros (and a trailing dot)
/// stripped: 0.7 -> "0.7", 2 -> "2".
inline std::string render_trimmed(double value) {
  std::string s = render_fixed(value, 6);
  while (!s.empty() && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s;
}

/// Confidence as a percentage, whole number when the tenths digit is
/// zero and one decimal otherwise: 3/6 -> "50", 2/3 -> "66.7".
inline std::string render_confidence_percent(std::uint64_t joint,
                                             std::uint64_t instances) {
  if (instances == 0)
    throw Error::config("render_confidence_percent: zero instances");
  unsigned __int128 q = static_cast<unsigned __int128>(joint) * 1000;
  std::uint64_t tenths = static_cast<std::uint64_t>(
      (2 * q + instances) / (2 * static_cast<unsigned __int128>(instances)));
  if (tenths % 10 == 0) return std::to_string(tenths / 10);
  return detail::scaled_to_string(tenths, 1);
}

inline std::vector<std::string> split_on(std::string_view text, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.emplace_back(text.substr(start));
      return parts;
    }
    parts.emplace_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

inline std::string join(const std::vector<std::string>& parts, char sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out.push_back(sep);
    out += parts[i];
  }
  return out;
}

inline std::string trim(std::string_view text) {
  std::size_t b = text.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  std::size_t e = text.find_last_not_of(" \t\r\n");
  return std::string(text.substr(b, e - b + 1));
}

}  // namespace mba
