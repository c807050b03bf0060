#pragma once

// Little-endian primitives shared by the dataset and checkpoint formats.

#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <type_traits>

#include "cacl/error.hpp"

namespace cacl::binio {

template <typename T>
void put_le(std::ostream& out, T value) {
  static_assert(std::is_integral_v<T>);
  using U = std::make_unsigned_t<T>;
  auto u = static_cast<U>(value);
  for (std::size_t b = 0; b < sizeof(T); ++b) {
    out.put(static_cast<char>(u & 0xFF));
    u = static_cast<U>(u >> 8);
  }
}

template <typename T>
T get_le(std::istream& in, const std::string& what) {
  static_assert(std::is_integral_v<T>);
  using U = std::make_unsigned_t<T>;
  U u = 0;
  for (std::size_t b = 0; b < sizeof(T); ++b) {
    const int ch = in.get();
    if (ch == std::char_traits<char>::eof()) throw ValidationError("truncated file while reading " + what);
    u |= static_cast<U>(static_cast<U>(static_cast<unsigned char>(ch)) << (8 * b));
  }
  return static_cast<T>(u);
}

inline void put_f32(std::ostream& out, float v) {
  std::uint32_t bits = 0;
  std::memcpy(&bits, &v, sizeof(bits));
  put_le(out, bits);
}

inline float get_f32(std::istream& in, const std::string& what) {
  const auto bits = get_le<std::uint32_t>(in, what);
  float v = 0.0f;
  std::memcpy(&v, &bits, sizeof(v));
  return v;
}

inline void put_f64(std::ostream& out, double v) {
  std::uint64_t bits = 0;
  std::memcpy(&bits, &v, sizeof(bits));
  put_le(out, bits);
}

inline double get_f64(std::istream& in, const std::string& what) {
  const auto bits = get_le<std::uint64_t>(in, what);
  double v = 0.0;
  std::memcpy(&v, &bits, sizeof(v));
  return v;
}

}  // namespace cacl::binio
