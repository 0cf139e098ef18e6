#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>

// Little-endian scalar I/O for the checkpoint and index formats.
namespace pcr::binary {

inline void write_u64(std::ostream& out, std::uint64_t value) {
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((value >> (8 * i)) & 0xff);
  out.write(bytes, 8);
}

inline void write_u32(std::ostream& out, std::uint32_t value) {
  char bytes[4];
  for (int i = 0; i < 4; ++i) bytes[i] = static_cast<char>((value >> (8 * i)) & 0xff);
  out.write(bytes, 4);
}

inline void write_i32(std::ostream& out, std::int32_t value) {
  write_u32(out, static_cast<std::uint32_t>(value));
}

inline void write_floats(std::ostream& out, std::span<const float> values) {
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size_bytes()));
  } else {
    for (const float v : values) write_u32(out, std::bit_cast<std::uint32_t>(v));
  }
}

inline void read_exact(std::istream& in, char* dst, std::size_t n, const char* what) {
  in.read(dst, static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) {
    throw std::runtime_error(std::string("truncated input while reading ") + what);
  }
}

inline std::uint64_t read_u64(std::istream& in, const char* what) {
  unsigned char bytes[8];
  read_exact(in, reinterpret_cast<char*>(bytes), 8, what);
  std::uint64_t value = 0;
  for (int i = 7; i >= 0; --i) value = (value << 8) | bytes[i];
  return value;
}

inline std::uint32_t read_u32(std::istream& in, const char* what) {
  unsigned char bytes[4];
  read_exact(in, reinterpret_cast<char*>(bytes), 4, what);
  std::uint32_t value = 0;
  for (int i = 3; i >= 0; --i) value = (value << 8) | bytes[i];
  return value;
}

inline std::int32_t read_i32(std::istream& in, const char* what) {
  return static_cast<std::int32_t>(read_u32(in, what));
}

inline void read_floats(std::istream& in, std::span<float> values, const char* what) {
  if constexpr (std::endian::native == std::endian::little) {
    read_exact(in, reinterpret_cast<char*>(values.data()), values.size_bytes(), what);
  } else {
    for (float& v : values) v = std::bit_cast<float>(read_u32(in, what));
  }
}

}  // namespace pcr::binary
