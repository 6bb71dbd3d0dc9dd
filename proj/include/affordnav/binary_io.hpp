// Copyright 2026 The affordnav Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef AFFORDNAV_BINARY_IO_HPP
#define AFFORDNAV_BINARY_IO_HPP

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>

#include "affordnav/errors.hpp"

// Little-endian scalar I/O shared by the EMAP, AFS and AFM file formats.
namespace affordnav::binio {

template <typename U>
void put_uint(std::ostream& os, U value) {
  unsigned char buf[sizeof(U)];
  for (std::size_t i = 0; i < sizeof(U); ++i) buf[i] = static_cast<unsigned char>((value >> (8 * i)) & 0xFF);
  os.write(reinterpret_cast<const char*>(buf), sizeof(U));
}

template <typename U>
U get_uint(std::istream& is) {
  unsigned char buf[sizeof(U)];
  if (!is.read(reinterpret_cast<char*>(buf), sizeof(U))) throw FormatError("unexpected end of file");
  U value = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) value |= static_cast<U>(buf[i]) << (8 * i);
  return value;
}

inline void put_u8(std::ostream& os, std::uint8_t v) { put_uint<std::uint8_t>(os, v); }
inline void put_u32(std::ostream& os, std::uint32_t v) { put_uint<std::uint32_t>(os, v); }
inline void put_u64(std::ostream& os, std::uint64_t v) { put_uint<std::uint64_t>(os, v); }
inline void put_f32(std::ostream& os, float v) { put_uint<std::uint32_t>(os, std::bit_cast<std::uint32_t>(v)); }
inline void put_f64(std::ostream& os, double v) { put_uint<std::uint64_t>(os, std::bit_cast<std::uint64_t>(v)); }

inline std::uint8_t get_u8(std::istream& is) { return get_uint<std::uint8_t>(is); }
inline std::uint32_t get_u32(std::istream& is) { return get_uint<std::uint32_t>(is); }
inline std::uint64_t get_u64(std::istream& is) { return get_uint<std::uint64_t>(is); }
inline float get_f32(std::istream& is) { return std::bit_cast<float>(get_uint<std::uint32_t>(is)); }
inline double get_f64(std::istream& is) { return std::bit_cast<double>(get_uint<std::uint64_t>(is)); }

inline void put_magic(std::ostream& os, std::string_view magic) { os.write(magic.data(), static_cast<std::streamsize>(magic.size())); }

inline void expect_magic(std::istream& is, std::string_view magic) {
  std::string got(magic.size(), '\0');
  if (!is.read(got.data(), static_cast<std::streamsize>(got.size())) || got != magic) {
    throw FormatError("bad magic: expected \"" + std::string(magic) + "\"");
  }
}

}  // namespace affordnav::binio

#endif  // AFFORDNAV_BINARY_IO_HPP
