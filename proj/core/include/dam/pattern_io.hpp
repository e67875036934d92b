#pragma once

#include <iosfwd>

#include "dam/pattern.hpp"

namespace dam {

// Binary container, all integers little-endian:
//   "DMPS"  magic (4 bytes)
//   u16     version (= 1)
//   u32     N
//   u32     M
//   M rows of ceil(N/8) bytes; within a row neuron i is bit (7 - i % 8) of byte i / 8,
//   a set bit encodes +1. Padding bits are zero.
inline constexpr std::uint16_t kStoreFormatVersion = 1;

void write_store_binary(std::ostream& out, const PatternStore& store);
/// Throws std::runtime_error on a malformed or truncated stream.
[[nodiscard]] PatternStore read_store_binary(std::istream& in);

// Text form: one pattern per line, '+' for +1 and '-' for -1. The reader also
// accepts U+2212 MINUS SIGN and ignores blank lines and trailing '\r'.
void write_store_text(std::ostream& out, const PatternStore& store);
[[nodiscard]] PatternStore read_store_text(std::istream& in);

}  // namespace dam
