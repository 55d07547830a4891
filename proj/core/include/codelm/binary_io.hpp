// SPDX-License-Identifier: Apache-2.0
//
// Little-endian primitive encoding used by the checkpoint, n-gram table and
// vocabulary files. Output is identical regardless of host byte order.

#pragma once

#include <array>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>

#include "codelm/corpus.hpp"

namespace codelm {

using Magic = std::array<char, 8>;

class BinaryWriter {
 public:
  explicit BinaryWriter(std::ostream& out) : out_(out) {}

  void magic(const Magic& m);
  void u8(std::uint8_t v);
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
  void f64(double v);
  void f64s(std::span<const double> values);
  void vocabulary(const Vocabulary& vocab);

 private:
  std::ostream& out_;
};

/// Reader counterpart. Every method throws FormatError on truncated input;
/// `context` prefixes the message (typically the file path).
class BinaryReader {
 public:
  BinaryReader(std::istream& in, std::string context) : in_(in), context_(std::move(context)) {}

  /// Consumes 8 bytes and throws unless they equal `expected`.
  void expect_magic(const Magic& expected, std::string_view what);
  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
  double f64();
  void f64s(std::span<double> out);
  Vocabulary vocabulary();

  /// Throws unless the stream is exhausted.
  void expect_end();

  [[noreturn]] void fail(const std::string& message) const;

 private:
  void read_raw(char* dst, std::size_t n);

  std::istream& in_;
  std::string context_;
};

}  // namespace codelm
