// SPDX-License-Identifier: Apache-2.0

#include "codelm/binary_io.hpp"

#include <bit>
#include <vector>

#include "codelm/error.hpp"

namespace codelm {

void BinaryWriter::magic(const Magic& m) { out_.write(m.data(), static_cast<std::streamsize>(m.size())); }

void BinaryWriter::u8(std::uint8_t v) { out_.put(static_cast<char>(v)); }

void BinaryWriter::u32(std::uint32_t v) {
  char buf[4];
  for (int i = 0; i < 4; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xFFu);
  out_.write(buf, 4);
}

void BinaryWriter::u64(std::uint64_t v) {
  char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xFFu);
  out_.write(buf, 8);
}

void BinaryWriter::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

void BinaryWriter::f64s(std::span<const double> values) {
  for (double v : values) f64(v);
}

void BinaryWriter::vocabulary(const Vocabulary& vocab) {
  const auto bytes = vocab.bytes();
  u32(static_cast<std::uint32_t>(bytes.size()));
  for (auto b : bytes) u8(b);
}

void BinaryReader::fail(const std::string& message) const { throw FormatError(context_ + ": " + message); }

void BinaryReader::read_raw(char* dst, std::size_t n) {
  in_.read(dst, static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in_.gcount()) != n) fail("unexpected end of file");
}

void BinaryReader::expect_magic(const Magic& expected, std::string_view what) {
  Magic got{};
  read_raw(got.data(), got.size());
  if (got != expected) fail("not a " + std::string(what) + " (bad magic bytes)");
}

std::uint8_t BinaryReader::u8() {
  char c;
  read_raw(&c, 1);
  return static_cast<std::uint8_t>(c);
}

std::uint32_t BinaryReader::u32() {
  unsigned char buf[4];
  read_raw(reinterpret_cast<char*>(buf), 4);
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | buf[i];
  return v;
}

std::uint64_t BinaryReader::u64() {
  unsigned char buf[8];
  read_raw(reinterpret_cast<char*>(buf), 8);
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | buf[i];
  return v;
}

double BinaryReader::f64() { return std::bit_cast<double>(u64()); }

void BinaryReader::f64s(std::span<double> out) {
  for (double& v : out) v = f64();
}

Vocabulary BinaryReader::vocabulary() {
  const auto n = u32();
  if (n > 256) fail("vocabulary lists " + std::to_string(n) + " bytes (max 256)");
  std::vector<std::uint8_t> bytes(n);
  for (auto& b : bytes) b = u8();
  for (std::size_t i = 1; i < bytes.size(); ++i) {
    if (bytes[i] <= bytes[i - 1]) fail("vocabulary bytes not strictly ascending");
  }
  return Vocabulary::from_bytes(bytes);
}

void BinaryReader::expect_end() {
  if (in_.peek() != std::char_traits<char>::eof()) fail("trailing bytes after payload");
}

}  // namespace codelm
