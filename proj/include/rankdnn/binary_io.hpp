#pragma once

// Little-endian primitives shared by the RKDN / RKPC / RKML / RKSV containers.

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rankdnn::io {

using Magic = std::array<char, 4>;

class ByteWriter {
 public:
  void magic(const Magic& m);
  void u32(std::uint32_t v);
  void f32(double v);
  void f32s(std::span<const double> values);
  void save(const std::filesystem::path& path) const;
  const std::vector<std::uint8_t>& bytes() const noexcept { return buf_; }

 private:
  std::vector<std::uint8_t> buf_;
};

class ByteReader {
 public:
  static ByteReader load(const std::filesystem::path& path);
  explicit ByteReader(std::vector<std::uint8_t> bytes) : buf_(std::move(bytes)) {}

  // Throws FormatError naming `field` when the header is short or the magic differs.
  void expect_magic(const Magic& m, std::string_view field = "magic");
  std::uint32_t u32(std::string_view field);
  void expect_version(std::uint32_t version);

  // Payload section: verify the remaining byte count once, then read freely.
  void require_payload(std::size_t bytes) const;
  double f32();
  void f32s(std::span<double> out);

  std::size_t remaining() const noexcept { return buf_.size() - pos_; }

 private:
  std::vector<std::uint8_t> buf_;
  std::size_t pos_ = 0;
};

}  // namespace rankdnn::io
