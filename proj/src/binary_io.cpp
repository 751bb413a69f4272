#include "rankdnn/binary_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "rankdnn/errors.hpp"

namespace rankdnn::io {

namespace {

std::uint32_t load_le32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

void ByteWriter::magic(const Magic& m) {
  buf_.insert(buf_.end(), m.begin(), m.end());
}

void ByteWriter::u32(std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8) buf_.push_back(static_cast<std::uint8_t>(v >> shift));
}

void ByteWriter::f32(double v) {
  u32(std::bit_cast<std::uint32_t>(static_cast<float>(v)));
}

void ByteWriter::f32s(std::span<const double> values) {
  buf_.reserve(buf_.size() + 4 * values.size());
  for (double v : values) f32(v);
}

void ByteWriter::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidArgument("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(buf_.data()), static_cast<std::streamsize>(buf_.size()));
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

ByteReader ByteReader::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open '" + path.string() + "' for reading");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return ByteReader(std::move(bytes));
}

void ByteReader::expect_magic(const Magic& m, std::string_view field) {
  if (remaining() < 4) throw FormatError(std::string(field), "file ends before magic bytes");
  if (std::memcmp(buf_.data() + pos_, m.data(), 4) != 0) {
    std::string found(reinterpret_cast<const char*>(buf_.data() + pos_), 4);
    throw FormatError(std::string(field),
                      "expected \"" + std::string(m.data(), 4) + "\", found \"" + found + "\"");
  }
  pos_ += 4;
}

std::uint32_t ByteReader::u32(std::string_view field) {
  if (remaining() < 4) throw FormatError(std::string(field), "file ends inside header");
  std::uint32_t v = load_le32(buf_.data() + pos_);
  pos_ += 4;
  return v;
}

void ByteReader::expect_version(std::uint32_t version) {
  std::uint32_t v = u32("version");
  if (v != version)
    throw FormatError("version", "unsupported version " + std::to_string(v) + " (expected " +
                                     std::to_string(version) + ")");
}

void ByteReader::require_payload(std::size_t bytes) const {
  if (remaining() < bytes) throw TruncationError(bytes, remaining());
}

double ByteReader::f32() {
  require_payload(4);
  float f = std::bit_cast<float>(load_le32(buf_.data() + pos_));
  pos_ += 4;
  return static_cast<double>(f);
}

void ByteReader::f32s(std::span<double> out) {
  require_payload(4 * out.size());
  for (double& v : out) {
    v = static_cast<double>(std::bit_cast<float>(load_le32(buf_.data() + pos_)));
    pos_ += 4;
  }
}

}  // namespace rankdnn::io
