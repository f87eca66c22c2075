#include "strokeseg/pgm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

namespace strokeseg {

namespace {

class HeaderReader {
 public:
  explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const auto c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n' && bytes_[pos_] != '\r') ++pos_;
      } else if (std::isspace(c)) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  unsigned long read_uint(const char* field) {
    skip_space_and_comments();
    unsigned long value = 0;
    std::size_t digits = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > 0xFFFFFFFFul) throw Error(ErrorCode::kFormat, std::string("PGM ") + field + " overflows");
      ++pos_;
      ++digits;
    }
    if (digits == 0) throw Error(ErrorCode::kFormat, std::string("PGM header missing ") + field);
    return value;
  }

  // Exactly one whitespace byte separates maxval from the raster.
  void consume_single_space() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
      throw Error(ErrorCode::kFormat, "PGM header not terminated by whitespace");
    }
    ++pos_;
  }

  std::size_t position() const noexcept { return pos_; }
  void advance(std::size_t n) noexcept { pos_ += n; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot create " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

}  // namespace

PgmImage decode_pgm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
    throw Error(ErrorCode::kFormat, "not a binary PGM (P5)");
  }
  HeaderReader reader(bytes);
  reader.advance(2);
  const auto width = reader.read_uint("width");
  const auto height = reader.read_uint("height");
  const auto maxval = reader.read_uint("maxval");
  reader.consume_single_space();
  if (width == 0 || height == 0) throw Error(ErrorCode::kFormat, "PGM has zero dimension");
  if (width > 1u << 15 || height > 1u << 15) throw Error(ErrorCode::kFormat, "PGM dimensions too large");
  if (maxval == 0 || maxval > 65535) throw Error(ErrorCode::kFormat, "PGM maxval out of range");

  const std::size_t sample_bytes = maxval < 256 ? 1 : 2;
  const std::size_t count = static_cast<std::size_t>(width) * height;
  const std::size_t start = reader.position();
  if (bytes.size() - start < count * sample_bytes) throw Error(ErrorCode::kFormat, "PGM raster truncated");

  std::vector<std::uint16_t> data(count);
  const std::uint8_t* p = bytes.data() + start;
  for (std::size_t i = 0; i < count; ++i) {
    std::uint16_t v = sample_bytes == 1 ? p[i] : static_cast<std::uint16_t>((p[2 * i] << 8) | p[2 * i + 1]);
    if (v > maxval) throw Error(ErrorCode::kFormat, "PGM sample exceeds maxval");
    data[i] = v;
  }
  return PgmImage{RawImage(static_cast<int>(width), static_cast<int>(height), std::move(data)),
                  static_cast<std::uint16_t>(maxval)};
}

std::vector<std::uint8_t> encode_pgm(const RawImage& pixels, std::uint16_t maxval) {
  if (maxval == 0) throw Error(ErrorCode::kInvalidArgument, "maxval must be positive");
  if (pixels.empty()) throw Error(ErrorCode::kInvalidArgument, "cannot encode an empty image");
  const std::string header = "P5\n" + std::to_string(pixels.width()) + " " +
                             std::to_string(pixels.height()) + "\n" + std::to_string(maxval) + "\n";
  const std::size_t sample_bytes = maxval < 256 ? 1 : 2;
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(header.size() + pixels.size() * sample_bytes);
  for (std::uint16_t v : pixels.pixels()) {
    if (v > maxval) throw Error(ErrorCode::kInvalidArgument, "sample exceeds maxval");
    if (sample_bytes == 2) out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  }
  return out;
}

PgmImage read_pgm(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  try {
    return decode_pgm(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void write_pgm(const std::filesystem::path& path, const RawImage& pixels, std::uint16_t maxval) {
  write_file(path, encode_pgm(pixels, maxval));
}

BinaryMask read_mask(const std::filesystem::path& path) {
  const auto pgm = read_pgm(path);
  BinaryMask mask(pgm.pixels.width(), pgm.pixels.height());
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = pgm.pixels[i] != 0 ? 1 : 0;
  return mask;
}

void write_mask(const std::filesystem::path& path, const BinaryMask& mask) {
  RawImage raw(mask.width(), mask.height());
  for (std::size_t i = 0; i < mask.size(); ++i) raw[i] = mask[i] ? 255 : 0;
  write_pgm(path, raw, 255);
}

SeedLabels read_labels(const std::filesystem::path& path) {
  const auto pgm = read_pgm(path);
  SeedLabels labels(pgm.pixels.width(), pgm.pixels.height());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    switch (pgm.pixels[i]) {
      case 0: labels[i] = SeedLabel::kBackground; break;
      case 128: labels[i] = SeedLabel::kNeutral; break;
      case 255: labels[i] = SeedLabel::kForeground; break;
      default: throw Error(ErrorCode::kFormat, path.string() + ": label map value not in {0,128,255}");
    }
  }
  return labels;
}

void write_labels(const std::filesystem::path& path, const SeedLabels& labels) {
  RawImage raw(labels.width(), labels.height());
  for (std::size_t i = 0; i < labels.size(); ++i) raw[i] = static_cast<std::uint16_t>(labels[i]);
  write_pgm(path, raw, 255);
}

RawImage quantize(const IntensityImage& img, std::uint16_t maxval) {
  RawImage raw(img.width(), img.height());
  for (std::size_t i = 0; i < img.size(); ++i) {
    const double v = std::clamp(img[i], 0.0, 1.0);
    raw[i] = static_cast<std::uint16_t>(std::lround(v * maxval));
  }
  return raw;
}

}  // namespace strokeseg
