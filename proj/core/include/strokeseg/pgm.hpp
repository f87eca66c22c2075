#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "strokeseg/image.hpp"

namespace strokeseg {

// Binary greyscale PNM (P5). Samples are one byte for maxval < 256 and two
// big-endian bytes otherwise.
struct PgmImage {
  RawImage pixels;
  std::uint16_t maxval = 0;
};

PgmImage decode_pgm(std::span<const std::uint8_t> bytes);
// Header is always written as "P5\n<w> <h>\n<maxval>\n".
std::vector<std::uint8_t> encode_pgm(const RawImage& pixels, std::uint16_t maxval);

PgmImage read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const RawImage& pixels, std::uint16_t maxval);

// Masks: maxval 255, 0 = background, 255 = foreground. Reading accepts any
// non-zero sample as foreground.
BinaryMask read_mask(const std::filesystem::path& path);
void write_mask(const std::filesystem::path& path, const BinaryMask& mask);

// Label maps: 0 = background seed, 128 = neutral, 255 = foreground seed.
SeedLabels read_labels(const std::filesystem::path& path);
void write_labels(const std::filesystem::path& path, const SeedLabels& labels);

// round(v * maxval) with v clamped to [0,1].
RawImage quantize(const IntensityImage& img, std::uint16_t maxval);

}  // namespace strokeseg
