#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace smd {

// Raster with 1 (gray) or 3 (RGB) interleaved 8-bit channels, row-major.
struct Image {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<std::uint8_t> data;

  std::uint8_t at(int row, int col, int channel = 0) const {
    return data[(static_cast<std::size_t>(row) * width + col) * channels + channel];
  }
  // Mean over channels, in [0, 255].
  double intensity(int row, int col) const {
    double s = 0.0;
    for (int ch = 0; ch < channels; ++ch) s += at(row, col, ch);
    return s / channels;
  }
};

// Binary PGM (P5) or PPM (P6), maxval 255 only.
Image read_pnm(const std::string& path);
void write_pnm(const Image& image, const std::string& path);

}  // namespace smd
