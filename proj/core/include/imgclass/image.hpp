#ifndef IMGCLASS_IMAGE_HPP
#define IMGCLASS_IMAGE_HPP

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace imgclass {

/// Error raised for malformed PGM input; carries the byte offset of the
/// first offending byte in the message.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidGridError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Row-major grayscale raster. Pixel values lie in [0, maxval].
struct GrayImage {
    int width = 0;
    int height = 0;
    int maxval = 255;
    std::vector<std::uint16_t> pixels;

    std::uint16_t at(int row, int col) const {
        return pixels[static_cast<std::size_t>(row) * width + col];
    }
    std::size_t pixel_count() const { return pixels.size(); }
};

struct BlockGrid {
    int rows = 4;
    int cols = 4;
};

/// Decode a PGM (P2 ASCII or P5 binary) byte stream. Comment lines starting
/// with '#' are allowed anywhere before the pixel data.
GrayImage decode_pgm(std::span<const std::uint8_t> bytes);
GrayImage decode_pgm(const std::string& bytes);

/// Read and decode a PGM file from disk.
GrayImage load_pgm(const std::string& path);

/// Split the image into grid.rows x grid.cols blocks, row-major. Block (r,c)
/// covers pixel rows [floor(r*H/rows), floor((r+1)*H/rows)) and the analogous
/// column range, so blocks tile the image exactly.
std::vector<GrayImage> partition_blocks(const GrayImage& img, const BlockGrid& grid);

} // namespace imgclass

#endif
