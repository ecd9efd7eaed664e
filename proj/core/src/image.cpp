#include "imgclass/image.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace imgclass {

namespace {

// Header tokenizer tracking the byte offset for error messages. Skips
// whitespace and '#' comment lines.
class PgmScanner {
public:
    explicit PgmScanner(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::size_t offset() const { return pos_; }
    bool eof() const { return pos_ >= bytes_.size(); }

    void skip_separators() {
        while (pos_ < bytes_.size()) {
            std::uint8_t c = bytes_[pos_];
            if (c == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else if (std::isspace(c)) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    int next_int(const char* what) {
        skip_separators();
        if (eof()) {
            throw FormatError("pgm: unexpected end of data while reading " +
                              std::string(what) + " at byte offset " +
                              std::to_string(pos_));
        }
        if (!std::isdigit(bytes_[pos_])) {
            throw FormatError("pgm: expected digit for " + std::string(what) +
                              " at byte offset " + std::to_string(pos_));
        }
        long value = 0;
        while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
            value = value * 10 + (bytes_[pos_] - '0');
            if (value > 1 << 20) {
                throw FormatError("pgm: implausibly large " + std::string(what) +
                                  " at byte offset " + std::to_string(pos_));
            }
            ++pos_;
        }
        return static_cast<int>(value);
    }

    // Exactly one whitespace byte separates the maxval from P5 pixel data.
    void consume_single_separator() {
        if (eof() || !std::isspace(bytes_[pos_])) {
            throw FormatError("pgm: expected whitespace before pixel data at byte offset " +
                              std::to_string(pos_));
        }
        ++pos_;
    }

    std::span<const std::uint8_t> rest() const { return bytes_.subspan(pos_); }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

} // namespace

GrayImage decode_pgm(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 2) {
        throw FormatError("pgm: input shorter than magic number at byte offset 0");
    }
    if (bytes[0] != 'P' || (bytes[1] != '2' && bytes[1] != '5')) {
        throw FormatError("pgm: bad magic (want P2 or P5) at byte offset 0");
    }
    const bool binary = bytes[1] == '5';

    PgmScanner scan(bytes.subspan(2));
    GrayImage img;
    img.width = scan.next_int("width");
    img.height = scan.next_int("height");
    img.maxval = scan.next_int("maxval");
    if (img.width <= 0 || img.height <= 0) {
        throw FormatError("pgm: nonpositive dimensions at byte offset " +
                          std::to_string(2 + scan.offset()));
    }
    if (img.maxval <= 0 || img.maxval > 65535) {
        throw FormatError("pgm: maxval out of range at byte offset " +
                          std::to_string(2 + scan.offset()));
    }

    const std::size_t count =
        static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height);
    img.pixels.reserve(count);

    if (binary) {
        if (img.maxval > 255) {
            throw FormatError("pgm: P5 with maxval > 255 not supported at byte offset " +
                              std::to_string(2 + scan.offset()));
        }
        scan.consume_single_separator();
        auto payload = scan.rest();
        if (payload.size() < count) {
            throw FormatError("pgm: truncated pixel data, expected " +
                              std::to_string(count) + " bytes, got " +
                              std::to_string(payload.size()));
        }
        for (std::size_t i = 0; i < count; ++i) {
            img.pixels.push_back(payload[i]);
        }
    } else {
        for (std::size_t i = 0; i < count; ++i) {
            int v = scan.next_int("pixel");
            if (v > img.maxval) {
                throw FormatError("pgm: pixel value exceeds maxval at byte offset " +
                                  std::to_string(2 + scan.offset()));
            }
            img.pixels.push_back(static_cast<std::uint16_t>(v));
        }
    }
    return img;
}

GrayImage decode_pgm(const std::string& bytes) {
    return decode_pgm(std::span<const std::uint8_t>(
        reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()));
}

GrayImage load_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw FormatError("pgm: cannot open " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return decode_pgm(buf.str());
    } catch (const FormatError& e) {
        throw FormatError(path + ": " + e.what());
    }
}

std::vector<GrayImage> partition_blocks(const GrayImage& img, const BlockGrid& grid) {
    if (grid.rows < 1 || grid.cols < 1) {
        throw InvalidGridError("grid dimensions must be positive");
    }
    if (grid.rows > img.height || grid.cols > img.width) {
        throw InvalidGridError("grid " + std::to_string(grid.rows) + "x" +
                               std::to_string(grid.cols) + " larger than image " +
                               std::to_string(img.height) + "x" +
                               std::to_string(img.width));
    }

    std::vector<GrayImage> blocks;
    blocks.reserve(static_cast<std::size_t>(grid.rows) * grid.cols);
    for (int r = 0; r < grid.rows; ++r) {
        const int r0 = static_cast<int>(static_cast<long>(r) * img.height / grid.rows);
        const int r1 = static_cast<int>(static_cast<long>(r + 1) * img.height / grid.rows);
        for (int c = 0; c < grid.cols; ++c) {
            const int c0 = static_cast<int>(static_cast<long>(c) * img.width / grid.cols);
            const int c1 = static_cast<int>(static_cast<long>(c + 1) * img.width / grid.cols);
            GrayImage block;
            block.width = c1 - c0;
            block.height = r1 - r0;
            block.maxval = img.maxval;
            block.pixels.reserve(static_cast<std::size_t>(block.width) * block.height);
            for (int rr = r0; rr < r1; ++rr) {
                for (int cc = c0; cc < c1; ++cc) {
                    block.pixels.push_back(img.at(rr, cc));
                }
            }
            blocks.push_back(std::move(block));
        }
    }
    return blocks;
}

} // namespace imgclass
