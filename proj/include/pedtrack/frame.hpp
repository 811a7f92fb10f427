#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace pedtrack {

// Interleaved 8-bit RGB image, row-major, top-left origin, x rightward, y downward.
struct Frame {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;  // size = width * height * 3, channel order R,G,B

    Frame() = default;
    Frame(int w, int h, std::uint8_t fill = 0);

    std::size_t index(int x, int y) const { return (static_cast<std::size_t>(y) * width + x) * 3; }
    std::uint8_t at(int x, int y, int channel) const { return data[index(x, y) + channel]; }
    void set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b);

    bool operator==(const Frame&) const = default;
};

// Row-major boolean mask, same geometry as Frame. Values are 0 or 1.
struct BinaryMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> bits;

    BinaryMask() = default;
    BinaryMask(int w, int h, std::uint8_t fill = 0);

    std::uint8_t at(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x]; }
    void set(int x, int y, std::uint8_t v) { bits[static_cast<std::size_t>(y) * width + x] = v; }

    bool operator==(const BinaryMask&) const = default;
};

// Binary portable pixmap (P6, maxval 255) reader. Header comments ('#') are
// accepted; anything else malformed is reported with the path and byte offset.
Frame load_frame(const std::filesystem::path& path);

// P6 writer; load_frame(save_frame(f)) round-trips bit-exactly.
void save_frame(const Frame& frame, const std::filesystem::path& path);

// Mask dump: true -> white, false -> black.
void save_mask(const BinaryMask& mask, const std::filesystem::path& path);

// Lexicographically sorted filenames of `directory` matching `pattern` ('*'
// and '?' wildcards). The position in the returned list is the frame time t.
// An empty match set is an error.
std::vector<std::filesystem::path> list_frame_sequence(const std::filesystem::path& directory,
                                                       const std::string& pattern);

}  // namespace pedtrack
