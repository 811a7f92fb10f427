#include "pedtrack/frame.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace pedtrack {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error("frames: " + msg); }

std::string where(const std::filesystem::path& path, std::size_t offset) {
    return "'" + path.string() + "' at byte " + std::to_string(offset);
}

}  // namespace

Frame::Frame(int w, int h, std::uint8_t fill) : width(w), height(h) {
    if (w < 1 || h < 1) fail("frame dimensions must be at least 1x1");
    data.assign(static_cast<std::size_t>(w) * h * 3, fill);
}

void Frame::set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    std::size_t i = index(x, y);
    data[i] = r;
    data[i + 1] = g;
    data[i + 2] = b;
}

BinaryMask::BinaryMask(int w, int h, std::uint8_t fill) : width(w), height(h) {
    bits.assign(static_cast<std::size_t>(w) * h, fill ? 1 : 0);
}

namespace {

// Reads one whitespace-delimited header token, skipping '#' comments.
// `pos` tracks the byte offset for error reporting.
std::string next_token(const std::string& buf, std::size_t& pos, const std::filesystem::path& path) {
    while (pos < buf.size()) {
        char c = buf[pos];
        if (c == '#') {
            while (pos < buf.size() && buf[pos] != '\n') ++pos;
        } else if (std::isspace(static_cast<unsigned char>(c))) {
            ++pos;
        } else {
            break;
        }
    }
    if (pos >= buf.size()) fail("unexpected end of header in " + where(path, pos));
    std::size_t start = pos;
    while (pos < buf.size() && !std::isspace(static_cast<unsigned char>(buf[pos])) && buf[pos] != '#') ++pos;
    return buf.substr(start, pos - start);
}

int parse_header_int(const std::string& token, std::size_t pos, const std::filesystem::path& path,
                     const char* what) {
    if (token.empty() || !std::all_of(token.begin(), token.end(), [](unsigned char c) { return std::isdigit(c); }))
        fail(std::string("malformed ") + what + " in " + where(path, pos));
    long v = std::strtol(token.c_str(), nullptr, 10);
    if (v < 1 || v > 1 << 20) fail(std::string(what) + " out of range in " + where(path, pos));
    return static_cast<int>(v);
}

}  // namespace

Frame load_frame(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("cannot open '" + path.string() + "'");
    std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    std::size_t pos = 0;
    std::string magic = next_token(buf, pos, path);
    if (magic != "P6") fail("unsupported magic '" + magic + "' in " + where(path, 0) + " (want binary P6)");

    std::size_t at = pos;
    int w = parse_header_int(next_token(buf, pos, path), at, path, "width");
    at = pos;
    int h = parse_header_int(next_token(buf, pos, path), at, path, "height");
    at = pos;
    std::string maxval = next_token(buf, pos, path);
    if (maxval != "255") fail("maxval must be 255, got '" + maxval + "' in " + where(path, at));

    // exactly one whitespace byte separates the header from the pixel data
    if (pos >= buf.size() || !std::isspace(static_cast<unsigned char>(buf[pos])))
        fail("missing header terminator in " + where(path, pos));
    ++pos;

    std::size_t need = static_cast<std::size_t>(w) * h * 3;
    if (buf.size() - pos < need)
        fail("truncated pixel data in " + where(path, buf.size()) + " (" +
             std::to_string(need - (buf.size() - pos)) + " bytes missing)");

    Frame frame(w, h);
    std::copy_n(buf.begin() + static_cast<std::ptrdiff_t>(pos), need, frame.data.begin());
    return frame;
}

void save_frame(const Frame& frame, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail("cannot open '" + path.string() + "' for writing");
    out << "P6\n" << frame.width << " " << frame.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(frame.data.data()),
              static_cast<std::streamsize>(frame.data.size()));
    if (!out) fail("write failure on '" + path.string() + "'");
}

void save_mask(const BinaryMask& mask, const std::filesystem::path& path) {
    Frame frame(mask.width, mask.height);
    for (std::size_t i = 0; i < mask.bits.size(); ++i) {
        std::uint8_t v = mask.bits[i] ? 255 : 0;
        frame.data[i * 3] = frame.data[i * 3 + 1] = frame.data[i * 3 + 2] = v;
    }
    save_frame(frame, path);
}

namespace {

bool glob_match(const std::string& pattern, const std::string& name) {
    std::size_t p = 0, n = 0, star = std::string::npos, mark = 0;
    while (n < name.size()) {
        if (p < pattern.size() && (pattern[p] == '?' || pattern[p] == name[n])) {
            ++p;
            ++n;
        } else if (p < pattern.size() && pattern[p] == '*') {
            star = p++;
            mark = n;
        } else if (star != std::string::npos) {
            p = star + 1;
            n = ++mark;
        } else {
            return false;
        }
    }
    while (p < pattern.size() && pattern[p] == '*') ++p;
    return p == pattern.size();
}

}  // namespace

std::vector<std::filesystem::path> list_frame_sequence(const std::filesystem::path& directory,
                                                       const std::string& pattern) {
    if (!std::filesystem::is_directory(directory))
        fail("'" + directory.string() + "' is not a directory");
    std::vector<std::filesystem::path> matches;
    for (const auto& entry : std::filesystem::directory_iterator(directory)) {
        if (!entry.is_regular_file()) continue;
        if (glob_match(pattern, entry.path().filename().string())) matches.push_back(entry.path());
    }
    if (matches.empty())
        fail("no files matching '" + pattern + "' in '" + directory.string() + "'");
    std::sort(matches.begin(), matches.end(),
              [](const auto& a, const auto& b) { return a.filename().string() < b.filename().string(); });
    return matches;
}

}  // namespace pedtrack
