#ifndef AHNN_IMAGE_HPP
#define AHNN_IMAGE_HPP

// 8-bit grayscale images and binary PGM (P5) I/O.

#include <cctype>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "errors.hpp"

namespace ahnn {

struct GrayImage {
    std::size_t rows = 0, cols = 0;
    std::vector<std::uint8_t> pixels;

    GrayImage() = default;
    GrayImage(std::size_t r, std::size_t c, std::uint8_t fill = 0)
        : rows(r), cols(c), pixels(r * c, fill) {}
    GrayImage(std::size_t r, std::size_t c, std::vector<std::uint8_t> px)
        : rows(r), cols(c), pixels(std::move(px)) {
        if (pixels.size() != rows * cols) throw DimensionMismatch("pixel count does not match rows*cols");
    }

    std::uint8_t& at(std::size_t r, std::size_t c) { return pixels[r * cols + c]; }
    std::uint8_t at(std::size_t r, std::size_t c) const { return pixels[r * cols + c]; }
    std::size_t size() const { return pixels.size(); }
    friend bool operator==(const GrayImage&, const GrayImage&) = default;
};

namespace detail {

/// Next whitespace-delimited header token, skipping `#` comments.
inline std::string pgm_token(std::istream& is) {
    std::string tok;
    int ch;
    while ((ch = is.get()) != EOF) {
        if (ch == '#') {
            while ((ch = is.get()) != EOF && ch != '\n' && ch != '\r') {}
            if (!tok.empty()) break;
            continue;
        }
        if (std::isspace(ch)) {
            if (!tok.empty()) break;
            continue;
        }
        tok.push_back(static_cast<char>(ch));
    }
    return tok;
}

inline std::size_t pgm_number(std::istream& is, const char* what) {
    const std::string tok = pgm_token(is);
    if (tok.empty() || tok.size() > 9 || tok.find_first_not_of("0123456789") != std::string::npos)
        throw FormatError(std::string("PGM: bad ") + what);
    return std::stoul(tok);
}

} // namespace detail

inline GrayImage read_pgm(std::istream& is) {
    if (detail::pgm_token(is) != "P5") throw FormatError("PGM: only binary P5 images are supported");
    const std::size_t cols = detail::pgm_number(is, "width");
    const std::size_t rows = detail::pgm_number(is, "height");
    const std::size_t maxval = detail::pgm_number(is, "maxval");
    if (maxval != 255) throw FormatError("PGM: maxval must be 255");
    if (rows == 0 || cols == 0) throw FormatError("PGM: empty image");
    GrayImage img(rows, cols);
    is.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
    if (static_cast<std::size_t>(is.gcount()) != img.pixels.size()) throw FormatError("PGM: short pixel data");
    return img;
}

inline void write_pgm(std::ostream& os, const GrayImage& img) {
    os << "P5\n" << img.cols << ' ' << img.rows << "\n255\n";
    os.write(reinterpret_cast<const char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
}

inline GrayImage read_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path);
    return read_pgm(in);
}

inline void write_pgm(const std::string& path, const GrayImage& img) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write " + path);
    write_pgm(out, img);
}

} // namespace ahnn

#endif // AHNN_IMAGE_HPP
