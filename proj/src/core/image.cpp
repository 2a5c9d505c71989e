#include "core/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>

#include "core/check.hpp"

namespace graphae {

namespace {

struct FileCloser {
    void operator()(FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

}  // namespace

void write_png_gray(const std::string& path, const std::vector<float>& img, int width,
                    int height) {
    GA_CHECK(int64_t(img.size()) == int64_t(width) * height, "write_png_gray: size");
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    GA_CHECK(fp != nullptr, "write_png_gray: cannot open " + path);

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr,
                                              nullptr);
    GA_CHECK(png, "write_png_gray: png_create_write_struct");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        GA_CHECK(false, "write_png_gray: png_create_info_struct");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        GA_CHECK(false, "write_png_gray: libpng error writing " + path);
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, png_uint_32(width), png_uint_32(height), 8,
                 PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    std::vector<png_byte> row(static_cast<size_t>(width));
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const float v = std::clamp(img[size_t(y) * width + x], 0.0f, 1.0f);
            row[size_t(x)] = png_byte(std::lround(v * 255.0f));
        }
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

std::vector<float> read_png_gray(const std::string& path, int& width, int& height) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    GA_CHECK(fp != nullptr, "read_png_gray: cannot open " + path);

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr,
                                             nullptr);
    GA_CHECK(png, "read_png_gray: png_create_read_struct");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        GA_CHECK(false, "read_png_gray: png_create_info_struct");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        GA_CHECK(false, "read_png_gray: libpng error reading " + path);
    }
    png_init_io(png, fp.get());
    png_read_info(png, info);

    width = int(png_get_image_width(png, info));
    height = int(png_get_image_height(png, info));
    const png_byte color = png_get_color_type(png, info);
    const png_byte depth = png_get_bit_depth(png, info);

    // normalize whatever we were handed down to 8-bit grayscale
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (depth == 16) png_set_strip_16(png);
    if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    if (color == PNG_COLOR_TYPE_RGB || color == PNG_COLOR_TYPE_RGB_ALPHA ||
        color == PNG_COLOR_TYPE_PALETTE)
        png_set_rgb_to_gray_fixed(png, 1, -1, -1);
    png_read_update_info(png, info);

    std::vector<float> out(size_t(width) * height);
    std::vector<png_byte> row(png_get_rowbytes(png, info));
    for (int y = 0; y < height; ++y) {
        png_read_row(png, row.data(), nullptr);
        for (int x = 0; x < width; ++x)
            out[size_t(y) * width + x] = float(row[size_t(x)]) / 255.0f;
    }
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return out;
}

void paste_tile(std::vector<float>& canvas, int cw, int ch,
                const std::vector<float>& tile, int tw, int th, int x, int y) {
    GA_CHECK(x >= 0 && y >= 0 && x + tw <= cw && y + th <= ch, "paste_tile: bounds");
    for (int r = 0; r < th; ++r)
        std::copy(tile.begin() + size_t(r) * tw, tile.begin() + size_t(r + 1) * tw,
                  canvas.begin() + size_t(y + r) * cw + x);
}

}  // namespace graphae
