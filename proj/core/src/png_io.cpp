#include "asc/png_io.hpp"

#include <cstdio>
#include <memory>
#include <png.h>
#include <vector>

#include "asc/errors.hpp"

namespace asc {
namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};

void write_rgb_rows(const std::filesystem::path& path, std::size_t width, std::size_t height,
                    const std::uint8_t* rgb) {
    if (width == 0 || height == 0) throw parameter_error("png: empty image");

    const std::filesystem::path tmp = path.string() + ".tmp";
    std::unique_ptr<std::FILE, FileCloser> fp(std::fopen(tmp.c_str(), "wb"));
    if (!fp) throw io_error("cannot open for writing: " + tmp.string());

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw io_error("png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw io_error("png_create_info_struct failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw io_error("png encoding failed: " + path.string());
    }

    png_init_io(png, fp.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
                 PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    std::vector<png_bytep> rows(height);
    for (std::size_t y = 0; y < height; ++y)
        rows[y] = const_cast<png_bytep>(rgb + y * width * 3);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    fp.reset();

    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw io_error("rename failed: " + tmp.string() + " -> " + path.string());
}

}  // namespace

void write_png(const std::filesystem::path& path, const OverlayImage& image) {
    write_rgb_rows(path, image.width, image.height, image.rgb.data());
}

void write_feature_png(const std::filesystem::path& path, const Matrix& img) {
    const OverlayImage gray = render_grayscale(img);
    write_png(path, gray);
}

}  // namespace asc
