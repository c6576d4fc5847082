#pragma once

#include <filesystem>

#include "asc/cam.hpp"
#include "asc/matrix.hpp"

namespace asc {

// Standard 8-bit RGB PNG, written atomically.
void write_png(const std::filesystem::path& path, const OverlayImage& image);

// Min-max scaled grayscale raster of a feature image (time along x, low
// mel bins at the bottom).
void write_feature_png(const std::filesystem::path& path, const Matrix& img);

}  // namespace asc
