#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "asc/matrix.hpp"

namespace asc {

// 1-D Gaussian tap set used by the separable blur. radius = ceil(3*sigma);
// weights are renormalized to sum to 1.
struct GaussianKernel {
    double sigma = 0.0;
    std::size_t radius = 0;
    std::vector<double> weights;  // 2*radius + 1 taps
};

GaussianKernel make_gaussian_kernel(double sigma);

// The four input-feature variants compared in the experiments.
enum class EnhanceKind { LogMel, DoG, Sobel, MedianResidual };

const char* enhance_kind_name(EnhanceKind kind);             // logmel|dog|sobel|median
EnhanceKind parse_enhance_kind(const std::string& name);

struct MedianKernel {
    std::size_t frames = 51;  // time extent (about 0.5 s at a 10 ms hop)
    std::size_t bins = 7;     // frequency extent
};

// Separable Gaussian blur with reflected borders; shape preserved.
Matrix gaussian_blur(const Matrix& img, double sigma);

// blur(img, 1) - blur(img, sqrt(2)): band-pass edge image.
Matrix dog(const Matrix& img);

// Gradient magnitude sqrt(Gx^2 + Gy^2) from the 3x3 Sobel pair; Gx
// differentiates along time (rows), Gy along frequency (cols).
Matrix sobel(const Matrix& img);

// Exact median over a kt x kf reflected neighborhood; kt, kf must be odd.
Matrix median_filter(const Matrix& img, std::size_t kt, std::size_t kf);

// img - median_filter(img, kernel): keeps sharp structure, removes the
// slowly varying background.
Matrix remove_drift(const Matrix& img, MedianKernel kernel = {});

// Dispatch on kind (LogMel is the identity). Applied to raw log-Mel images
// before normalization.
Matrix enhance(const Matrix& img, EnhanceKind kind, MedianKernel kernel = {});

}  // namespace asc
