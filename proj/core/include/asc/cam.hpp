#pragma once

#include <cstdint>
#include <vector>

#include "asc/matrix.hpp"
#include "asc/network.hpp"

namespace asc {

// A signed class activation map over one layer's spatial grid, together
// with the per-channel weights that produced it.
struct Cam {
    Matrix map;                          // H x W, both signs kept
    int class_id = 0;
    std::size_t layer_index = 0;         // layer whose output supplied the maps
    std::vector<double> channel_weights; // w_k (CAM) or alpha_k (Grad-CAM)
    std::size_t pixel_count = 0;         // Z of the source feature map
};

// CAM for a GAP-head network: map = sum_k w_k * f_k over the retained maps
// feeding the global average pool. Requires a prior single-sample forward
// with retained activations.
Cam cam_gap(Network& net, int class_id);

// Grad-CAM at any retained activation: alpha_k is the spatial mean of
// d(logit_c)/d f_k, map = sum_k alpha_k * f_k. No rectification is applied,
// so negative evidence stays visible.
Cam grad_cam(Network& net, int class_id, std::size_t layer_index);

std::uint8_t clamp_u8(double v);

// Bilinear upsample of a coarse map to the requested grid.
Matrix upsample_bilinear(const Matrix& src, std::size_t rows, std::size_t cols);

// 8-bit RGB raster: width = time frames, height = mel bins (low frequencies
// at the bottom).
struct OverlayImage {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> rgb;  // row-major, 3 bytes per pixel

    std::uint8_t* pixel(std::size_t x, std::size_t y) { return rgb.data() + 3 * (y * width + x); }
    const std::uint8_t* pixel(std::size_t x, std::size_t y) const {
        return rgb.data() + 3 * (y * width + x);
    }
};

// Grayscale log-Mel base with positive activations blended toward red and
// negative ones toward blue; the two signs are scaled by their own maxima
// so weak negative evidence stays visible.
OverlayImage render_overlay(const LogMelImage& img, const Cam& cam, double alpha = 0.4);

// Grayscale rendering of any feature image (min-max scaled), same geometry
// as render_overlay.
OverlayImage render_grayscale(const Matrix& img);

// Mean |activation| over high-energy pixels (log-Mel energy above the given
// quantile) versus the rest. Quantifies how much the map cares about
// distinct sound events as opposed to background texture.
struct EventActivationReport {
    double high_energy_mean = 0.0;
    double rest_mean = 0.0;
    double ratio = 0.0;  // high / rest
};

EventActivationReport event_activation_report(const LogMelImage& img, const Cam& cam,
                                              double energy_quantile = 0.95);

}  // namespace asc
