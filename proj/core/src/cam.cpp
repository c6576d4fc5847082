#include "asc/cam.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "asc/errors.hpp"

namespace asc {
namespace {

// Retained maps at a layer: expects a single-sample (1, K, H, W) cache.
const Tensor& retained_maps(Network& net, std::size_t layer_index) {
    if (layer_index >= net.layer_count())
        throw parameter_error("cam: layer index " + std::to_string(layer_index) +
                              " out of range");
    const Layer& l = net.layer(layer_index);
    if (!l.has_cache())
        throw state_error("cam: no retained forward pass (run forward with retain)");
    const Tensor& t = l.cached_output();
    if (t.rank() != 4 || t.shape[0] != 1)
        throw parameter_error("cam: layer " + std::to_string(layer_index) +
                              " does not hold single-sample spatial maps");
    return t;
}

Matrix weighted_map_sum(const Tensor& maps, const std::vector<double>& w) {
    const std::size_t k = maps.shape[1], h = maps.shape[2], wd = maps.shape[3];
    Matrix m(h, wd);
    for (std::size_t c = 0; c < k; ++c) {
        const double* plane = maps.data() + c * h * wd;
        for (std::size_t i = 0; i < h * wd; ++i) m.v[i] += w[c] * plane[i];
    }
    return m;
}

}  // namespace

Cam cam_gap(Network& net, int class_id) {
    const std::size_t gap = net.gap_layer();
    if (gap == Network::npos)
        throw unsupported_error("cam_gap requires a network with global average pooling");
    if (gap == 0 || gap + 1 >= net.layer_count())
        throw state_error("cam_gap: malformed GAP head");
    if (net.layer(gap + 1).kind() != LayerKind::linear)
        throw unsupported_error("cam_gap: expected a linear head after the GAP layer");

    const Tensor& maps = retained_maps(net, gap - 1);
    const auto& head = static_cast<const Linear&>(net.layer(gap + 1));
    const std::size_t k = maps.shape[1];
    if (head.in_features() != k) throw shape_error("cam_gap: head width mismatch");
    if (class_id < 0 || static_cast<std::size_t>(class_id) >= head.out_features())
        throw parameter_error("cam_gap: class id out of range");

    Cam cam;
    cam.class_id = class_id;
    cam.layer_index = gap - 1;
    cam.pixel_count = maps.shape[2] * maps.shape[3];
    cam.channel_weights.resize(k);
    const double* wrow = head.weight().data() + static_cast<std::size_t>(class_id) * k;
    std::copy(wrow, wrow + k, cam.channel_weights.begin());
    cam.map = weighted_map_sum(maps, cam.channel_weights);
    return cam;
}

Cam grad_cam(Network& net, int class_id, std::size_t layer_index) {
    const Tensor& maps = retained_maps(net, layer_index);
    const std::size_t classes = net.n_classes();
    if (class_id < 0 || static_cast<std::size_t>(class_id) >= classes)
        throw parameter_error("grad_cam: class id out of range");

    // d(logit_c)/d(logits) = onehot(c); walk it down to the chosen layer
    Tensor dlogits({1, classes});
    dlogits.v[static_cast<std::size_t>(class_id)] = 1.0;
    const Tensor g = net.backward_from_logits(dlogits, static_cast<std::ptrdiff_t>(layer_index));
    if (!g.same_shape(maps)) throw state_error("grad_cam: gradient/map shape mismatch");

    const std::size_t k = maps.shape[1], hw = maps.shape[2] * maps.shape[3];
    Cam cam;
    cam.class_id = class_id;
    cam.layer_index = layer_index;
    cam.pixel_count = hw;
    cam.channel_weights.resize(k);
    for (std::size_t c = 0; c < k; ++c) {
        const double* plane = g.data() + c * hw;
        double acc = 0.0;
        for (std::size_t i = 0; i < hw; ++i) acc += plane[i];
        cam.channel_weights[c] = acc / static_cast<double>(hw);
    }
    cam.map = weighted_map_sum(maps, cam.channel_weights);
    return cam;
}

Matrix upsample_bilinear(const Matrix& src, std::size_t rows, std::size_t cols) {
    if (src.rows == 0 || src.cols == 0) throw shape_error("upsample: empty source");
    Matrix out(rows, cols);
    const double rscale = rows > 1 ? static_cast<double>(src.rows - 1) / (rows - 1) : 0.0;
    const double cscale = cols > 1 ? static_cast<double>(src.cols - 1) / (cols - 1) : 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
        const double fr = r * rscale;
        const std::size_t r0 = static_cast<std::size_t>(fr);
        const std::size_t r1 = std::min(r0 + 1, src.rows - 1);
        const double wr = fr - static_cast<double>(r0);
        for (std::size_t c = 0; c < cols; ++c) {
            const double fc = c * cscale;
            const std::size_t c0 = static_cast<std::size_t>(fc);
            const std::size_t c1 = std::min(c0 + 1, src.cols - 1);
            const double wc = fc - static_cast<double>(c0);
            out.at(r, c) = (1.0 - wr) * ((1.0 - wc) * src.at(r0, c0) + wc * src.at(r0, c1)) +
                           wr * ((1.0 - wc) * src.at(r1, c0) + wc * src.at(r1, c1));
        }
    }
    return out;
}

std::uint8_t clamp_u8(double v) {
    return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

namespace {

// min-max scale to 0..255; constant images map to mid gray
std::vector<double> gray_levels(const Matrix& img) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (double x : img.v) {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
    std::vector<double> g(img.v.size(), 127.5);
    if (hi > lo)
        for (std::size_t i = 0; i < img.v.size(); ++i)
            g[i] = 255.0 * (img.v[i] - lo) / (hi - lo);
    return g;
}

void put_pixel(OverlayImage& im, std::size_t t, std::size_t m, std::size_t bins, double r,
               double g, double b) {
    // time runs along x; mel bin 0 is drawn at the bottom row
    std::uint8_t* p = im.pixel(t, bins - 1 - m);
    p[0] = clamp_u8(r);
    p[1] = clamp_u8(g);
    p[2] = clamp_u8(b);
}

}  // namespace

OverlayImage render_grayscale(const Matrix& img) {
    OverlayImage im;
    im.width = img.rows;
    im.height = img.cols;
    im.rgb.assign(3 * im.width * im.height, 0);
    const std::vector<double> g = gray_levels(img);
    for (std::size_t t = 0; t < img.rows; ++t)
        for (std::size_t m = 0; m < img.cols; ++m) {
            const double v = g[t * img.cols + m];
            put_pixel(im, t, m, img.cols, v, v, v);
        }
    return im;
}

OverlayImage render_overlay(const LogMelImage& img, const Cam& cam, double alpha) {
    if (alpha < 0.0 || alpha > 1.0) throw parameter_error("render_overlay: alpha must be in [0, 1]");
    const Matrix up = upsample_bilinear(cam.map, img.rows, img.cols);

    double max_pos = 0.0, max_neg = 0.0;
    for (double x : up.v) {
        if (x > max_pos) max_pos = x;
        if (-x > max_neg) max_neg = -x;
    }

    OverlayImage im;
    im.width = img.rows;
    im.height = img.cols;
    im.rgb.assign(3 * im.width * im.height, 0);
    const std::vector<double> gray = gray_levels(img);

    for (std::size_t t = 0; t < img.rows; ++t) {
        for (std::size_t m = 0; m < img.cols; ++m) {
            const double g = gray[t * img.cols + m];
            const double v = up.at(t, m);
            double r = g, gg = g, b = g;
            if (v > 0.0 && max_pos > 0.0) {
                const double w = alpha * (v / max_pos);
                r = (1.0 - w) * g + w * 255.0;
                gg = (1.0 - w) * g;
                b = (1.0 - w) * g;
            } else if (v < 0.0 && max_neg > 0.0) {
                const double w = alpha * (-v / max_neg);
                b = (1.0 - w) * g + w * 255.0;
                r = (1.0 - w) * g;
                gg = (1.0 - w) * g;
            }
            put_pixel(im, t, m, img.cols, r, gg, b);
        }
    }
    return im;
}

EventActivationReport event_activation_report(const LogMelImage& img, const Cam& cam,
                                              double energy_quantile) {
    if (energy_quantile < 0.0 || energy_quantile > 1.0)
        throw parameter_error("event_activation_report: quantile must be in [0, 1]");
    const Matrix up = upsample_bilinear(cam.map, img.rows, img.cols);

    std::vector<double> sorted = img.v;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t qi = static_cast<std::size_t>(
        energy_quantile * static_cast<double>(sorted.size() - 1));
    const double threshold = sorted[qi];

    double high_sum = 0.0, rest_sum = 0.0;
    std::size_t high_n = 0, rest_n = 0;
    for (std::size_t i = 0; i < img.v.size(); ++i) {
        if (img.v[i] > threshold) {
            high_sum += std::abs(up.v[i]);
            ++high_n;
        } else {
            rest_sum += std::abs(up.v[i]);
            ++rest_n;
        }
    }

    EventActivationReport rep;
    rep.high_energy_mean = high_n ? high_sum / static_cast<double>(high_n) : 0.0;
    rep.rest_mean = rest_n ? rest_sum / static_cast<double>(rest_n) : 0.0;
    if (rep.rest_mean > 0.0)
        rep.ratio = rep.high_energy_mean / rep.rest_mean;
    else
        rep.ratio = rep.high_energy_mean > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
    return rep;
}

}  // namespace asc
