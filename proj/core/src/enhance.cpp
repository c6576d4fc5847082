#include "asc/enhance.hpp"

#include <algorithm>
#include <cmath>

#include "asc/errors.hpp"

namespace asc {
namespace {

// scipy-style 'reflect' border: (d c b a | a b c d | d c b a). Handles
// kernels wider than the image by folding with period 2n.
inline std::size_t reflect_index(std::ptrdiff_t i, std::ptrdiff_t n) {
    if (n == 1) return 0;
    const std::ptrdiff_t period = 2 * n;
    std::ptrdiff_t j = i % period;
    if (j < 0) j += period;
    if (j >= n) j = period - 1 - j;
    return static_cast<std::size_t>(j);
}

// convolve along rows (time) with a symmetric kernel
Matrix conv_rows(const Matrix& img, const std::vector<double>& w, std::size_t radius) {
    Matrix out(img.rows, img.cols);
    const auto n = static_cast<std::ptrdiff_t>(img.rows);
    for (std::ptrdiff_t t = 0; t < n; ++t) {
        for (std::size_t m = 0; m < img.cols; ++m) {
            double acc = 0.0;
            for (std::ptrdiff_t k = -static_cast<std::ptrdiff_t>(radius);
                 k <= static_cast<std::ptrdiff_t>(radius); ++k) {
                acc += w[static_cast<std::size_t>(k + static_cast<std::ptrdiff_t>(radius))] *
                       img.at(reflect_index(t + k, n), m);
            }
            out.at(static_cast<std::size_t>(t), m) = acc;
        }
    }
    return out;
}

Matrix conv_cols(const Matrix& img, const std::vector<double>& w, std::size_t radius) {
    Matrix out(img.rows, img.cols);
    const auto n = static_cast<std::ptrdiff_t>(img.cols);
    for (std::size_t t = 0; t < img.rows; ++t) {
        const double* row = img.row(t);
        for (std::ptrdiff_t m = 0; m < n; ++m) {
            double acc = 0.0;
            for (std::ptrdiff_t k = -static_cast<std::ptrdiff_t>(radius);
                 k <= static_cast<std::ptrdiff_t>(radius); ++k) {
                acc += w[static_cast<std::size_t>(k + static_cast<std::ptrdiff_t>(radius))] *
                       row[reflect_index(m + k, n)];
            }
            out.at(t, static_cast<std::size_t>(m)) = acc;
        }
    }
    return out;
}

}  // namespace

GaussianKernel make_gaussian_kernel(double sigma) {
    if (sigma <= 0.0) throw parameter_error("gaussian kernel requires sigma > 0");
    GaussianKernel k;
    k.sigma = sigma;
    k.radius = static_cast<std::size_t>(std::ceil(3.0 * sigma));
    k.weights.resize(2 * k.radius + 1);
    double sum = 0.0;
    for (std::size_t i = 0; i < k.weights.size(); ++i) {
        const double x = static_cast<double>(i) - static_cast<double>(k.radius);
        k.weights[i] = std::exp(-0.5 * x * x / (sigma * sigma));
        sum += k.weights[i];
    }
    for (double& w : k.weights) w /= sum;
    return k;
}

Matrix gaussian_blur(const Matrix& img, double sigma) {
    const GaussianKernel k = make_gaussian_kernel(sigma);
    return conv_cols(conv_rows(img, k.weights, k.radius), k.weights, k.radius);
}

Matrix dog(const Matrix& img) {
    const Matrix narrow = gaussian_blur(img, 1.0);
    const Matrix wide = gaussian_blur(img, std::sqrt(2.0));
    Matrix out(img.rows, img.cols);
    for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] = narrow.v[i] - wide.v[i];
    return out;
}

Matrix sobel(const Matrix& img) {
    // 3x3 taps: gx[dt+1][dm+1] weights the sample at (t+dt, m+dm)
    static const double gx[3][3] = {{1, 2, 1}, {0, 0, 0}, {-1, -2, -1}};
    static const double gy[3][3] = {{1, 0, -1}, {2, 0, -2}, {1, 0, -1}};

    Matrix out(img.rows, img.cols);
    const auto nt = static_cast<std::ptrdiff_t>(img.rows);
    const auto nm = static_cast<std::ptrdiff_t>(img.cols);
    for (std::ptrdiff_t t = 0; t < nt; ++t) {
        for (std::ptrdiff_t m = 0; m < nm; ++m) {
            double ax = 0.0, ay = 0.0;
            for (std::ptrdiff_t dt = -1; dt <= 1; ++dt) {
                const std::size_t ti = reflect_index(t + dt, nt);
                for (std::ptrdiff_t dm = -1; dm <= 1; ++dm) {
                    const double v = img.at(ti, reflect_index(m + dm, nm));
                    ax += gx[dt + 1][dm + 1] * v;
                    ay += gy[dt + 1][dm + 1] * v;
                }
            }
            out.at(static_cast<std::size_t>(t), static_cast<std::size_t>(m)) =
                std::sqrt(ax * ax + ay * ay);
        }
    }
    return out;
}

Matrix median_filter(const Matrix& img, std::size_t kt, std::size_t kf) {
    if (kt % 2 == 0 || kf % 2 == 0 || kt == 0 || kf == 0)
        throw parameter_error("median_filter: kernel dims must be odd and positive");

    const auto nt = static_cast<std::ptrdiff_t>(img.rows);
    const auto nm = static_cast<std::ptrdiff_t>(img.cols);
    const auto rt = static_cast<std::ptrdiff_t>(kt / 2);
    const auto rf = static_cast<std::ptrdiff_t>(kf / 2);

    Matrix out(img.rows, img.cols);
    std::vector<double> window(kt * kf);
    std::vector<std::size_t> row_map(kt), col_map(kf);
    for (std::ptrdiff_t t = 0; t < nt; ++t) {
        for (std::ptrdiff_t dt = -rt; dt <= rt; ++dt)
            row_map[static_cast<std::size_t>(dt + rt)] = reflect_index(t + dt, nt);
        for (std::ptrdiff_t m = 0; m < nm; ++m) {
            for (std::ptrdiff_t dm = -rf; dm <= rf; ++dm)
                col_map[static_cast<std::size_t>(dm + rf)] = reflect_index(m + dm, nm);
            std::size_t idx = 0;
            for (std::size_t i = 0; i < kt; ++i) {
                const double* row = img.row(row_map[i]);
                for (std::size_t j = 0; j < kf; ++j) window[idx++] = row[col_map[j]];
            }
            auto mid = window.begin() + static_cast<std::ptrdiff_t>(window.size() / 2);
            std::nth_element(window.begin(), mid, window.end());
            out.at(static_cast<std::size_t>(t), static_cast<std::size_t>(m)) = *mid;
        }
    }
    return out;
}

Matrix remove_drift(const Matrix& img, MedianKernel kernel) {
    const Matrix med = median_filter(img, kernel.frames, kernel.bins);
    Matrix out(img.rows, img.cols);
    for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] = img.v[i] - med.v[i];
    return out;
}

Matrix enhance(const Matrix& img, EnhanceKind kind, MedianKernel kernel) {
    switch (kind) {
        case EnhanceKind::LogMel: return img;
        case EnhanceKind::DoG: return dog(img);
        case EnhanceKind::Sobel: return sobel(img);
        case EnhanceKind::MedianResidual: return remove_drift(img, kernel);
    }
    throw parameter_error("enhance: invalid kind");
}

const char* enhance_kind_name(EnhanceKind kind) {
    switch (kind) {
        case EnhanceKind::LogMel: return "logmel";
        case EnhanceKind::DoG: return "dog";
        case EnhanceKind::Sobel: return "sobel";
        case EnhanceKind::MedianResidual: return "median";
    }
    return "?";
}

EnhanceKind parse_enhance_kind(const std::string& name) {
    if (name == "logmel") return EnhanceKind::LogMel;
    if (name == "dog") return EnhanceKind::DoG;
    if (name == "sobel") return EnhanceKind::Sobel;
    if (name == "median") return EnhanceKind::MedianResidual;
    throw parse_error("unknown enhance kind: " + name +
                      " (expected logmel|dog|sobel|median)");
}

}  // namespace asc
