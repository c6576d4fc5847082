#include "asc/layers.hpp"

#include <algorithm>
#include <cblas-openblas.h>
#include <cmath>
#include <cstring>

namespace asc {
namespace {

void dgemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k, double alpha,
           const double* a, std::size_t lda, const double* b, std::size_t ldb, double beta,
           double* c, std::size_t ldc) {
    cblas_dgemm(CblasRowMajor, trans_a ? CblasTrans : CblasNoTrans,
                trans_b ? CblasTrans : CblasNoTrans, static_cast<blasint>(m),
                static_cast<blasint>(n), static_cast<blasint>(k), alpha, a,
                static_cast<blasint>(lda), b, static_cast<blasint>(ldb), beta, c,
                static_cast<blasint>(ldc));
}

struct ConvDims {
    std::size_t n, c, h, w, oh, ow;
};

ConvDims conv_dims(const std::vector<std::size_t>& in, std::size_t k, std::size_t stride,
                   std::size_t pad) {
    if (in.size() != 4) throw shape_error("conv expects a (N, C, H, W) tensor");
    ConvDims d{in[0], in[1], in[2], in[3], 0, 0};
    const std::size_t eff_h = d.h + 2 * pad;
    const std::size_t eff_w = d.w + 2 * pad;
    if (eff_h < k || eff_w < k) throw shape_error("conv input smaller than kernel");
    d.oh = (eff_h - k) / stride + 1;
    d.ow = (eff_w - k) / stride + 1;
    return d;
}

// x (N,C,H,W) -> col (C*k*k, N*oh*ow); column index = n*oh*ow + oi*ow + oj
void im2col(const double* x, const ConvDims& d, std::size_t k, std::size_t stride, std::size_t pad,
            double* col) {
    const std::size_t ohw = d.oh * d.ow;
    const std::size_t cols = d.n * ohw;
    for (std::size_t c = 0; c < d.c; ++c) {
        for (std::size_t ki = 0; ki < k; ++ki) {
            for (std::size_t kj = 0; kj < k; ++kj) {
                double* dst_row = col + ((c * k + ki) * k + kj) * cols;
                for (std::size_t n = 0; n < d.n; ++n) {
                    const double* src_plane = x + (n * d.c + c) * d.h * d.w;
                    double* dst = dst_row + n * ohw;
                    for (std::size_t oi = 0; oi < d.oh; ++oi) {
                        const std::ptrdiff_t ih =
                            static_cast<std::ptrdiff_t>(oi * stride + ki) -
                            static_cast<std::ptrdiff_t>(pad);
                        double* out_row = dst + oi * d.ow;
                        if (ih < 0 || ih >= static_cast<std::ptrdiff_t>(d.h)) {
                            std::memset(out_row, 0, d.ow * sizeof(double));
                            continue;
                        }
                        const double* src_row = src_plane + static_cast<std::size_t>(ih) * d.w;
                        for (std::size_t oj = 0; oj < d.ow; ++oj) {
                            const std::ptrdiff_t iw =
                                static_cast<std::ptrdiff_t>(oj * stride + kj) -
                                static_cast<std::ptrdiff_t>(pad);
                            out_row[oj] = (iw < 0 || iw >= static_cast<std::ptrdiff_t>(d.w))
                                              ? 0.0
                                              : src_row[static_cast<std::size_t>(iw)];
                        }
                    }
                }
            }
        }
    }
}

void col2im(const double* col, const ConvDims& d, std::size_t k, std::size_t stride,
            std::size_t pad, double* x) {
    const std::size_t ohw = d.oh * d.ow;
    const std::size_t cols = d.n * ohw;
    std::memset(x, 0, d.n * d.c * d.h * d.w * sizeof(double));
    for (std::size_t c = 0; c < d.c; ++c) {
        for (std::size_t ki = 0; ki < k; ++ki) {
            for (std::size_t kj = 0; kj < k; ++kj) {
                const double* src_row = col + ((c * k + ki) * k + kj) * cols;
                for (std::size_t n = 0; n < d.n; ++n) {
                    double* dst_plane = x + (n * d.c + c) * d.h * d.w;
                    const double* src = src_row + n * ohw;
                    for (std::size_t oi = 0; oi < d.oh; ++oi) {
                        const std::ptrdiff_t ih =
                            static_cast<std::ptrdiff_t>(oi * stride + ki) -
                            static_cast<std::ptrdiff_t>(pad);
                        if (ih < 0 || ih >= static_cast<std::ptrdiff_t>(d.h)) continue;
                        double* dst_row = dst_plane + static_cast<std::size_t>(ih) * d.w;
                        const double* s = src + oi * d.ow;
                        for (std::size_t oj = 0; oj < d.ow; ++oj) {
                            const std::ptrdiff_t iw =
                                static_cast<std::ptrdiff_t>(oj * stride + kj) -
                                static_cast<std::ptrdiff_t>(pad);
                            if (iw < 0 || iw >= static_cast<std::ptrdiff_t>(d.w)) continue;
                            dst_row[static_cast<std::size_t>(iw)] += s[oj];
                        }
                    }
                }
            }
        }
    }
}

}  // namespace

// ---------------------------------------------------------------- Conv2d

Conv2d::Conv2d(std::size_t in_ch, std::size_t out_ch, std::size_t k, std::size_t stride,
               std::size_t pad)
    : in_ch_(in_ch), out_ch_(out_ch), k_(k), stride_(stride), pad_(pad) {
    if (in_ch == 0 || out_ch == 0 || k == 0 || stride == 0)
        throw parameter_error("conv: zero dimension");
    weight_ = Tensor({out_ch_, in_ch_, k_, k_});
    bias_ = Tensor({out_ch_});
    dweight_ = Tensor({out_ch_, in_ch_, k_, k_});
    dbias_ = Tensor({out_ch_});
}

std::string Conv2d::describe() const {
    return "conv " + std::to_string(in_ch_) + "->" + std::to_string(out_ch_) + " k" +
           std::to_string(k_) + " s" + std::to_string(stride_) + " p" + std::to_string(pad_);
}

void Conv2d::init_params(Rng& rng) {
    const double fan_in = static_cast<double>(in_ch_ * k_ * k_);
    const double limit = std::sqrt(6.0 / fan_in);
    for (double& w : weight_.v) w = rng.uniform(-limit, limit);
    bias_.fill(0.0);
}

std::vector<std::size_t> Conv2d::output_shape(const std::vector<std::size_t>& in) const {
    const ConvDims d = conv_dims(in, k_, stride_, pad_);
    if (d.c != in_ch_) throw shape_error("conv: channel mismatch");
    return {d.n, out_ch_, d.oh, d.ow};
}

Tensor Conv2d::forward(const Tensor& x, Mode, bool keep_cache, Rng&) {
    const ConvDims d = conv_dims(x.shape, k_, stride_, pad_);
    if (d.c != in_ch_)
        throw shape_error("conv: expected " + std::to_string(in_ch_) + " channels, got " +
                          std::to_string(d.c));
    const std::size_t ohw = d.oh * d.ow;
    const std::size_t cols = d.n * ohw;
    const std::size_t krows = in_ch_ * k_ * k_;

    Tensor col({krows, cols});
    im2col(x.data(), d, k_, stride_, pad_, col.data());

    // res (out_ch, N*oh*ow) = W (out_ch, krows) * col
    Tensor res({out_ch_, cols});
    dgemm(false, false, out_ch_, cols, krows, 1.0, weight_.data(), krows, col.data(), cols, 0.0,
          res.data(), cols);

    Tensor y({d.n, out_ch_, d.oh, d.ow});
    for (std::size_t oc = 0; oc < out_ch_; ++oc) {
        const double b = bias_.v[oc];
        const double* src = res.data() + oc * cols;
        for (std::size_t n = 0; n < d.n; ++n) {
            double* dst = y.data() + (n * out_ch_ + oc) * ohw;
            const double* s = src + n * ohw;
            for (std::size_t i = 0; i < ohw; ++i) dst[i] = s[i] + b;
        }
    }

    if (keep_cache) {
        col_ = std::move(col);
        in_shape_ = x.shape;
        out_ = y;
        has_cache_ = true;
    }
    return y;
}

Tensor Conv2d::backward(const Tensor& dy) {
    if (!has_cache_) throw state_error("conv backward without retained forward");
    const ConvDims d = conv_dims(in_shape_, k_, stride_, pad_);
    const std::size_t ohw = d.oh * d.ow;
    const std::size_t cols = d.n * ohw;
    const std::size_t krows = in_ch_ * k_ * k_;
    if (dy.shape != std::vector<std::size_t>{d.n, out_ch_, d.oh, d.ow})
        throw shape_error("conv backward: gradient shape mismatch");

    // regroup dy to (out_ch, N*oh*ow)
    Tensor dy_mat({out_ch_, cols});
    for (std::size_t oc = 0; oc < out_ch_; ++oc) {
        double* dst = dy_mat.data() + oc * cols;
        for (std::size_t n = 0; n < d.n; ++n) {
            const double* src = dy.data() + (n * out_ch_ + oc) * ohw;
            std::memcpy(dst + n * ohw, src, ohw * sizeof(double));
        }
    }

    // dW += dy_mat * col^T ; db += row sums
    dgemm(false, true, out_ch_, krows, cols, 1.0, dy_mat.data(), cols, col_.data(), cols, 1.0,
          dweight_.data(), krows);
    for (std::size_t oc = 0; oc < out_ch_; ++oc) {
        const double* src = dy_mat.data() + oc * cols;
        double acc = 0.0;
        for (std::size_t i = 0; i < cols; ++i) acc += src[i];
        dbias_.v[oc] += acc;
    }

    // dcol = W^T * dy_mat ; dx = col2im(dcol)
    Tensor dcol({krows, cols});
    dgemm(true, false, krows, cols, out_ch_, 1.0, weight_.data(), krows, dy_mat.data(), cols, 0.0,
          dcol.data(), cols);
    Tensor dx(in_shape_);
    col2im(dcol.data(), d, k_, stride_, pad_, dx.data());
    return dx;
}

void Conv2d::clear_cache() {
    Layer::clear_cache();
    col_ = Tensor();
    in_shape_.clear();
}

// ------------------------------------------------------------- BatchNorm

BatchNorm::BatchNorm(std::size_t features, double eps, double momentum)
    : features_(features), eps_(eps), momentum_(momentum) {
    if (features == 0) throw parameter_error("batch norm: zero features");
    gamma_ = Tensor({features_});
    gamma_.fill(1.0);
    beta_ = Tensor({features_});
    dgamma_ = Tensor({features_});
    dbeta_ = Tensor({features_});
    running_mean_ = Tensor({features_});
    running_var_ = Tensor({features_});
    running_var_.fill(1.0);
}

std::string BatchNorm::describe() const { return "bn " + std::to_string(features_); }

namespace {
// iterate (N,C,H,W) or (N,D) per feature; f(feature, flat_index)
template <typename F>
void for_each_feature(const std::vector<std::size_t>& shape, std::size_t features, F&& f) {
    if (shape.size() == 4) {
        const std::size_t n = shape[0], c = shape[1], hw = shape[2] * shape[3];
        if (c != features) throw shape_error("batch norm: channel mismatch");
        for (std::size_t ni = 0; ni < n; ++ni)
            for (std::size_t ci = 0; ci < c; ++ci) {
                const std::size_t base = (ni * c + ci) * hw;
                for (std::size_t i = 0; i < hw; ++i) f(ci, base + i);
            }
    } else if (shape.size() == 2) {
        if (shape[1] != features) throw shape_error("batch norm: feature mismatch");
        for (std::size_t ni = 0; ni < shape[0]; ++ni)
            for (std::size_t di = 0; di < shape[1]; ++di) f(di, ni * shape[1] + di);
    } else {
        throw shape_error("batch norm expects a (N,C,H,W) or (N,D) tensor");
    }
}

std::size_t per_feature_count(const std::vector<std::size_t>& shape) {
    return shape.size() == 4 ? shape[0] * shape[2] * shape[3] : shape[0];
}
}  // namespace

Tensor BatchNorm::forward(const Tensor& x, Mode mode, bool keep_cache, Rng&) {
    Tensor y(x.shape);
    const std::size_t m = per_feature_count(x.shape);
    std::vector<double> mean(features_, 0.0), var(features_, 0.0);

    if (mode == Mode::train) {
        for_each_feature(x.shape, features_, [&](std::size_t c, std::size_t i) {
            mean[c] += x.v[i];
        });
        for (double& v : mean) v /= static_cast<double>(m);
        for_each_feature(x.shape, features_, [&](std::size_t c, std::size_t i) {
            const double d = x.v[i] - mean[c];
            var[c] += d * d;
        });
        for (double& v : var) v /= static_cast<double>(m);
        for (std::size_t c = 0; c < features_; ++c) {
            running_mean_.v[c] = (1.0 - momentum_) * running_mean_.v[c] + momentum_ * mean[c];
            running_var_.v[c] = (1.0 - momentum_) * running_var_.v[c] + momentum_ * var[c];
        }
    } else {
        mean = running_mean_.v;
        var = running_var_.v;
    }

    std::vector<double> invstd(features_);
    for (std::size_t c = 0; c < features_; ++c) invstd[c] = 1.0 / std::sqrt(var[c] + eps_);

    Tensor xhat(x.shape);
    for_each_feature(x.shape, features_, [&](std::size_t c, std::size_t i) {
        xhat.v[i] = (x.v[i] - mean[c]) * invstd[c];
        y.v[i] = gamma_.v[c] * xhat.v[i] + beta_.v[c];
    });

    if (keep_cache) {
        xhat_ = std::move(xhat);
        invstd_ = std::move(invstd);
        fwd_mode_ = mode;
        in_shape_ = x.shape;
        out_ = y;
        has_cache_ = true;
    }
    return y;
}

Tensor BatchNorm::backward(const Tensor& dy) {
    if (!has_cache_) throw state_error("batch norm backward without retained forward");
    if (dy.shape != in_shape_) throw shape_error("batch norm backward: shape mismatch");

    const std::size_t m = per_feature_count(in_shape_);
    std::vector<double> sum_dy(features_, 0.0), sum_dy_xhat(features_, 0.0);
    for_each_feature(in_shape_, features_, [&](std::size_t c, std::size_t i) {
        sum_dy[c] += dy.v[i];
        sum_dy_xhat[c] += dy.v[i] * xhat_.v[i];
    });
    for (std::size_t c = 0; c < features_; ++c) {
        dbeta_.v[c] += sum_dy[c];
        dgamma_.v[c] += sum_dy_xhat[c];
    }

    Tensor dx(in_shape_);
    if (fwd_mode_ == Mode::train) {
        const double inv_m = 1.0 / static_cast<double>(m);
        for_each_feature(in_shape_, features_, [&](std::size_t c, std::size_t i) {
            dx.v[i] = gamma_.v[c] * invstd_[c] *
                      (dy.v[i] - inv_m * sum_dy[c] - inv_m * xhat_.v[i] * sum_dy_xhat[c]);
        });
    } else {
        // eval-mode normalization is a fixed affine map
        for_each_feature(in_shape_, features_, [&](std::size_t c, std::size_t i) {
            dx.v[i] = gamma_.v[c] * invstd_[c] * dy.v[i];
        });
    }
    return dx;
}

void BatchNorm::clear_cache() {
    Layer::clear_cache();
    xhat_ = Tensor();
    invstd_.clear();
    in_shape_.clear();
}

// ------------------------------------------------------------------ ReLU

Tensor ReLU::forward(const Tensor& x, Mode, bool keep_cache, Rng&) {
    Tensor y(x.shape);
    for (std::size_t i = 0; i < x.v.size(); ++i) y.v[i] = x.v[i] > 0.0 ? x.v[i] : 0.0;
    if (keep_cache) {
        out_ = y;
        has_cache_ = true;
    }
    return y;
}

Tensor ReLU::backward(const Tensor& dy) {
    if (!has_cache_) throw state_error("relu backward without retained forward");
    if (dy.shape != out_.shape) throw shape_error("relu backward: shape mismatch");
    Tensor dx(dy.shape);
    for (std::size_t i = 0; i < dy.v.size(); ++i) dx.v[i] = out_.v[i] > 0.0 ? dy.v[i] : 0.0;
    return dx;
}

// --------------------------------------------------------------- MaxPool

MaxPool::MaxPool(std::size_t k, std::size_t stride) : k_(k), stride_(stride) {
    if (k == 0 || stride == 0) throw parameter_error("max pool: zero dimension");
}

std::string MaxPool::describe() const {
    return "maxpool k" + std::to_string(k_) + " s" + std::to_string(stride_);
}

std::vector<std::size_t> MaxPool::output_shape(const std::vector<std::size_t>& in) const {
    if (in.size() != 4) throw shape_error("max pool expects a (N, C, H, W) tensor");
    if (in[2] < k_ || in[3] < k_)
        throw shape_error("max pool: input " + std::to_string(in[2]) + "x" +
                          std::to_string(in[3]) + " smaller than window");
    return {in[0], in[1], (in[2] - k_) / stride_ + 1, (in[3] - k_) / stride_ + 1};
}

Tensor MaxPool::forward(const Tensor& x, Mode, bool keep_cache, Rng&) {
    const auto os = output_shape(x.shape);
    const std::size_t n = os[0], c = os[1], oh = os[2], ow = os[3];
    const std::size_t h = x.shape[2], w = x.shape[3];

    Tensor y({n, c, oh, ow});
    std::vector<std::size_t> argmax(y.size());
    std::size_t oidx = 0;
    for (std::size_t ni = 0; ni < n; ++ni) {
        for (std::size_t ci = 0; ci < c; ++ci) {
            const double* plane = x.data() + (ni * c + ci) * h * w;
            const std::size_t plane_base = (ni * c + ci) * h * w;
            for (std::size_t oi = 0; oi < oh; ++oi) {
                for (std::size_t oj = 0; oj < ow; ++oj, ++oidx) {
                    const std::size_t i0 = oi * stride_, j0 = oj * stride_;
                    double best = plane[i0 * w + j0];
                    std::size_t best_idx = i0 * w + j0;
                    for (std::size_t di = 0; di < k_; ++di) {
                        const double* row = plane + (i0 + di) * w + j0;
                        for (std::size_t dj = 0; dj < k_; ++dj) {
                            if (row[dj] > best) {
                                best = row[dj];
                                best_idx = (i0 + di) * w + (j0 + dj);
                            }
                        }
                    }
                    y.v[oidx] = best;
                    argmax[oidx] = plane_base + best_idx;
                }
            }
        }
    }
    if (keep_cache) {
        argmax_ = std::move(argmax);
        in_shape_ = x.shape;
        out_ = y;
        has_cache_ = true;
    }
    return y;
}

Tensor MaxPool::backward(const Tensor& dy) {
    if (!has_cache_) throw state_error("max pool backward without retained forward");
    if (dy.shape != out_.shape) throw shape_error("max pool backward: shape mismatch");
    Tensor dx(in_shape_);
    for (std::size_t i = 0; i < dy.v.size(); ++i) dx.v[argmax_[i]] += dy.v[i];
    return dx;
}

void MaxPool::clear_cache() {
    Layer::clear_cache();
    argmax_.clear();
    in_shape_.clear();
}

// --------------------------------------------------------------- Flatten

std::vector<std::size_t> Flatten::output_shape(const std::vector<std::size_t>& in) const {
    if (in.size() < 2) throw shape_error("flatten expects at least 2 dims");
    std::size_t rest = 1;
    for (std::size_t i = 1; i < in.size(); ++i) rest *= in[i];
    return {in[0], rest};
}

Tensor Flatten::forward(const Tensor& x, Mode, bool keep_cache, Rng&) {
    Tensor y = x;
    y.reshape(output_shape(x.shape));
    if (keep_cache) {
        in_shape_ = x.shape;
        out_ = y;
        has_cache_ = true;
    }
    return y;
}

Tensor Flatten::backward(const Tensor& dy) {
    if (!has_cache_) throw state_error("flatten backward without retained forward");
    Tensor dx = dy;
    dx.reshape(in_shape_);
    return dx;
}

// --------------------------------------------------------------- Dropout

Dropout::Dropout(double p) : p_(p) {
    if (p < 0.0 || p >= 1.0) throw parameter_error("dropout: p must be in [0, 1)");
}

std::string Dropout::describe() const { return "dropout p=" + std::to_string(p_); }

Tensor Dropout::forward(const Tensor& x, Mode mode, bool keep_cache, Rng& rng) {
    if (mode == Mode::eval) {
        // inverted scaling at train time makes eval the identity
        if (keep_cache) {
            mask_.clear();
            out_ = x;
            has_cache_ = true;
        }
        return x;
    }
    const double keep = 1.0 - p_;
    Tensor y(x.shape);
    std::vector<double> mask(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        mask[i] = rng.uniform() < keep ? 1.0 / keep : 0.0;
        y.v[i] = x.v[i] * mask[i];
    }
    if (keep_cache) {
        mask_ = std::move(mask);
        out_ = y;
        has_cache_ = true;
    }
    return y;
}

Tensor Dropout::backward(const Tensor& dy) {
    if (!has_cache_) throw state_error("dropout backward without retained forward");
    if (mask_.empty()) return dy;  // eval-mode identity
    Tensor dx(dy.shape);
    for (std::size_t i = 0; i < dy.v.size(); ++i) dx.v[i] = dy.v[i] * mask_[i];
    return dx;
}

void Dropout::clear_cache() {
    Layer::clear_cache();
    mask_.clear();
}

// ---------------------------------------------------------------- Linear

Linear::Linear(std::size_t in, std::size_t out) : n_in_(in), n_out_(out) {
    if (in == 0 || out == 0) throw parameter_error("linear: zero dimension");
    weight_ = Tensor({n_out_, n_in_});
    bias_ = Tensor({n_out_});
    dweight_ = Tensor({n_out_, n_in_});
    dbias_ = Tensor({n_out_});
}

std::string Linear::describe() const {
    return "fc " + std::to_string(n_in_) + "->" + std::to_string(n_out_);
}

void Linear::init_params(Rng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(n_in_));
    for (double& w : weight_.v) w = rng.uniform(-limit, limit);
    bias_.fill(0.0);
}

std::vector<std::size_t> Linear::output_shape(const std::vector<std::size_t>& in) const {
    if (in.size() != 2 || in[1] != n_in_)
        throw shape_error("linear: expected (N, " + std::to_string(n_in_) + ") input");
    return {in[0], n_out_};
}

Tensor Linear::forward(const Tensor& x, Mode, bool keep_cache, Rng&) {
    const auto os = output_shape(x.shape);
    const std::size_t n = os[0];
    Tensor y({n, n_out_});
    // y = x * W^T
    dgemm(false, true, n, n_out_, n_in_, 1.0, x.data(), n_in_, weight_.data(), n_in_, 0.0,
          y.data(), n_out_);
    for (std::size_t ni = 0; ni < n; ++ni)
        for (std::size_t o = 0; o < n_out_; ++o) y.v[ni * n_out_ + o] += bias_.v[o];
    if (keep_cache) {
        in_cache_ = x;
        out_ = y;
        has_cache_ = true;
    }
    return y;
}

Tensor Linear::backward(const Tensor& dy) {
    if (!has_cache_) throw state_error("linear backward without retained forward");
    const std::size_t n = in_cache_.shape[0];
    if (dy.shape != std::vector<std::size_t>{n, n_out_})
        throw shape_error("linear backward: gradient shape mismatch");

    // dW += dy^T * x ; dx = dy * W ; db += column sums of dy
    dgemm(true, false, n_out_, n_in_, n, 1.0, dy.data(), n_out_, in_cache_.data(), n_in_, 1.0,
          dweight_.data(), n_in_);
    Tensor dx({n, n_in_});
    dgemm(false, false, n, n_in_, n_out_, 1.0, dy.data(), n_out_, weight_.data(), n_in_, 0.0,
          dx.data(), n_in_);
    for (std::size_t ni = 0; ni < n; ++ni)
        for (std::size_t o = 0; o < n_out_; ++o) dbias_.v[o] += dy.v[ni * n_out_ + o];
    return dx;
}

void Linear::clear_cache() {
    Layer::clear_cache();
    in_cache_ = Tensor();
}

// --------------------------------------------------------- GlobalAvgPool

std::vector<std::size_t> GlobalAvgPool::output_shape(const std::vector<std::size_t>& in) const {
    if (in.size() != 4) throw shape_error("global average pool expects a (N, C, H, W) tensor");
    return {in[0], in[1]};
}

Tensor GlobalAvgPool::forward(const Tensor& x, Mode, bool keep_cache, Rng&) {
    const auto os = output_shape(x.shape);
    const std::size_t n = os[0], c = os[1], hw = x.shape[2] * x.shape[3];
    Tensor y({n, c});
    for (std::size_t ni = 0; ni < n; ++ni) {
        for (std::size_t ci = 0; ci < c; ++ci) {
            const double* plane = x.data() + (ni * c + ci) * hw;
            double acc = 0.0;
            for (std::size_t i = 0; i < hw; ++i) acc += plane[i];
            y.v[ni * c + ci] = acc / static_cast<double>(hw);
        }
    }
    pixels_ = hw;
    if (keep_cache) {
        in_shape_ = x.shape;
        out_ = y;
        has_cache_ = true;
    }
    return y;
}

Tensor GlobalAvgPool::backward(const Tensor& dy) {
    if (!has_cache_) throw state_error("global average pool backward without retained forward");
    const std::size_t n = in_shape_[0], c = in_shape_[1], hw = in_shape_[2] * in_shape_[3];
    if (dy.shape != std::vector<std::size_t>{n, c})
        throw shape_error("global average pool backward: shape mismatch");
    Tensor dx(in_shape_);
    const double inv = 1.0 / static_cast<double>(hw);
    for (std::size_t ni = 0; ni < n; ++ni)
        for (std::size_t ci = 0; ci < c; ++ci) {
            const double g = dy.v[ni * c + ci] * inv;
            double* plane = dx.data() + (ni * c + ci) * hw;
            for (std::size_t i = 0; i < hw; ++i) plane[i] = g;
        }
    return dx;
}

// --------------------------------------------------------------- Softmax

Tensor Softmax::forward(const Tensor& x, Mode, bool keep_cache, Rng&) {
    if (x.shape.size() != 2) throw shape_error("softmax expects a (N, D) tensor");
    const std::size_t n = x.shape[0], d = x.shape[1];
    Tensor y(x.shape);
    for (std::size_t ni = 0; ni < n; ++ni) {
        const double* row = x.data() + ni * d;
        double* out = y.data() + ni * d;
        double mx = row[0];
        for (std::size_t i = 1; i < d; ++i) mx = std::max(mx, row[i]);
        double sum = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            out[i] = std::exp(row[i] - mx);
            sum += out[i];
        }
        for (std::size_t i = 0; i < d; ++i) out[i] /= sum;
    }
    if (keep_cache) {
        out_ = y;
        has_cache_ = true;
    }
    return y;
}

Tensor Softmax::backward(const Tensor& dy) {
    if (!has_cache_) throw state_error("softmax backward without retained forward");
    if (dy.shape != out_.shape) throw shape_error("softmax backward: shape mismatch");
    const std::size_t n = out_.shape[0], d = out_.shape[1];
    Tensor dx(dy.shape);
    for (std::size_t ni = 0; ni < n; ++ni) {
        const double* y = out_.data() + ni * d;
        const double* g = dy.data() + ni * d;
        double dot = 0.0;
        for (std::size_t i = 0; i < d; ++i) dot += g[i] * y[i];
        double* out = dx.data() + ni * d;
        for (std::size_t i = 0; i < d; ++i) out[i] = y[i] * (g[i] - dot);
    }
    return dx;
}

}  // namespace asc
