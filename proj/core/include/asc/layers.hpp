#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "asc/rng.hpp"
#include "asc/tensor.hpp"

namespace asc {

enum class Mode { train, eval };

enum class LayerKind : std::uint8_t {
    conv = 1,
    batch_norm = 2,
    relu = 3,
    max_pool = 4,
    flatten = 5,
    dropout = 6,
    linear = 7,
    global_avg_pool = 8,
    softmax = 9,
};

// One network stage. forward() caches whatever backward() and the CAM taps
// need when keep_cache is set; backward() consumes that cache, accumulates
// parameter gradients and returns the gradient w.r.t. its input.
class Layer {
public:
    virtual ~Layer() = default;

    virtual LayerKind kind() const = 0;
    virtual std::string describe() const = 0;

    virtual Tensor forward(const Tensor& x, Mode mode, bool keep_cache, Rng& rng) = 0;
    virtual Tensor backward(const Tensor& dy) = 0;

    virtual std::vector<Tensor*> params() { return {}; }
    virtual std::vector<Tensor*> grads() { return {}; }
    // Non-trained tensors that still belong in a checkpoint (BN running stats).
    virtual std::vector<Tensor*> extra_state() { return {}; }

    virtual std::vector<std::size_t> output_shape(const std::vector<std::size_t>& in) const = 0;

    virtual void init_params(Rng&) {}

    bool has_cache() const { return has_cache_; }
    const Tensor& cached_output() const {
        if (!has_cache_) throw state_error("layer has no retained activations");
        return out_;
    }
    virtual void clear_cache() {
        out_ = Tensor();
        has_cache_ = false;
    }

    std::size_t param_count() const {
        std::size_t n = 0;
        for (const Tensor* p : const_cast<Layer*>(this)->params()) n += p->size();
        return n;
    }

protected:
    Tensor out_;  // retained output
    bool has_cache_ = false;
};

class Conv2d : public Layer {
public:
    Conv2d(std::size_t in_ch, std::size_t out_ch, std::size_t k = 3, std::size_t stride = 1,
           std::size_t pad = 1);

    LayerKind kind() const override { return LayerKind::conv; }
    std::string describe() const override;
    Tensor forward(const Tensor& x, Mode mode, bool keep_cache, Rng& rng) override;
    Tensor backward(const Tensor& dy) override;
    std::vector<Tensor*> params() override { return {&weight_, &bias_}; }
    std::vector<Tensor*> grads() override { return {&dweight_, &dbias_}; }
    std::vector<std::size_t> output_shape(const std::vector<std::size_t>& in) const override;
    void init_params(Rng& rng) override;
    void clear_cache() override;

    std::size_t in_ch() const { return in_ch_; }
    std::size_t out_ch() const { return out_ch_; }
    std::size_t ksize() const { return k_; }
    std::size_t stride() const { return stride_; }
    std::size_t pad() const { return pad_; }

private:
    std::size_t in_ch_, out_ch_, k_, stride_, pad_;
    Tensor weight_;   // (out_ch, in_ch, k, k)
    Tensor bias_;     // (out_ch)
    Tensor dweight_, dbias_;
    Tensor col_;      // im2col of the cached input, (in_ch*k*k, N*oh*ow)
    std::vector<std::size_t> in_shape_;
};

class BatchNorm : public Layer {
public:
    explicit BatchNorm(std::size_t features, double eps = 1e-5, double momentum = 0.1);

    LayerKind kind() const override { return LayerKind::batch_norm; }
    std::string describe() const override;
    Tensor forward(const Tensor& x, Mode mode, bool keep_cache, Rng& rng) override;
    Tensor backward(const Tensor& dy) override;
    std::vector<Tensor*> params() override { return {&gamma_, &beta_}; }
    std::vector<Tensor*> grads() override { return {&dgamma_, &dbeta_}; }
    std::vector<Tensor*> extra_state() override { return {&running_mean_, &running_var_}; }
    std::vector<std::size_t> output_shape(const std::vector<std::size_t>& in) const override {
        return in;
    }
    void clear_cache() override;

    std::size_t features() const { return features_; }

private:
    std::size_t features_;
    double eps_, momentum_;
    Tensor gamma_, beta_, dgamma_, dbeta_;
    Tensor running_mean_, running_var_;
    // backward cache
    Tensor xhat_;
    std::vector<double> invstd_;
    Mode fwd_mode_ = Mode::eval;
    std::vector<std::size_t> in_shape_;
};

class ReLU : public Layer {
public:
    LayerKind kind() const override { return LayerKind::relu; }
    std::string describe() const override { return "relu"; }
    Tensor forward(const Tensor& x, Mode mode, bool keep_cache, Rng& rng) override;
    Tensor backward(const Tensor& dy) override;
    std::vector<std::size_t> output_shape(const std::vector<std::size_t>& in) const override {
        return in;
    }
};

class MaxPool : public Layer {
public:
    explicit MaxPool(std::size_t k = 3, std::size_t stride = 2);

    LayerKind kind() const override { return LayerKind::max_pool; }
    std::string describe() const override;
    Tensor forward(const Tensor& x, Mode mode, bool keep_cache, Rng& rng) override;
    Tensor backward(const Tensor& dy) override;
    std::vector<std::size_t> output_shape(const std::vector<std::size_t>& in) const override;
    void clear_cache() override;

    std::size_t ksize() const { return k_; }
    std::size_t stride() const { return stride_; }

private:
    std::size_t k_, stride_;
    std::vector<std::size_t> argmax_;  // flat input index per output element
    std::vector<std::size_t> in_shape_;
};

class Flatten : public Layer {
public:
    LayerKind kind() const override { return LayerKind::flatten; }
    std::string describe() const override { return "flatten"; }
    Tensor forward(const Tensor& x, Mode mode, bool keep_cache, Rng& rng) override;
    Tensor backward(const Tensor& dy) override;
    std::vector<std::size_t> output_shape(const std::vector<std::size_t>& in) const override;

private:
    std::vector<std::size_t> in_shape_;
};

class Dropout : public Layer {
public:
    explicit Dropout(double p);

    LayerKind kind() const override { return LayerKind::dropout; }
    std::string describe() const override;
    Tensor forward(const Tensor& x, Mode mode, bool keep_cache, Rng& rng) override;
    Tensor backward(const Tensor& dy) override;
    std::vector<std::size_t> output_shape(const std::vector<std::size_t>& in) const override {
        return in;
    }
    void clear_cache() override;

    double p() const { return p_; }

private:
    double p_;
    std::vector<double> mask_;  // 0 or 1/(1-p); empty in eval mode
};

class Linear : public Layer {
public:
    Linear(std::size_t in, std::size_t out);

    LayerKind kind() const override { return LayerKind::linear; }
    std::string describe() const override;
    Tensor forward(const Tensor& x, Mode mode, bool keep_cache, Rng& rng) override;
    Tensor backward(const Tensor& dy) override;
    std::vector<Tensor*> params() override { return {&weight_, &bias_}; }
    std::vector<Tensor*> grads() override { return {&dweight_, &dbias_}; }
    std::vector<std::size_t> output_shape(const std::vector<std::size_t>& in) const override;
    void init_params(Rng& rng) override;
    void clear_cache() override;

    std::size_t in_features() const { return n_in_; }
    std::size_t out_features() const { return n_out_; }
    const Tensor& weight() const { return weight_; }
    const Tensor& bias() const { return bias_; }
    Tensor& weight() { return weight_; }

private:
    std::size_t n_in_, n_out_;
    Tensor weight_;  // (out, in)
    Tensor bias_;    // (out)
    Tensor dweight_, dbias_;
    Tensor in_cache_;
};

class GlobalAvgPool : public Layer {
public:
    LayerKind kind() const override { return LayerKind::global_avg_pool; }
    std::string describe() const override { return "gap"; }
    Tensor forward(const Tensor& x, Mode mode, bool keep_cache, Rng& rng) override;
    Tensor backward(const Tensor& dy) override;
    std::vector<std::size_t> output_shape(const std::vector<std::size_t>& in) const override;

    // spatial pixel count of the most recent forward
    std::size_t pixel_count() const { return pixels_; }

private:
    std::vector<std::size_t> in_shape_;
    std::size_t pixels_ = 0;
};

class Softmax : public Layer {
public:
    LayerKind kind() const override { return LayerKind::softmax; }
    std::string describe() const override { return "softmax"; }
    Tensor forward(const Tensor& x, Mode mode, bool keep_cache, Rng& rng) override;
    Tensor backward(const Tensor& dy) override;
    std::vector<std::size_t> output_shape(const std::vector<std::size_t>& in) const override {
        return in;
    }
};

}  // namespace asc
