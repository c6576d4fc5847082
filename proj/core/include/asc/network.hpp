#pragma once

#include <array>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "asc/layers.hpp"
#include "asc/matrix.hpp"

namespace asc {

enum class Arch { fc, gap };
const char* arch_name(Arch a);
Arch parse_arch(const std::string& name);

// An ordered layer stack plus everything needed to run, train and inspect
// it: parameters live in the layers, retained activations are the CAM/
// backprop cache.
class Network {
public:
    Network(std::array<std::size_t, 3> input_shape, std::vector<std::unique_ptr<Layer>> layers,
            std::uint64_t seed = 0);

    // conv trunk shared by both models: 64-pool-192-pool-384-256-256-pool,
    // then flatten + two 2048-wide FC blocks (fc) or GAP + linear head (gap).
    static Network cnn_fc(std::size_t n_classes, std::size_t frames, std::size_t bins,
                          std::uint64_t seed = 0);
    static Network cnn_gap(std::size_t n_classes, std::size_t frames, std::size_t bins,
                           std::uint64_t seed = 0);
    static Network build(Arch arch, std::size_t n_classes, std::size_t frames, std::size_t bins,
                         std::uint64_t seed = 0);

    Mode mode() const { return mode_; }
    void set_mode(Mode m) { mode_ = m; }

    // Single-feature forward; returns the class probability vector. With
    // retain, every layer keeps the activations backprop and CAM need.
    std::vector<double> forward(const LogMelImage& img, bool retain = false);

    // Batched forward over (N, C, H, W); returns probabilities (N, classes).
    Tensor forward_batch(const Tensor& x, bool retain);

    // Pre-softmax scores of the most recent retained forward.
    const Tensor& logits() const;

    // Backpropagates a gradient seeded at the logits through every layer
    // below the softmax, accumulating parameter gradients. If capture_layer
    // is the index of a layer, returns the gradient w.r.t. that layer's
    // output; otherwise returns the gradient w.r.t. the network input.
    Tensor backward_from_logits(const Tensor& dlogits, std::ptrdiff_t capture_layer = -1);

    std::size_t layer_count() const { return layers_.size(); }
    Layer& layer(std::size_t i) { return *layers_.at(i); }
    const Layer& layer(std::size_t i) const { return *layers_.at(i); }

    // Index of the last trunk activation (the final MaxPool output), the
    // default tap for class activation maps.
    std::size_t trunk_output_layer() const;
    // Index of the GlobalAvgPool layer, or npos for architectures without one.
    std::size_t gap_layer() const;
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    std::array<std::size_t, 3> input_shape() const { return input_shape_; }
    std::size_t n_classes() const;
    std::size_t param_count() const;

    std::vector<Tensor*> all_params();
    std::vector<Tensor*> all_grads();
    void zero_grads();
    void clear_caches();

    Rng& rng() { return rng_; }
    void reseed(std::uint64_t seed) { rng_ = Rng(seed); }

    // Checkpoint: "SLNN" magic, version, input shape, tagged layer records,
    // then parameter and running-stat tensors in declaration order (f64 LE).
    void save(const std::filesystem::path& path) const;
    static Network load(const std::filesystem::path& path);

    std::string summary() const;

private:
    std::array<std::size_t, 3> input_shape_;
    std::vector<std::unique_ptr<Layer>> layers_;
    Mode mode_ = Mode::eval;
    Rng rng_;
    bool has_retained_ = false;
};

// Number of BLAS threads used by the heavy layers; 1 (the default) keeps
// every run bit-reproducible.
void set_num_threads(int n);
int num_threads();

}  // namespace asc
