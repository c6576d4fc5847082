#include "asc/network.hpp"

#include <cblas-openblas.h>
#include <fstream>
#include <sstream>
#include <thread>

#include "asc/binio.hpp"
#include "asc/errors.hpp"

namespace asc {

namespace {
int g_threads = 1;
}

void set_num_threads(int n) {
    if (n <= 0) n = static_cast<int>(std::thread::hardware_concurrency());
    if (n <= 0) n = 1;
    g_threads = n;
    openblas_set_num_threads(n);
}

int num_threads() { return g_threads; }

const char* arch_name(Arch a) { return a == Arch::fc ? "fc" : "gap"; }

Arch parse_arch(const std::string& name) {
    if (name == "fc") return Arch::fc;
    if (name == "gap") return Arch::gap;
    throw parse_error("unknown architecture: " + name + " (expected fc|gap)");
}

Network::Network(std::array<std::size_t, 3> input_shape,
                 std::vector<std::unique_ptr<Layer>> layers, std::uint64_t seed)
    : input_shape_(input_shape), layers_(std::move(layers)), rng_(seed) {
    if (layers_.empty()) throw parameter_error("network: no layers");
    // validate the chain and initialize parameters deterministically
    Rng init_rng(Rng::splitmix(seed) ^ 0x5eedf00dULL);
    std::vector<std::size_t> shape = {1, input_shape_[0], input_shape_[1], input_shape_[2]};
    for (auto& l : layers_) {
        shape = l->output_shape(shape);
        l->init_params(init_rng);
    }
    if (layers_.back()->kind() != LayerKind::softmax)
        throw config_error("network must end with a softmax layer");
}

namespace {
std::vector<std::unique_ptr<Layer>> make_trunk() {
    std::vector<std::unique_ptr<Layer>> l;
    auto conv_block = [&](std::size_t in, std::size_t out) {
        l.push_back(std::make_unique<Conv2d>(in, out));
        l.push_back(std::make_unique<BatchNorm>(out));
        l.push_back(std::make_unique<ReLU>());
    };
    conv_block(1, 64);
    l.push_back(std::make_unique<MaxPool>());
    conv_block(64, 192);
    l.push_back(std::make_unique<MaxPool>());
    conv_block(192, 384);
    conv_block(384, 256);
    conv_block(256, 256);
    l.push_back(std::make_unique<MaxPool>());
    return l;
}
}  // namespace

Network Network::cnn_fc(std::size_t n_classes, std::size_t frames, std::size_t bins,
                        std::uint64_t seed) {
    if (frames < 8 || bins < 8) throw shape_error("cnn_fc: input must be at least 8x8");
    auto l = make_trunk();

    // flatten dim after three stride-2 pools
    auto pooled = [](std::size_t n) { return (n - 3) / 2 + 1; };
    const std::size_t fh = pooled(pooled(pooled(frames)));
    const std::size_t fw = pooled(pooled(pooled(bins)));
    const std::size_t flat = 256 * fh * fw;

    l.push_back(std::make_unique<Flatten>());
    l.push_back(std::make_unique<Dropout>(0.5));
    l.push_back(std::make_unique<Linear>(flat, 2048));
    l.push_back(std::make_unique<BatchNorm>(2048));
    l.push_back(std::make_unique<ReLU>());
    l.push_back(std::make_unique<Dropout>(0.5));
    l.push_back(std::make_unique<Linear>(2048, 2048));
    l.push_back(std::make_unique<BatchNorm>(2048));
    l.push_back(std::make_unique<ReLU>());
    l.push_back(std::make_unique<Linear>(2048, n_classes));
    l.push_back(std::make_unique<Softmax>());
    return Network({1, frames, bins}, std::move(l), seed);
}

Network Network::cnn_gap(std::size_t n_classes, std::size_t frames, std::size_t bins,
                         std::uint64_t seed) {
    if (frames < 8 || bins < 8) throw shape_error("cnn_gap: input must be at least 8x8");
    auto l = make_trunk();
    l.push_back(std::make_unique<GlobalAvgPool>());
    l.push_back(std::make_unique<Linear>(256, n_classes));
    l.push_back(std::make_unique<Softmax>());
    return Network({1, frames, bins}, std::move(l), seed);
}

Network Network::build(Arch arch, std::size_t n_classes, std::size_t frames, std::size_t bins,
                       std::uint64_t seed) {
    return arch == Arch::fc ? cnn_fc(n_classes, frames, bins, seed)
                            : cnn_gap(n_classes, frames, bins, seed);
}

std::vector<double> Network::forward(const LogMelImage& img, bool retain) {
    if (img.rows != input_shape_[1] || img.cols != input_shape_[2])
        throw shape_error("forward: feature is " + std::to_string(img.rows) + "x" +
                          std::to_string(img.cols) + ", network expects " +
                          std::to_string(input_shape_[1]) + "x" + std::to_string(input_shape_[2]));
    Tensor x({1, 1, img.rows, img.cols});
    x.v = img.v;
    const Tensor probs = forward_batch(x, retain);
    return probs.v;
}

Tensor Network::forward_batch(const Tensor& x, bool retain) {
    if (x.rank() != 4 || x.shape[1] != input_shape_[0] || x.shape[2] != input_shape_[1] ||
        x.shape[3] != input_shape_[2])
        throw shape_error("forward: input tensor does not match the network input shape");
    const bool keep = retain || mode_ == Mode::train;
    Tensor cur = x;
    for (auto& l : layers_) {
        cur = l->forward(cur, mode_, keep, rng_);
#ifndef NDEBUG
        if (!cur.all_finite())
            throw state_error("non-finite activation after layer: " + l->describe());
#endif
    }
    has_retained_ = keep;
    return cur;
}

const Tensor& Network::logits() const {
    const Layer& last_hidden = *layers_[layers_.size() - 2];
    return last_hidden.cached_output();
}

Tensor Network::backward_from_logits(const Tensor& dlogits, std::ptrdiff_t capture_layer) {
    if (!has_retained_)
        throw state_error("backward requires a forward pass with retained activations");
    Tensor g = dlogits;
    Tensor captured;
    // softmax is the last layer; training and CAM gradients are seeded at
    // its input, so the walk starts just below it
    for (std::ptrdiff_t i = static_cast<std::ptrdiff_t>(layers_.size()) - 2; i >= 0; --i) {
        if (capture_layer == i) captured = g;
        g = layers_[static_cast<std::size_t>(i)]->backward(g);
#ifndef NDEBUG
        if (!g.all_finite())
            throw state_error("non-finite gradient below layer: " +
                              layers_[static_cast<std::size_t>(i)]->describe());
#endif
    }
    return capture_layer >= 0 ? captured : g;
}

std::size_t Network::trunk_output_layer() const {
    std::size_t idx = npos;
    for (std::size_t i = 0; i < layers_.size(); ++i)
        if (layers_[i]->kind() == LayerKind::max_pool) idx = i;
    if (idx == npos) throw state_error("network has no pooling trunk");
    return idx;
}

std::size_t Network::gap_layer() const {
    for (std::size_t i = 0; i < layers_.size(); ++i)
        if (layers_[i]->kind() == LayerKind::global_avg_pool) return i;
    return npos;
}

std::size_t Network::n_classes() const {
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it)
        if ((*it)->kind() == LayerKind::linear)
            return static_cast<const Linear*>(it->get())->out_features();
    throw state_error("network has no output layer");
}

std::size_t Network::param_count() const {
    std::size_t n = 0;
    for (const auto& l : layers_) n += l->param_count();
    return n;
}

std::vector<Tensor*> Network::all_params() {
    std::vector<Tensor*> out;
    for (auto& l : layers_)
        for (Tensor* p : l->params()) out.push_back(p);
    return out;
}

std::vector<Tensor*> Network::all_grads() {
    std::vector<Tensor*> out;
    for (auto& l : layers_)
        for (Tensor* g : l->grads()) out.push_back(g);
    return out;
}

void Network::zero_grads() {
    for (Tensor* g : all_grads()) g->fill(0.0);
}

void Network::clear_caches() {
    for (auto& l : layers_) l->clear_cache();
    has_retained_ = false;
}

std::string Network::summary() const {
    std::ostringstream os;
    os << "input 1x" << input_shape_[1] << "x" << input_shape_[2] << "\n";
    for (std::size_t i = 0; i < layers_.size(); ++i)
        os << i << ": " << layers_[i]->describe() << "\n";
    os << "parameters: " << param_count() << "\n";
    return os.str();
}

// ------------------------------------------------------------ checkpoint

static constexpr char kCkptMagic[4] = {'S', 'L', 'N', 'N'};
static constexpr std::uint32_t kCkptVersion = 1;

void Network::save(const std::filesystem::path& path) const {
    AtomicFile file(path);
    std::ostream& out = file.stream();
    write_magic(out, kCkptMagic);
    write_u32(out, kCkptVersion);
    write_u32(out, static_cast<std::uint32_t>(input_shape_[0]));
    write_u32(out, static_cast<std::uint32_t>(input_shape_[1]));
    write_u32(out, static_cast<std::uint32_t>(input_shape_[2]));
    write_u32(out, static_cast<std::uint32_t>(layers_.size()));

    for (const auto& lp : layers_) {
        Layer& l = *lp;
        out.put(static_cast<char>(l.kind()));
        switch (l.kind()) {
            case LayerKind::conv: {
                auto& c = static_cast<Conv2d&>(l);
                write_u32(out, static_cast<std::uint32_t>(c.in_ch()));
                write_u32(out, static_cast<std::uint32_t>(c.out_ch()));
                write_u32(out, static_cast<std::uint32_t>(c.ksize()));
                write_u32(out, static_cast<std::uint32_t>(c.stride()));
                write_u32(out, static_cast<std::uint32_t>(c.pad()));
                break;
            }
            case LayerKind::batch_norm:
                write_u32(out, static_cast<std::uint32_t>(static_cast<BatchNorm&>(l).features()));
                break;
            case LayerKind::max_pool: {
                auto& p = static_cast<MaxPool&>(l);
                write_u32(out, static_cast<std::uint32_t>(p.ksize()));
                write_u32(out, static_cast<std::uint32_t>(p.stride()));
                break;
            }
            case LayerKind::dropout:
                write_f64(out, static_cast<Dropout&>(l).p());
                break;
            case LayerKind::linear: {
                auto& f = static_cast<Linear&>(l);
                write_u32(out, static_cast<std::uint32_t>(f.in_features()));
                write_u32(out, static_cast<std::uint32_t>(f.out_features()));
                break;
            }
            default:
                break;  // relu, flatten, gap, softmax carry no fields
        }
    }

    for (const auto& lp : layers_) {
        for (Tensor* t : lp->params()) write_f64_array(out, t->data(), t->size());
        for (Tensor* t : lp->extra_state()) write_f64_array(out, t->data(), t->size());
    }
    file.commit();
}

Network Network::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw not_found_error("cannot open checkpoint: " + path.string());
    expect_magic(in, kCkptMagic, path.string());
    const std::uint32_t version = read_u32(in);
    if (version != kCkptVersion)
        throw unsupported_error("unsupported checkpoint version " + std::to_string(version));

    std::array<std::size_t, 3> input_shape{};
    for (auto& d : input_shape) d = read_u32(in);
    const std::uint32_t n_layers = read_u32(in);
    if (n_layers == 0) throw format_error("checkpoint has no layers: " + path.string());

    std::vector<std::unique_ptr<Layer>> layers;
    for (std::uint32_t i = 0; i < n_layers; ++i) {
        const int tag = in.get();
        if (tag < 0) throw format_error("truncated checkpoint: " + path.string());
        switch (static_cast<LayerKind>(tag)) {
            case LayerKind::conv: {
                const std::size_t ic = read_u32(in), oc = read_u32(in), k = read_u32(in),
                                  s = read_u32(in), p = read_u32(in);
                layers.push_back(std::make_unique<Conv2d>(ic, oc, k, s, p));
                break;
            }
            case LayerKind::batch_norm:
                layers.push_back(std::make_unique<BatchNorm>(read_u32(in)));
                break;
            case LayerKind::relu:
                layers.push_back(std::make_unique<ReLU>());
                break;
            case LayerKind::max_pool: {
                const std::size_t k = read_u32(in), s = read_u32(in);
                layers.push_back(std::make_unique<MaxPool>(k, s));
                break;
            }
            case LayerKind::flatten:
                layers.push_back(std::make_unique<Flatten>());
                break;
            case LayerKind::dropout:
                layers.push_back(std::make_unique<Dropout>(read_f64(in)));
                break;
            case LayerKind::linear: {
                const std::size_t fi = read_u32(in), fo = read_u32(in);
                layers.push_back(std::make_unique<Linear>(fi, fo));
                break;
            }
            case LayerKind::global_avg_pool:
                layers.push_back(std::make_unique<GlobalAvgPool>());
                break;
            case LayerKind::softmax:
                layers.push_back(std::make_unique<Softmax>());
                break;
            default:
                throw format_error("unknown layer tag " + std::to_string(tag) + " in " +
                                   path.string());
        }
    }

    Network net(input_shape, std::move(layers));
    for (std::size_t i = 0; i < net.layer_count(); ++i) {
        for (Tensor* t : net.layer(i).params()) read_f64_array(in, t->data(), t->size());
        for (Tensor* t : net.layer(i).extra_state()) read_f64_array(in, t->data(), t->size());
    }
    if (!in) throw format_error("truncated checkpoint tensors: " + path.string());
    return net;
}

}  // namespace asc
