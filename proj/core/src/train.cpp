#include "asc/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "asc/errors.hpp"

namespace asc {

void TrainConfig::validate() const {
    if (lr < 0.0) throw parameter_error("train: lr must be nonnegative");
    if (momentum < 0.0 || momentum >= 1.0) throw parameter_error("train: momentum must be in [0, 1)");
    if (batch_size < 1) throw parameter_error("train: batch_size must be at least 1");
}

double cross_entropy(const Tensor& probs, const std::vector<int>& labels, std::size_t offset,
                     std::size_t count) {
    const std::size_t classes = probs.shape[1];
    double loss = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        const double p = probs.v[i * classes + static_cast<std::size_t>(labels[offset + i])];
        loss += -std::log(std::max(p, 1e-300));
    }
    return loss / static_cast<double>(count);
}

std::size_t argmax(const std::vector<double>& v) {
    return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

TrainLog train(Network& net, const LabeledFeatures& data, const TrainConfig& cfg) {
    cfg.validate();
    if (data.features.empty()) throw empty_input_error("train: no training data");
    if (data.features.size() != data.labels.size())
        throw shape_error("train: feature/label count mismatch");
    const std::size_t classes = net.n_classes();
    for (int l : data.labels)
        if (l < 0 || static_cast<std::size_t>(l) >= classes)
            throw parameter_error("train: label " + std::to_string(l) + " outside [0, " +
                                  std::to_string(classes) + ")");

    const auto in_shape = net.input_shape();
    for (const auto& f : data.features)
        if (f.rows != in_shape[1] || f.cols != in_shape[2])
            throw shape_error("train: feature shape does not match the network input");

    net.set_mode(Mode::train);
    net.reseed(Rng::splitmix(cfg.seed) ^ 0xd201ULL);  // dropout stream
    Rng shuffle_rng(cfg.seed);

    std::vector<Tensor*> params = net.all_params();
    std::vector<Tensor*> grads = net.all_grads();
    std::vector<Tensor> velocity;
    velocity.reserve(params.size());
    for (Tensor* p : params) velocity.emplace_back(p->shape);

    const std::size_t n = data.features.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);

    TrainLog log;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double lr = epoch >= (2 * cfg.epochs) / 3 ? cfg.lr * 0.1 : cfg.lr;
        shuffle_rng.shuffle(order);

        double loss_sum = 0.0;
        std::size_t correct = 0;
        for (std::size_t start = 0; start < n; start += cfg.batch_size) {
            const std::size_t bs = std::min(cfg.batch_size, n - start);

            Tensor x({bs, in_shape[0], in_shape[1], in_shape[2]});
            std::vector<int> batch_labels(bs);
            const std::size_t feat = in_shape[1] * in_shape[2];
            for (std::size_t i = 0; i < bs; ++i) {
                const auto& img = data.features[order[start + i]];
                std::copy(img.v.begin(), img.v.end(), x.v.begin() + i * feat);
                batch_labels[i] = data.labels[order[start + i]];
            }

            net.zero_grads();
            const Tensor probs = net.forward_batch(x, true);
            loss_sum += cross_entropy(probs, batch_labels, 0, bs) * static_cast<double>(bs);
            for (std::size_t i = 0; i < bs; ++i) {
                const double* row = probs.data() + i * classes;
                const std::size_t pred = static_cast<std::size_t>(
                    std::max_element(row, row + classes) - row);
                if (pred == static_cast<std::size_t>(batch_labels[i])) ++correct;
            }

            // softmax + cross-entropy gradient at the logits: (p - onehot)/N
            Tensor dlogits({bs, classes});
            for (std::size_t i = 0; i < bs; ++i)
                for (std::size_t c = 0; c < classes; ++c)
                    dlogits.v[i * classes + c] =
                        (probs.v[i * classes + c] -
                         (c == static_cast<std::size_t>(batch_labels[i]) ? 1.0 : 0.0)) /
                        static_cast<double>(bs);
            net.backward_from_logits(dlogits);

            for (std::size_t pi = 0; pi < params.size(); ++pi) {
                Tensor& p = *params[pi];
                Tensor& g = *grads[pi];
                Tensor& v = velocity[pi];
                for (std::size_t j = 0; j < p.size(); ++j) {
                    v.v[j] = cfg.momentum * v.v[j] + g.v[j] + cfg.weight_decay * p.v[j];
                    p.v[j] -= lr * v.v[j];
                }
            }
        }
        log.epochs.push_back({loss_sum / static_cast<double>(n),
                              static_cast<double>(correct) / static_cast<double>(n)});
    }
    net.clear_caches();
    net.set_mode(Mode::eval);
    return log;
}

std::vector<double> predict_sample(Network& net, const std::vector<LogMelImage>& segments) {
    if (segments.empty()) throw empty_input_error("predict_sample: no segments");
    net.set_mode(Mode::eval);
    std::vector<double> mean;
    for (const auto& seg : segments) {
        const std::vector<double> p = net.forward(seg, false);
        if (mean.empty())
            mean = p;
        else
            for (std::size_t i = 0; i < p.size(); ++i) mean[i] += p[i];
    }
    for (double& x : mean) x /= static_cast<double>(segments.size());
    return mean;
}

}  // namespace asc
