#pragma once

#include <cstdint>
#include <vector>

#include "asc/matrix.hpp"
#include "asc/network.hpp"

namespace asc {

// SGD-with-momentum recipe. Learning rate decays by 10x after two thirds of
// the epochs (VGG-style step schedule).
struct TrainConfig {
    double lr = 0.01;
    double momentum = 0.9;
    std::size_t batch_size = 64;
    std::size_t epochs = 30;
    std::uint64_t seed = 0;
    double weight_decay = 5e-4;

    void validate() const;
};

struct LabeledFeatures {
    std::vector<LogMelImage> features;
    std::vector<int> labels;  // in [0, n_classes)
};

struct EpochStats {
    double loss = 0.0;
    double accuracy = 0.0;
};

struct TrainLog {
    std::vector<EpochStats> epochs;
};

// Mean cross-entropy of a (N, C) probability tensor against labels.
double cross_entropy(const Tensor& probs, const std::vector<int>& labels, std::size_t offset,
                     std::size_t count);

// Trains net in place. Deterministic for a fixed seed when run with one
// thread: epoch shuffling, dropout and initialization all derive from
// cfg.seed.
TrainLog train(Network& net, const LabeledFeatures& data, const TrainConfig& cfg);

// Mean of per-segment probability vectors; the sample label is its argmax.
std::vector<double> predict_sample(Network& net, const std::vector<LogMelImage>& segments);

std::size_t argmax(const std::vector<double>& v);

}  // namespace asc
