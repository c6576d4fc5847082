#pragma once

#include <map>
#include <string>
#include <vector>

#include "asc/dataset.hpp"
#include "asc/dsp.hpp"
#include "asc/enhance.hpp"
#include "asc/network.hpp"
#include "asc/train.hpp"

namespace asc {

struct EvalReport {
    double overall_acc = 0.0;
    std::map<std::string, double> per_class_acc;
    std::vector<std::size_t> confusion;  // row = true label, col = prediction
    std::size_t n_classes = 0;
    std::size_t n_trials = 1;
    std::map<std::string, double> timing;  // label -> seconds (benchmark runs only)

    std::size_t& confusion_at(std::size_t truth, std::size_t pred) {
        return confusion[truth * n_classes + pred];
    }
    std::size_t confusion_at(std::size_t truth, std::size_t pred) const {
        return confusion[truth * n_classes + pred];
    }

    std::string table(const std::vector<std::string>& labels = {}) const;
    // machine-readable key=value lines, one metric per line
    void write_kv(std::ostream& out, const std::vector<std::string>& labels = {}) const;
};

// Feature-pipeline settings shared by training and evaluation runs.
struct PipelineConfig {
    StftConfig stft;
    double seg_s = 1.0;
    double hop_s = 0.5;
    MedianKernel median;
};

// Extracted, enhanced segment features per dataset entry.
struct SampleFeatures {
    std::vector<LogMelImage> segments;
    int label = 0;
};

// segment -> log_mel -> enhance for every entry of a split; enhancement is
// applied to raw log-Mel before any normalization.
std::vector<SampleFeatures> extract_split(const DatasetIndex& idx, const std::string& split,
                                          EnhanceKind kind, const PipelineConfig& cfg);

// Full evaluation pass: segment, extract, enhance, normalize, average the
// per-segment scores, tally a confusion matrix.
EvalReport evaluate(Network& net, const DatasetIndex& idx, const std::string& split,
                    EnhanceKind kind, const NormStats& stats, const PipelineConfig& cfg = {});

// One preprocessing benchmark row: an enhance kind plus (for the median)
// its kernel size.
struct BenchItem {
    EnhanceKind kind = EnhanceKind::DoG;
    MedianKernel median;
    std::string label() const;
};

// Wall-clock seconds per item for enhancing n_images random frames x bins
// images; single-threaded, median of 3 runs over identical inputs.
std::map<std::string, double> bench_preprocess(std::size_t frames, std::size_t bins,
                                               std::size_t n_images,
                                               const std::vector<BenchItem>& items);

// Reference workload rows: DoG, Sobel, median(51,7), median(3,3).
std::vector<BenchItem> default_bench_items();

// Trains `trials` models (seeds cfg.seed, cfg.seed+1, ...) on the train
// split and reports the pooled evaluation confusion. Normalization stats
// are refit per enhancement kind.
EvalReport run_experiment(const DatasetIndex& idx, Arch arch, EnhanceKind kind,
                          const TrainConfig& cfg, std::size_t trials = 3,
                          const PipelineConfig& pipeline = {});

// Accuracy grid over kinds x architectures, one experiment per cell.
struct GridResult {
    std::vector<EnhanceKind> kinds;
    std::vector<Arch> archs;
    std::map<std::string, EvalReport> cells;  // "<kind>/<arch>"

    std::string table() const;
};

GridResult run_grid(const DatasetIndex& idx, const TrainConfig& cfg, std::size_t trials,
                    const std::vector<EnhanceKind>& kinds, const std::vector<Arch>& archs,
                    const PipelineConfig& pipeline = {});

}  // namespace asc
