#include "asc/evaluate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "asc/errors.hpp"
#include "asc/rng.hpp"

namespace asc {

std::string EvalReport::table(const std::vector<std::string>& labels) const {
    std::ostringstream os;
    os << std::fixed << std::setprecision(3);
    os << "overall accuracy: " << overall_acc << "  (" << n_trials << " trial"
       << (n_trials == 1 ? "" : "s") << ")\n";
    for (const auto& [label, acc] : per_class_acc) os << "  " << label << ": " << acc << "\n";
    if (n_classes > 0 && !confusion.empty()) {
        os << "confusion (rows = truth):\n";
        for (std::size_t r = 0; r < n_classes; ++r) {
            os << "  ";
            if (r < labels.size()) os << std::setw(12) << labels[r] << " ";
            for (std::size_t c = 0; c < n_classes; ++c)
                os << std::setw(5) << confusion_at(r, c);
            os << "\n";
        }
    }
    for (const auto& [label, sec] : timing)
        os << "timing " << label << ": " << std::setprecision(4) << sec << " s\n";
    return os.str();
}

void EvalReport::write_kv(std::ostream& out, const std::vector<std::string>& labels) const {
    out << "overall_acc=" << std::setprecision(17) << overall_acc << "\n";
    out << "n_classes=" << n_classes << "\n";
    out << "n_trials=" << n_trials << "\n";
    for (const auto& [label, acc] : per_class_acc)
        out << "acc." << label << "=" << acc << "\n";
    for (std::size_t r = 0; r < n_classes; ++r)
        for (std::size_t c = 0; c < n_classes; ++c) {
            out << "confusion.";
            if (r < labels.size())
                out << labels[r] << "." << labels[c];
            else
                out << r << "." << c;
            out << "=" << confusion_at(r, c) << "\n";
        }
    for (const auto& [label, sec] : timing) out << "timing." << label << "=" << sec << "\n";
}

std::vector<SampleFeatures> extract_split(const DatasetIndex& idx, const std::string& split,
                                          EnhanceKind kind, const PipelineConfig& cfg) {
    std::vector<SampleFeatures> out;
    for (const auto* e : idx.split_entries(split)) {
        const Waveform w = load_wav(idx.root / e->audio_path);
        SampleFeatures sf;
        sf.label = static_cast<int>(idx.label_id(e->scene_label));
        for (const Waveform& seg : segment(w, cfg.seg_s, cfg.hop_s))
            sf.segments.push_back(enhance(log_mel(seg, cfg.stft), kind, cfg.median));
        out.push_back(std::move(sf));
    }
    return out;
}

namespace {

EvalReport report_from_confusion(std::vector<std::size_t> confusion, std::size_t n_classes,
                                 const std::vector<std::string>& labels, std::size_t trials) {
    EvalReport rep;
    rep.n_classes = n_classes;
    rep.n_trials = trials;
    rep.confusion = std::move(confusion);
    std::size_t total = 0, diag = 0;
    for (std::size_t r = 0; r < n_classes; ++r) {
        std::size_t row = 0, hit = rep.confusion_at(r, r);
        for (std::size_t c = 0; c < n_classes; ++c) row += rep.confusion_at(r, c);
        total += row;
        diag += hit;
        if (r < labels.size() && row > 0)
            rep.per_class_acc[labels[r]] =
                static_cast<double>(hit) / static_cast<double>(row);
    }
    rep.overall_acc = total ? static_cast<double>(diag) / static_cast<double>(total) : 0.0;
    return rep;
}

}  // namespace

EvalReport evaluate(Network& net, const DatasetIndex& idx, const std::string& split,
                    EnhanceKind kind, const NormStats& stats, const PipelineConfig& cfg) {
    const std::size_t n_classes = net.n_classes();
    if (idx.label_set.size() > n_classes)
        throw config_error("evaluate: dataset has " + std::to_string(idx.label_set.size()) +
                           " labels but the network has " + std::to_string(n_classes) +
                           " classes");
    const auto samples = extract_split(idx, split, kind, cfg);
    if (samples.empty()) throw empty_input_error("evaluate: split '" + split + "' is empty");

    std::vector<std::size_t> confusion(n_classes * n_classes, 0);
    net.set_mode(Mode::eval);
    for (const auto& s : samples) {
        std::vector<LogMelImage> normed;
        normed.reserve(s.segments.size());
        for (const auto& seg : s.segments) normed.push_back(apply_norm(seg, stats));
        const std::vector<double> probs = predict_sample(net, normed);
        confusion[static_cast<std::size_t>(s.label) * n_classes + argmax(probs)] += 1;
    }
    return report_from_confusion(std::move(confusion), n_classes, idx.label_set, 1);
}

std::string BenchItem::label() const {
    if (kind == EnhanceKind::MedianResidual)
        return "median" + std::to_string(median.frames) + "x" + std::to_string(median.bins);
    return enhance_kind_name(kind);
}

std::vector<BenchItem> default_bench_items() {
    return {{EnhanceKind::DoG, {}},
            {EnhanceKind::Sobel, {}},
            {EnhanceKind::MedianResidual, {51, 7}},
            {EnhanceKind::MedianResidual, {3, 3}}};
}

std::map<std::string, double> bench_preprocess(std::size_t frames, std::size_t bins,
                                               std::size_t n_images,
                                               const std::vector<BenchItem>& items) {
    if (n_images == 0) throw parameter_error("bench_preprocess: n_images must be positive");
    if (items.empty()) throw parameter_error("bench_preprocess: no kinds given");
    if (frames == 0 || bins == 0) throw parameter_error("bench_preprocess: degenerate shape");

    Rng rng(12345);
    std::vector<Matrix> images(n_images);
    for (auto& img : images) {
        img = Matrix(frames, bins);
        for (double& x : img.v) x = rng.uniform(-5.0, 5.0);
    }

    std::map<std::string, double> timing;
    for (const auto& item : items) {
        double runs[3];
        volatile double sink = 0.0;  // keep the filter work observable
        for (double& run : runs) {
            const auto t0 = std::chrono::steady_clock::now();
            for (const auto& img : images) {
                const Matrix out = enhance(img, item.kind, item.median);
                sink = sink + out.v[0];
            }
            const auto t1 = std::chrono::steady_clock::now();
            run = std::chrono::duration<double>(t1 - t0).count();
        }
        std::sort(runs, runs + 3);
        timing[item.label()] = runs[1];
    }
    return timing;
}

EvalReport run_experiment(const DatasetIndex& idx, Arch arch, EnhanceKind kind,
                          const TrainConfig& cfg, std::size_t trials,
                          const PipelineConfig& pipeline) {
    if (trials == 0) throw parameter_error("run_experiment: trials must be positive");
    const auto train_samples = extract_split(idx, "train", kind, pipeline);
    if (train_samples.empty()) throw empty_input_error("run_experiment: empty train split");

    // normalization statistics come from the training split of this kind
    std::vector<LogMelImage> train_feats;
    for (const auto& s : train_samples)
        for (const auto& seg : s.segments) train_feats.push_back(seg);
    const NormStats stats = fit_norm(train_feats);

    LabeledFeatures data;
    for (const auto& s : train_samples)
        for (const auto& seg : s.segments) {
            data.features.push_back(apply_norm(seg, stats));
            data.labels.push_back(s.label);
        }

    const std::size_t frames = data.features.front().rows;
    const std::size_t bins = data.features.front().cols;
    const std::size_t n_classes = idx.label_set.size();

    std::vector<std::size_t> confusion;
    for (std::size_t t = 0; t < trials; ++t) {
        TrainConfig trial_cfg = cfg;
        trial_cfg.seed = cfg.seed + t;
        Network net = Network::build(arch, n_classes, frames, bins, trial_cfg.seed);
        train(net, data, trial_cfg);
        const EvalReport rep = evaluate(net, idx, "eval", kind, stats, pipeline);
        if (confusion.empty())
            confusion = rep.confusion;
        else
            for (std::size_t i = 0; i < confusion.size(); ++i) confusion[i] += rep.confusion[i];
    }
    return report_from_confusion(std::move(confusion), n_classes, idx.label_set, trials);
}

std::string GridResult::table() const {
    std::ostringstream os;
    os << std::fixed << std::setprecision(3);
    os << std::setw(12) << "feature";
    for (Arch a : archs) os << std::setw(10) << (a == Arch::fc ? "CNN-FC" : "CNN-GAP");
    os << "\n";
    for (EnhanceKind k : kinds) {
        os << std::setw(12) << enhance_kind_name(k);
        for (Arch a : archs) {
            const auto it = cells.find(std::string(enhance_kind_name(k)) + "/" + arch_name(a));
            os << std::setw(10) << (it != cells.end() ? it->second.overall_acc : 0.0);
        }
        os << "\n";
    }
    return os.str();
}

GridResult run_grid(const DatasetIndex& idx, const TrainConfig& cfg, std::size_t trials,
                    const std::vector<EnhanceKind>& kinds, const std::vector<Arch>& archs,
                    const PipelineConfig& pipeline) {
    GridResult grid;
    grid.kinds = kinds;
    grid.archs = archs;
    for (EnhanceKind k : kinds)
        for (Arch a : archs)
            grid.cells[std::string(enhance_kind_name(k)) + "/" + arch_name(a)] =
                run_experiment(idx, a, k, cfg, trials, pipeline);
    return grid;
}

}  // namespace asc
