// Acceptance suite: one binary, one pass/fail line per criterion.
//
//   acceptance [N ...]   runs the listed criteria (default: all)
//
// The determinism criterion drives the installed CLI; its path comes from
// the ASC_CLI environment variable.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <vector>

#include "asc/cam.hpp"
#include "asc/dataset.hpp"
#include "asc/dsp.hpp"
#include "asc/enhance.hpp"
#include "asc/evaluate.hpp"
#include "asc/network.hpp"
#include "asc/train.hpp"
#include "gradcheck.hpp"

using namespace asc;
using namespace asc::testing;

namespace {

struct Checker {
    std::vector<std::string> failures;
    std::ostringstream notes;

    void expect(bool ok, const std::string& what) {
        if (!ok) failures.push_back(what);
    }
    void expect_near(double got, double want, double tol, const std::string& what) {
        if (!(std::abs(got - want) <= tol)) {
            std::ostringstream os;
            os << what << " (got " << got << ", want " << want << " +- " << tol << ")";
            failures.push_back(os.str());
        }
    }
};

std::filesystem::path scratch_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "asc_acceptance" / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

std::vector<char> slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

LogMelImage random_feature(std::size_t t, std::size_t m, Rng& rng) {
    LogMelImage img(t, m);
    for (double& x : img.v) x = rng.uniform(-1.0, 1.0);
    return img;
}

// ---------------------------------------------------------------------
// 1. CAM / Grad-CAM identity on random CNN-GAP networks
void criterion_cam_identity(Checker& c) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Network net = Network::cnn_gap(15, 32, 32, seed);
        Rng rng(1000 + seed);
        net.forward(random_feature(32, 32, rng), true);

        const int cls = static_cast<int>(seed % 15);
        const Cam cam = cam_gap(net, cls);
        const Cam gcam = grad_cam(net, cls, net.trunk_output_layer());
        const double z = static_cast<double>(cam.pixel_count);

        double dot = 0.0, na = 0.0, nb = 0.0, max_abs = 0.0, max_dev = 0.0;
        for (std::size_t i = 0; i < cam.map.v.size(); ++i) {
            dot += cam.map.v[i] * gcam.map.v[i];
            na += cam.map.v[i] * cam.map.v[i];
            nb += gcam.map.v[i] * gcam.map.v[i];
            max_abs = std::max(max_abs, std::abs(cam.map.v[i]));
        }
        const double cosine = dot / std::sqrt(na * nb);
        c.expect(cosine >= 1.0 - 1e-9,
                 "cosine(cam, grad_cam) < 1 - 1e-9 at seed " + std::to_string(seed));

        for (std::size_t i = 0; i < cam.map.v.size(); ++i)
            max_dev = std::max(max_dev, std::abs(gcam.map.v[i] * z - cam.map.v[i]));
        c.expect(max_abs > 0.0, "degenerate zero map at seed " + std::to_string(seed));
        c.expect(max_dev <= 1e-8 * max_abs,
                 "elementwise ratio deviates from Z at seed " + std::to_string(seed));

        // explicit ratio constancy on well-conditioned entries
        for (std::size_t i = 0; i < cam.map.v.size(); ++i)
            if (std::abs(cam.map.v[i]) > 1e-6 * max_abs) {
                const double ratio = cam.map.v[i] / gcam.map.v[i];
                if (std::abs(ratio - z) > 1e-6 * z) {
                    c.expect(false, "ratio " + std::to_string(ratio) + " != Z at seed " +
                                        std::to_string(seed));
                    break;
                }
            }
    }
    c.notes << "20 networks, last trunk activation, ratio = Z";
}

// ---------------------------------------------------------------------
// 2. Finite-difference gradient oracle, 50 trials per layer type
void criterion_gradient_oracle(Checker& c) {
    const int trials = 50;
    double worst = 0.0;
    auto run = [&](const std::string& name, auto&& make_layer, auto&& make_input) {
        for (int t = 0; t < trials; ++t) {
            Rng rng(10 * t + 1);
            auto layer = make_layer(rng);
            Tensor x = make_input(rng);
            const double err =
                gradcheck_layer(*layer, std::move(x), Mode::train, 555 + 7 * t);
            worst = std::max(worst, err);
            if (err >= 1e-4) {
                c.expect(false, name + " gradient error " + std::to_string(err) + " at trial " +
                                    std::to_string(t));
                return;
            }
        }
    };

    run("conv", [](Rng& r) { auto l = std::make_unique<Conv2d>(2, 3); l->init_params(r); return l; },
        [](Rng& r) { return random_tensor({2, 2, 6, 6}, r); });
    run("batch_norm_4d", [](Rng&) { return std::make_unique<BatchNorm>(3); },
        [](Rng& r) { return random_tensor({2, 3, 4, 5}, r); });
    run("batch_norm_2d", [](Rng&) { return std::make_unique<BatchNorm>(7); },
        [](Rng& r) { return random_tensor({4, 7}, r); });
    run("relu", [](Rng&) { return std::make_unique<ReLU>(); },
        [](Rng& r) { return distinct_grid_tensor({2, 3, 4, 4}, r); });
    run("max_pool", [](Rng&) { return std::make_unique<MaxPool>(); },
        [](Rng& r) { return distinct_grid_tensor({2, 2, 7, 9}, r); });
    run("flatten", [](Rng&) { return std::make_unique<Flatten>(); },
        [](Rng& r) { return random_tensor({2, 3, 4, 4}, r); });
    run("dropout", [](Rng&) { return std::make_unique<Dropout>(0.5); },
        [](Rng& r) { return random_tensor({2, 10}, r); });
    run("linear", [](Rng& r) { auto l = std::make_unique<Linear>(10, 7); l->init_params(r); return l; },
        [](Rng& r) { return random_tensor({3, 10}, r); });
    run("global_avg_pool", [](Rng&) { return std::make_unique<GlobalAvgPool>(); },
        [](Rng& r) { return random_tensor({2, 3, 5, 6}, r); });
    run("softmax", [](Rng&) { return std::make_unique<Softmax>(); },
        [](Rng& r) { return random_tensor({3, 9}, r); });

    c.notes << "50 trials x 10 layer types, worst relative error " << worst;
}

// ---------------------------------------------------------------------
// 3. Filter oracles
namespace oracle {

std::size_t reflect(std::ptrdiff_t i, std::ptrdiff_t n) {
    if (n == 1) return 0;
    const std::ptrdiff_t period = 2 * n;
    std::ptrdiff_t j = i % period;
    if (j < 0) j += period;
    if (j >= n) j = period - 1 - j;
    return static_cast<std::size_t>(j);
}

Matrix median(const Matrix& img, std::size_t kt, std::size_t kf) {
    const auto rt = static_cast<std::ptrdiff_t>(kt / 2);
    const auto rf = static_cast<std::ptrdiff_t>(kf / 2);
    Matrix out(img.rows, img.cols);
    std::vector<double> window;
    for (std::ptrdiff_t t = 0; t < static_cast<std::ptrdiff_t>(img.rows); ++t)
        for (std::ptrdiff_t m = 0; m < static_cast<std::ptrdiff_t>(img.cols); ++m) {
            window.clear();
            for (std::ptrdiff_t dt = -rt; dt <= rt; ++dt)
                for (std::ptrdiff_t dm = -rf; dm <= rf; ++dm)
                    window.push_back(img.at(reflect(t + dt, img.rows), reflect(m + dm, img.cols)));
            std::sort(window.begin(), window.end());
            out.at(t, m) = window[window.size() / 2];
        }
    return out;
}

Matrix dense_conv(const Matrix& img, const std::vector<std::vector<double>>& k) {
    const auto kr = static_cast<std::ptrdiff_t>(k.size() / 2);
    const auto kc = static_cast<std::ptrdiff_t>(k[0].size() / 2);
    Matrix out(img.rows, img.cols);
    for (std::ptrdiff_t t = 0; t < static_cast<std::ptrdiff_t>(img.rows); ++t)
        for (std::ptrdiff_t m = 0; m < static_cast<std::ptrdiff_t>(img.cols); ++m) {
            double acc = 0.0;
            for (std::ptrdiff_t dt = -kr; dt <= kr; ++dt)
                for (std::ptrdiff_t dm = -kc; dm <= kc; ++dm)
                    acc += k[dt + kr][dm + kc] *
                           img.at(reflect(t + dt, img.rows), reflect(m + dm, img.cols));
            out.at(t, m) = acc;
        }
    return out;
}

// direct Sobel arithmetic: Gx/Gy 3x3 taps, combined magnitude
Matrix sobel(const Matrix& img) {
    const std::vector<std::vector<double>> gx = {{1, 2, 1}, {0, 0, 0}, {-1, -2, -1}};
    const std::vector<std::vector<double>> gy = {{1, 0, -1}, {2, 0, -2}, {1, 0, -1}};
    const Matrix ax = dense_conv(img, gx);
    const Matrix ay = dense_conv(img, gy);
    Matrix out(img.rows, img.cols);
    for (std::size_t i = 0; i < out.v.size(); ++i)
        out.v[i] = std::sqrt(ax.v[i] * ax.v[i] + ay.v[i] * ay.v[i]);
    return out;
}

}  // namespace oracle

void criterion_filter_oracles(Checker& c) {
    Rng rng(42);

    // median vs per-pixel sort oracle on 100 random images, exact
    int mismatches = 0;
    for (int i = 0; i < 100; ++i) {
        const std::size_t rows = 8 + rng.below(20);
        const std::size_t cols = 5 + rng.below(16);
        Matrix img(rows, cols);
        for (double& x : img.v) x = rng.uniform(-4.0, 4.0);
        const auto [kt, kf] = [&]() -> std::pair<std::size_t, std::size_t> {
            switch (i % 4) {
                case 0: return {3, 3};
                case 1: return {5, 3};
                case 2: return {51, 7};
                default: return {7, 5};
            }
        }();
        const Matrix got = median_filter(img, kt, kf);
        const Matrix want = oracle::median(img, kt, kf);
        for (std::size_t j = 0; j < got.v.size(); ++j)
            if (got.v[j] != want.v[j]) ++mismatches;
    }
    c.expect(mismatches == 0,
             "median mismatches sort oracle on " + std::to_string(mismatches) + " pixels");

    // sobel on the hand-computed 5x5 step fixture (rows 0,0,1,1,1 along
    // time): |Gx| = 4 on the step-adjacent rows, 0 elsewhere
    {
        Matrix step(5, 5, 0.0);
        for (std::size_t m = 0; m < 5; ++m)
            for (std::size_t t = 2; t < 5; ++t) step.at(t, m) = 1.0;
        const double expected[5] = {0.0, 4.0, 4.0, 0.0, 0.0};
        const Matrix got = sobel(step);
        for (std::size_t t = 0; t < 5; ++t)
            for (std::size_t m = 0; m < 5; ++m)
                c.expect(std::abs(got.at(t, m) - expected[t]) <= 1e-12,
                         "sobel step fixture at (" + std::to_string(t) + "," +
                             std::to_string(m) + ")");

        // and full agreement with the direct kernel arithmetic on noise
        Matrix noise(5, 5);
        for (double& x : noise.v) x = rng.uniform(-2.0, 2.0);
        const Matrix a = sobel(noise);
        const Matrix b = oracle::sobel(noise);
        for (std::size_t i = 0; i < a.v.size(); ++i)
            c.expect(std::abs(a.v[i] - b.v[i]) <= 1e-12, "sobel vs direct arithmetic");
    }

    // dog: constant and affine ramp vanish in the interior
    {
        const Matrix flat = dog(Matrix(40, 30, 3.7));
        for (double x : flat.v) c.expect(std::abs(x) < 1e-9, "dog(constant) above 1e-9");

        Matrix ramp(60, 40);
        for (std::size_t t = 0; t < ramp.rows; ++t)
            for (std::size_t m = 0; m < ramp.cols; ++m)
                ramp.at(t, m) = 0.2 * static_cast<double>(t) - 0.05 * static_cast<double>(m);
        const Matrix out = dog(ramp);
        for (std::size_t t = 6; t + 6 < ramp.rows; ++t)
            for (std::size_t m = 6; m + 6 < ramp.cols; ++m)
                c.expect(std::abs(out.at(t, m)) < 1e-9, "dog(ramp) interior above 1e-9");
    }

    // gaussian impulse response vs dense 2-D convolution oracle
    {
        Matrix impulse(31, 27, 0.0);
        impulse.at(15, 13) = 1.0;
        for (double sigma : {1.0, std::sqrt(2.0)}) {
            const GaussianKernel k = make_gaussian_kernel(sigma);
            std::vector<std::vector<double>> k2(k.weights.size(),
                                                std::vector<double>(k.weights.size()));
            for (std::size_t i = 0; i < k.weights.size(); ++i)
                for (std::size_t j = 0; j < k.weights.size(); ++j)
                    k2[i][j] = k.weights[i] * k.weights[j];
            const Matrix got = gaussian_blur(impulse, sigma);
            const Matrix want = oracle::dense_conv(impulse, k2);
            for (std::size_t i = 0; i < got.v.size(); ++i)
                c.expect(std::abs(got.v[i] - want.v[i]) <= 1e-12,
                         "gaussian impulse response off the dense oracle");
        }
    }
    c.notes << "median exact on 100 images; sobel/dog/gaussian within stated tolerances";
}

// ---------------------------------------------------------------------
// 4. Shape trace and GAP score decomposition at full geometry
void criterion_shape_trace(Checker& c) {
    Rng rng(4);
    const LogMelImage x = random_feature(100, 128, rng);

    {
        Network fc = Network::cnn_fc(15, 100, 128, 7);
        const std::vector<double> p = fc.forward(x, false);
        c.expect(p.size() == 15, "cnn_fc logit count != 15");
        double sum = 0.0;
        for (double v : p) sum += v;
        c.expect(std::abs(sum - 1.0) < 1e-9, "cnn_fc probabilities do not sum to 1");
    }

    Network gap = Network::cnn_gap(15, 100, 128, 7);
    const std::vector<double> p = gap.forward(x, true);
    c.expect(p.size() == 15, "cnn_gap logit count != 15");

    const std::size_t g = gap.gap_layer();
    const Tensor& maps = gap.layer(g - 1).cached_output();
    const auto& head = static_cast<const Linear&>(gap.layer(g + 1));
    const std::size_t k = maps.shape[1], hw = maps.shape[2] * maps.shape[3];
    for (std::size_t cls = 0; cls < 15; ++cls) {
        double acc = head.bias().v[cls];
        for (std::size_t ki = 0; ki < k; ++ki) {
            const double* plane = maps.data() + ki * hw;
            double mean = 0.0;
            for (std::size_t i = 0; i < hw; ++i) mean += plane[i];
            acc += head.weight().v[cls * k + ki] * (mean / static_cast<double>(hw));
        }
        c.expect(std::abs(acc - gap.logits().v[cls]) < 1e-9,
                 "GAP score decomposition off for class " + std::to_string(cls));
    }
    c.notes << "both architectures at 1x100x128; GAP logits rebuilt from cached maps";
}

// ---------------------------------------------------------------------
// 5. Segmentation count at several rates
void criterion_segmentation(Checker& c) {
    for (std::uint32_t sr : {8000u, 16000u, 22050u, 44100u, 48000u}) {
        Waveform w;
        w.sample_rate = sr;
        w.samples.assign(static_cast<std::size_t>(sr) * 10, 0.0);
        const auto n = segment(w, 1.0, 0.5).size();
        c.expect(n == 19, "10 s at " + std::to_string(sr) + " Hz gave " + std::to_string(n) +
                              " segments (want 19)");
    }
    c.notes << "10 s -> 19 one-second segments at 8/16/22.05/44.1/48 kHz";
}

// ---------------------------------------------------------------------
// 6. Preprocessing benchmark relative contract (reference workload)
void criterion_benchmark(Checker& c) {
    set_num_threads(1);
    const auto timing = bench_preprocess(1000, 128, 100, default_bench_items());
    const double dog_s = timing.at("dog");
    const double sobel_s = timing.at("sobel");
    const double med_big = timing.at("median51x7");
    const double med_small = timing.at("median3x3");

    c.expect(med_big >= 20.0 * dog_s, "median(51,7) not 20x slower than DoG");
    c.expect(med_big >= 20.0 * sobel_s, "median(51,7) not 20x slower than Sobel");
    c.expect(med_small * 5.0 <= med_big, "median(3,3) not 5x faster than median(51,7)");
    c.notes << "100 images of 1000x128: dog " << dog_s << " s, sobel " << sobel_s
            << " s, median51x7 " << med_big << " s, median3x3 " << med_small << " s";
}

// ---------------------------------------------------------------------
// 7. Desk-scale synthetic experiment
void criterion_experiment(Checker& c) {
    set_num_threads(1);
    const auto dir = scratch_dir("experiment");

    SynthConfig synth;
    synth.n_classes = 4;
    synth.samples_per_class = 60;  // 40 train / 20 eval
    synth.sample_s = 1.0;
    synth.sample_rate = 8000;
    synth.seed = 20;
    synth.event_rate = 3.0;
    const DatasetIndex idx = make_synth(synth, dir);
    c.expect(idx.split_entries("train").size() == 160, "train split != 160 samples");
    c.expect(idx.split_entries("eval").size() == 80, "eval split != 80 samples");

    PipelineConfig pipeline;
    pipeline.stft.fft_len = 512;
    pipeline.stft.n_mels = 16;

    // headline run: CNN-GAP on plain log-Mel, 30 epochs
    TrainConfig cfg;
    cfg.epochs = 30;
    cfg.lr = 0.02;
    cfg.batch_size = 16;
    cfg.seed = 1;
    const EvalReport headline =
        run_experiment(idx, Arch::gap, EnhanceKind::LogMel, cfg, 1, pipeline);
    c.expect(headline.overall_acc >= 0.60,
             "CNN-GAP log-Mel accuracy " + std::to_string(headline.overall_acc) + " < 0.60");

    // full grid, shortened epochs: completion and report shape
    TrainConfig grid_cfg = cfg;
    grid_cfg.epochs = 2;
    const GridResult grid = run_grid(
        idx, grid_cfg, 1,
        {EnhanceKind::LogMel, EnhanceKind::DoG, EnhanceKind::Sobel, EnhanceKind::MedianResidual},
        {Arch::fc, Arch::gap}, pipeline);
    c.expect(grid.cells.size() == 8, "grid did not produce 8 cells");
    const std::string table = grid.table();
    for (const char* token : {"CNN-FC", "CNN-GAP", "logmel", "dog", "sobel", "median"})
        c.expect(table.find(token) != std::string::npos,
                 std::string("grid table missing ") + token);

    std::cout << "    headline CNN-GAP log-Mel accuracy (30 epochs): " << headline.overall_acc
              << "\n    grid (2 epochs per cell):\n";
    std::istringstream lines(table);
    for (std::string line; std::getline(lines, line);) std::cout << "      " << line << "\n";
    const double d_gap = grid.cells.at("dog/gap").overall_acc;
    const double s_gap = grid.cells.at("sobel/gap").overall_acc;
    const double l_gap = grid.cells.at("logmel/gap").overall_acc;
    std::cout << "    direction (reported, not asserted): dog" << (d_gap >= l_gap ? ">=" : "<")
              << "logmel, sobel" << (s_gap >= l_gap ? ">=" : "<") << "logmel\n";
    c.notes << "headline acc " << headline.overall_acc << " (chance 0.25), grid 8/8 cells";
}

// ---------------------------------------------------------------------
// 8. End-to-end determinism through the CLI
void criterion_determinism(Checker& c) {
    const char* cli = std::getenv("ASC_CLI");
    if (!cli || !std::filesystem::exists(cli)) {
        c.expect(false, "ASC_CLI does not point at the CLI binary");
        return;
    }
    const auto dir = scratch_dir("determinism");
    const std::string base = dir.string();
    const std::string corpus = base + "/corpus";

    auto sh = [&](const std::string& cmd) {
        const int rc = std::system((cmd + " > /dev/null 2>&1").c_str());
        c.expect(rc == 0, "command failed: " + cmd);
        return rc == 0;
    };

    const std::string q = "\"" + std::string(cli) + "\"";
    if (!sh(q + " synth --classes 2 --per-class 6 --sample-s 1.0 --sample-rate 8000 --seed 5"
                " --out " + corpus))
        return;

    const std::string train_flags =
        " train --data " + corpus +
        " --arch gap --kind logmel --epochs 2 --lr 0.02 --batch 8 --seed 3"
        " --fft 512 --mels 16 --threads 1 --out ";
    const std::string eval_flags = " evaluate --data " + corpus +
                                   " --split eval --kind logmel --fft 512 --mels 16"
                                   " --threads 1 --ckpt ";

    if (!sh(q + train_flags + base + "/a.slnn")) return;
    if (!sh(q + train_flags + base + "/b.slnn")) return;
    if (!sh(q + eval_flags + base + "/a.slnn --out " + base + "/a.report")) return;
    if (!sh(q + eval_flags + base + "/b.slnn --out " + base + "/b.report")) return;

    c.expect(!slurp(base + "/a.slnn").empty(), "empty checkpoint");
    c.expect(slurp(base + "/a.slnn") == slurp(base + "/b.slnn"),
             "checkpoints differ between identical runs");
    c.expect(slurp(base + "/a.slnn.norm") == slurp(base + "/b.slnn.norm"),
             "norm stats differ between identical runs");
    c.expect(slurp(base + "/a.report") == slurp(base + "/b.report"),
             "eval reports differ between identical runs");
    c.notes << "two seeded train+evaluate runs, byte-identical checkpoints and reports";
}

// ---------------------------------------------------------------------
// 9. Overlay contract
void criterion_overlay(Checker& c) {
    Rng rng(9);
    for (int trial = 0; trial < 20; ++trial) {
        const LogMelImage img = random_feature(30, 24, rng);
        const OverlayImage base = render_grayscale(img);

        Cam zero;
        zero.map = Matrix(6, 5, 0.0);
        const OverlayImage z = render_overlay(img, zero, 0.4);
        c.expect(z.rgb == base.rgb, "zero map does not reproduce the grayscale base");

        Cam pos;
        pos.map = Matrix(6, 5, 0.0);
        for (double& v : pos.map.v) v = rng.uniform(0.0, 2.0);  // nonnegative
        const OverlayImage o = render_overlay(img, pos, rng.uniform(0.1, 1.0));
        bool red_ok = true;
        for (std::size_t i = 0; i < o.rgb.size(); i += 3)
            red_ok = red_ok && o.rgb[i] >= base.rgb[i];
        c.expect(red_ok, "positive map decreased a red channel value");
    }
    c.notes << "20 random trials: zero-map identity and red-channel monotonicity";
}

struct Criterion {
    int id;
    const char* name;
    std::function<void(Checker&)> fn;
};

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> criteria = {
        {1, "CAM/Grad-CAM identity (grad_cam = cam_gap / Z)", criterion_cam_identity},
        {2, "gradient oracle (central differences, 50 trials/layer)", criterion_gradient_oracle},
        {3, "filter oracles (median/sobel/dog/gaussian)", criterion_filter_oracles},
        {4, "shape trace and GAP score decomposition at 1x100x128", criterion_shape_trace},
        {5, "segmentation count (10 s -> 19 segments)", criterion_segmentation},
        {6, "preprocessing benchmark relative contract", criterion_benchmark},
        {7, "desk-scale synthetic experiment", criterion_experiment},
        {8, "bit-exact determinism through the CLI", criterion_determinism},
        {9, "overlay rendering contract", criterion_overlay},
    };

    std::vector<int> selected;
    for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));

    bool all_ok = true;
    for (const auto& crit : criteria) {
        if (!selected.empty() &&
            std::find(selected.begin(), selected.end(), crit.id) == selected.end())
            continue;
        Checker c;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            crit.fn(c);
        } catch (const std::exception& e) {
            c.expect(false, std::string("exception: ") + e.what());
        }
        const double sec =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

        if (c.failures.empty()) {
            std::cout << "[PASS] criterion " << crit.id << ": " << crit.name << " ("
                      << c.notes.str() << ") [" << sec << " s]\n";
        } else {
            all_ok = false;
            std::cout << "[FAIL] criterion " << crit.id << ": " << crit.name << " [" << sec
                      << " s]\n";
            for (const auto& f : c.failures) std::cout << "       - " << f << "\n";
        }
    }
    return all_ok ? 0 : 1;
}
