// Command-line front end: extract, enhance, synth, train, evaluate, cam,
// bench. Exit codes: 0 success, 2 usage, 3 I/O, 4 data/shape/parameter.

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>

#include "asc/binio.hpp"
#include "asc/cam.hpp"
#include "asc/dataset.hpp"
#include "asc/dsp.hpp"
#include "asc/enhance.hpp"
#include "asc/errors.hpp"
#include "asc/evaluate.hpp"
#include "asc/network.hpp"
#include "asc/png_io.hpp"
#include "asc/train.hpp"

namespace {

struct GlobalOpts {
    std::uint64_t seed = 0;
    std::string threads = "1";
    bool verbose = false;
};

asc::MedianKernel parse_median_kernel(const std::string& s) {
    const auto comma = s.find(',');
    if (comma == std::string::npos)
        throw asc::parse_error("median kernel must be T,F (e.g. 51,7): " + s);
    try {
        const long t = std::stol(s.substr(0, comma));
        const long f = std::stol(s.substr(comma + 1));
        if (t <= 0 || f <= 0) throw asc::parse_error("median kernel dims must be positive: " + s);
        return {static_cast<std::size_t>(t), static_cast<std::size_t>(f)};
    } catch (const std::invalid_argument&) {
        throw asc::parse_error("median kernel must be numeric T,F: " + s);
    }
}

std::pair<std::size_t, std::size_t> parse_shape(const std::string& s) {
    const auto x = s.find('x');
    if (x == std::string::npos) throw asc::parse_error("shape must be TxM (e.g. 1000x128): " + s);
    try {
        const long t = std::stol(s.substr(0, x));
        const long m = std::stol(s.substr(x + 1));
        if (t <= 0 || m <= 0) throw asc::parse_error("shape dims must be positive: " + s);
        return {static_cast<std::size_t>(t), static_cast<std::size_t>(m)};
    } catch (const std::invalid_argument&) {
        throw asc::parse_error("shape must be numeric TxM: " + s);
    }
}

void add_stft_flags(CLI::App* cmd, asc::StftConfig& stft) {
    cmd->add_option("--window-ms", stft.window_ms, "Analysis window in ms");
    cmd->add_option("--hop-ms", stft.hop_ms, "Window shift in ms");
    cmd->add_option("--fft", stft.fft_len, "FFT length");
    cmd->add_option("--mels", stft.n_mels, "Mel filterbank size");
}

int run(int argc, char** argv) {
    CLI::App app{"Acoustic scene classification pipeline: log-Mel features, "
                 "edge enhancement, CNN training and class activation maps"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may appear after the subcommand
    app.set_help_all_flag("--help-all");

    GlobalOpts g;
    app.add_option("--seed", g.seed, "Default RNG seed for subcommands");
    app.add_option("--threads", g.threads, "BLAS threads: 1 (bit-reproducible) or auto")
        ->check(CLI::IsMember({"1", "auto"}));
    app.add_flag("--verbose", g.verbose, "Chatty progress output");

    // ------------------------------------------------------------ extract
    auto* c_extract = app.add_subcommand("extract", "WAV -> log-Mel feature file");
    std::string x_wav, x_out, x_segdir;
    asc::StftConfig x_stft;
    c_extract->add_option("--wav", x_wav, "Input WAV file")->required();
    c_extract->add_option("--out", x_out, "Output feature file (whole recording)");
    c_extract->add_option("--segments", x_segdir,
                          "Directory for per-segment features (1 s / 0.5 s hop)");
    add_stft_flags(c_extract, x_stft);

    // ------------------------------------------------------------ enhance
    auto* c_enh = app.add_subcommand("enhance", "Apply DoG/Sobel/median enhancement");
    std::string e_in, e_out, e_png, e_kind = "logmel", e_mk = "51,7";
    c_enh->add_option("--in", e_in, "Input feature file")->required();
    c_enh->add_option("--out", e_out, "Output feature file");
    c_enh->add_option("--kind", e_kind, "logmel|dog|sobel|median");
    c_enh->add_option("--median-kernel", e_mk, "Median kernel T,F");
    c_enh->add_option("--png", e_png, "Also write a grayscale raster");

    // -------------------------------------------------------------- synth
    auto* c_synth = app.add_subcommand("synth", "Generate the synthetic texture corpus");
    asc::SynthConfig s_cfg;
    std::string s_out;
    bool s_seed_set = false;
    c_synth->add_option("--classes", s_cfg.n_classes, "Number of scene classes");
    c_synth->add_option("--per-class", s_cfg.samples_per_class, "Samples per class (2:1 split)");
    c_synth->add_option("--sample-s", s_cfg.sample_s, "Sample duration in seconds");
    c_synth->add_option("--sample-rate", s_cfg.sample_rate, "Sample rate in Hz");
    c_synth->add_option("--event-rate", s_cfg.event_rate, "Expected foreground events per sample");
    c_synth->add_option("--seed", s_cfg.seed, "Corpus seed")->each([&](const std::string&) {
        s_seed_set = true;
    });
    c_synth->add_option("--out", s_out, "Output corpus directory")->required();

    // -------------------------------------------------------------- train
    auto* c_train = app.add_subcommand("train", "Train CNN-FC or CNN-GAP on a corpus");
    std::string t_data, t_arch = "gap", t_kind = "logmel", t_out, t_mk = "51,7";
    asc::TrainConfig t_cfg;
    asc::StftConfig t_stft;
    bool t_seed_set = false;
    c_train->add_option("--data", t_data, "Corpus root (with meta.txt)")->required();
    c_train->add_option("--arch", t_arch, "fc|gap");
    c_train->add_option("--feature-kind,--kind", t_kind, "logmel|dog|sobel|median");
    c_train->add_option("--epochs", t_cfg.epochs, "Training epochs");
    c_train->add_option("--lr", t_cfg.lr, "Learning rate");
    c_train->add_option("--batch", t_cfg.batch_size, "Batch size");
    c_train->add_option("--momentum", t_cfg.momentum, "SGD momentum");
    c_train->add_option("--weight-decay", t_cfg.weight_decay, "L2 weight decay");
    c_train->add_option("--seed", t_cfg.seed, "Training seed")->each([&](const std::string&) {
        t_seed_set = true;
    });
    c_train->add_option("--median-kernel", t_mk, "Median kernel T,F");
    c_train->add_option("--out", t_out, "Checkpoint path (stats go to <out>.norm)")->required();
    add_stft_flags(c_train, t_stft);

    // ----------------------------------------------------------- evaluate
    auto* c_eval = app.add_subcommand("evaluate", "Evaluate a checkpoint on a corpus split");
    std::string v_data, v_split = "eval", v_ckpt, v_stats, v_kind = "logmel", v_out, v_mk = "51,7";
    asc::StftConfig v_stft;
    c_eval->add_option("--data", v_data, "Corpus root")->required();
    c_eval->add_option("--split", v_split, "Split tag (train|eval|fold)");
    c_eval->add_option("--ckpt", v_ckpt, "Model checkpoint")->required();
    c_eval->add_option("--stats", v_stats, "Normalization stats (default <ckpt>.norm)");
    c_eval->add_option("--kind", v_kind, "logmel|dog|sobel|median");
    c_eval->add_option("--median-kernel", v_mk, "Median kernel T,F");
    c_eval->add_option("--out", v_out, "Machine-readable report file (key=value lines)");
    add_stft_flags(c_eval, v_stft);

    // ---------------------------------------------------------------- cam
    auto* c_cam = app.add_subcommand("cam", "Render a (Grad-)CAM overlay for one segment");
    std::string m_ckpt, m_wav, m_feat, m_stats, m_kind = "logmel", m_cls = "argmax";
    std::string m_png, m_method = "gradcam", m_mk = "51,7", m_data;
    long m_layer = -1;
    std::size_t m_segment = 0;
    double m_alpha = 0.4, m_quantile = 0.95;
    asc::StftConfig m_stft;
    c_cam->add_option("--ckpt", m_ckpt, "Model checkpoint")->required();
    c_cam->add_option("--wav", m_wav, "Input WAV (uses --segment)");
    c_cam->add_option("--feature", m_feat, "Input feature file (already enhanced)");
    c_cam->add_option("--segment", m_segment, "Segment index within --wav");
    c_cam->add_option("--stats", m_stats, "Normalization stats (default <ckpt>.norm)");
    c_cam->add_option("--kind", m_kind, "Feature kind the model was trained on");
    c_cam->add_option("--median-kernel", m_mk, "Median kernel T,F");
    c_cam->add_option("--class", m_cls, "argmax, a class id, or a label (with --data)");
    c_cam->add_option("--data", m_data, "Corpus root for label name lookup");
    c_cam->add_option("--layer", m_layer, "Activation tap (default: last trunk output)");
    c_cam->add_option("--method", m_method, "gradcam|cam")
        ->check(CLI::IsMember({"gradcam", "cam"}));
    c_cam->add_option("--png", m_png, "Overlay output PNG");
    c_cam->add_option("--alpha", m_alpha, "Overlay opacity");
    c_cam->add_option("--quantile", m_quantile, "High-energy quantile for the event report");
    add_stft_flags(c_cam, m_stft);

    // -------------------------------------------------------------- bench
    auto* c_bench = app.add_subcommand("bench", "Preprocessing benchmark (median of 3 runs)");
    std::size_t b_images = 100;
    std::string b_shape = "1000x128", b_mk = "51,7";
    c_bench->add_option("--images", b_images, "Number of random images");
    c_bench->add_option("--shape", b_shape, "Image shape TxM");
    c_bench->add_option("--median-kernel", b_mk, "Large median kernel T,F");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);  // prints the message or requested help
        return code == 0 ? 0 : 2;
    }

    asc::set_num_threads(g.threads == "auto" ? 0 : 1);

    if (c_extract->parsed()) {
        if (x_out.empty() && x_segdir.empty())
            throw asc::parameter_error("extract: need --out and/or --segments");
        const asc::Waveform w = asc::load_wav(x_wav);
        if (!x_out.empty()) {
            const asc::LogMelImage img = asc::log_mel(w, x_stft);
            asc::write_feature(x_out, img);
            if (g.verbose)
                std::cout << "wrote " << x_out << " (" << img.rows << "x" << img.cols << ")\n";
        }
        if (!x_segdir.empty()) {
            std::filesystem::create_directories(x_segdir);
            const auto segs = asc::segment(w);
            const auto stem = std::filesystem::path(x_wav).stem().string();
            for (std::size_t i = 0; i < segs.size(); ++i) {
                char name[64];
                std::snprintf(name, sizeof(name), "%s_%03zu.slns", stem.c_str(), i);
                asc::write_feature(std::filesystem::path(x_segdir) / name,
                                   asc::log_mel(segs[i], x_stft));
            }
            std::cout << segs.size() << " segments -> " << x_segdir << "\n";
        }
        return 0;
    }

    if (c_enh->parsed()) {
        const asc::LogMelImage img = asc::read_feature(e_in);
        const asc::LogMelImage out =
            asc::enhance(img, asc::parse_enhance_kind(e_kind), parse_median_kernel(e_mk));
        if (!e_out.empty()) asc::write_feature(e_out, out);
        if (!e_png.empty()) asc::write_feature_png(e_png, out);
        if (e_out.empty() && e_png.empty())
            throw asc::parameter_error("enhance: need --out and/or --png");
        return 0;
    }

    if (c_synth->parsed()) {
        if (!s_seed_set) s_cfg.seed = g.seed;
        const asc::DatasetIndex idx = asc::make_synth(s_cfg, s_out);
        std::cout << "synthetic corpus: " << idx.entries.size() << " samples, "
                  << idx.label_set.size() << " classes -> " << s_out << "\n";
        return 0;
    }

    if (c_train->parsed()) {
        if (!t_seed_set) t_cfg.seed = g.seed;
        const asc::DatasetIndex idx = asc::load_dcase_index(t_data);
        asc::PipelineConfig pipeline;
        pipeline.stft = t_stft;
        pipeline.median = parse_median_kernel(t_mk);
        const asc::EnhanceKind kind = asc::parse_enhance_kind(t_kind);

        const auto samples = asc::extract_split(idx, "train", kind, pipeline);
        if (samples.empty()) throw asc::empty_input_error("train: empty train split");
        std::vector<asc::LogMelImage> feats;
        for (const auto& s : samples)
            for (const auto& seg : s.segments) feats.push_back(seg);
        const asc::NormStats stats = asc::fit_norm(feats);

        asc::LabeledFeatures data;
        for (const auto& s : samples)
            for (const auto& seg : s.segments) {
                data.features.push_back(asc::apply_norm(seg, stats));
                data.labels.push_back(s.label);
            }

        asc::Network net = asc::Network::build(asc::parse_arch(t_arch), idx.label_set.size(),
                                               data.features.front().rows,
                                               data.features.front().cols, t_cfg.seed);
        if (g.verbose) std::cout << net.summary();
        const asc::TrainLog log = asc::train(net, data, t_cfg);
        if (g.verbose)
            for (std::size_t e = 0; e < log.epochs.size(); ++e)
                std::cout << "epoch " << e << ": loss " << log.epochs[e].loss << ", acc "
                          << log.epochs[e].accuracy << "\n";

        net.save(t_out);
        asc::write_norm_stats(t_out + ".norm", stats);
        std::cout << "checkpoint -> " << t_out << " (stats " << t_out << ".norm)\n";
        if (!log.epochs.empty())
            std::cout << "final train loss " << log.epochs.back().loss << ", acc "
                      << log.epochs.back().accuracy << "\n";
        return 0;
    }

    if (c_eval->parsed()) {
        const asc::DatasetIndex idx = asc::load_dcase_index(v_data);
        asc::Network net = asc::Network::load(v_ckpt);
        const asc::NormStats stats =
            asc::read_norm_stats(v_stats.empty() ? v_ckpt + ".norm" : v_stats);
        asc::PipelineConfig pipeline;
        pipeline.stft = v_stft;
        pipeline.median = parse_median_kernel(v_mk);
        const asc::EvalReport rep =
            asc::evaluate(net, idx, v_split, asc::parse_enhance_kind(v_kind), stats, pipeline);
        std::cout << rep.table(idx.label_set);
        if (!v_out.empty()) {
            asc::AtomicFile file(v_out);
            rep.write_kv(file.stream(), idx.label_set);
            file.commit();
        }
        return 0;
    }

    if (c_cam->parsed()) {
        if (m_wav.empty() == m_feat.empty())
            throw asc::parameter_error("cam: need exactly one of --wav or --feature");
        asc::Network net = asc::Network::load(m_ckpt);
        const asc::EnhanceKind kind = asc::parse_enhance_kind(m_kind);

        asc::LogMelImage enhanced;
        if (!m_wav.empty()) {
            const asc::Waveform w = asc::load_wav(m_wav);
            const auto segs = asc::segment(w);
            if (m_segment >= segs.size())
                throw asc::parameter_error("cam: segment index " + std::to_string(m_segment) +
                                           " out of range (" + std::to_string(segs.size()) + ")");
            enhanced = asc::enhance(asc::log_mel(segs[m_segment], m_stft), kind,
                                    parse_median_kernel(m_mk));
        } else {
            enhanced = asc::read_feature(m_feat);
        }

        const asc::NormStats stats =
            asc::read_norm_stats(m_stats.empty() ? m_ckpt + ".norm" : m_stats);
        const asc::LogMelImage input = asc::apply_norm(enhanced, stats);

        const std::vector<double> probs = net.forward(input, true);

        int cls;
        if (m_cls == "argmax") {
            cls = static_cast<int>(asc::argmax(probs));
        } else if (!m_cls.empty() && std::isdigit(static_cast<unsigned char>(m_cls[0]))) {
            cls = std::stoi(m_cls);
        } else {
            if (m_data.empty())
                throw asc::parameter_error("cam: class label lookup needs --data");
            cls = static_cast<int>(asc::load_dcase_index(m_data).label_id(m_cls));
        }

        const std::size_t tap =
            m_layer >= 0 ? static_cast<std::size_t>(m_layer) : net.trunk_output_layer();
        const asc::Cam cam = m_method == "cam" ? asc::cam_gap(net, cls)
                                               : asc::grad_cam(net, cls, tap);

        std::cout << "class " << cls << " p=" << probs[static_cast<std::size_t>(cls)]
                  << " map " << cam.map.rows << "x" << cam.map.cols << " (layer "
                  << cam.layer_index << ", Z=" << cam.pixel_count << ")\n";
        const auto rep = asc::event_activation_report(enhanced, cam, m_quantile);
        std::cout << "event activation: high-energy " << rep.high_energy_mean << ", rest "
                  << rep.rest_mean << ", ratio " << rep.ratio << "\n";

        if (!m_png.empty()) {
            asc::write_png(m_png, asc::render_overlay(enhanced, cam, m_alpha));
            std::cout << "overlay -> " << m_png << "\n";
        }
        return 0;
    }

    if (c_bench->parsed()) {
        const auto [frames, bins] = parse_shape(b_shape);
        auto items = asc::default_bench_items();
        items[2].median = parse_median_kernel(b_mk);
        const auto timing = asc::bench_preprocess(frames, bins, b_images, items);
        for (const auto& item : items)
            std::cout << item.label() << ": " << timing.at(item.label()) << " s\n";
        return 0;
    }

    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const asc::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.is_io() ? 3 : 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
