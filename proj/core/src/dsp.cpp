#include "asc/dsp.hpp"

#include <algorithm>
#include <cmath>

#include "asc/binio.hpp"
#include "asc/errors.hpp"
#include "asc/fft.hpp"

namespace asc {

std::size_t StftConfig::window_samples(std::uint32_t sample_rate) const {
    return static_cast<std::size_t>(std::llround(window_ms * sample_rate / 1000.0));
}

std::size_t StftConfig::hop_samples(std::uint32_t sample_rate) const {
    return static_cast<std::size_t>(std::llround(hop_ms * sample_rate / 1000.0));
}

void StftConfig::validate(std::uint32_t sample_rate) const {
    if (!(window_ms > hop_ms && hop_ms > 0.0))
        throw config_error("stft config requires window_ms > hop_ms > 0");
    if (n_mels < 1) throw config_error("stft config requires n_mels >= 1");
    if (sample_rate == 0) throw parameter_error("sample rate must be positive");
    if (fft_len < window_samples(sample_rate))
        throw config_error("fft_len shorter than the analysis window");
}

Matrix stft_power(const Waveform& seg, const StftConfig& cfg) {
    cfg.validate(seg.sample_rate);
    const std::size_t win = cfg.window_samples(seg.sample_rate);
    const std::size_t hop = cfg.hop_samples(seg.sample_rate);
    if (seg.samples.size() < win)
        throw parameter_error("stft_power: segment shorter than the analysis window");

    // Frame-count policy: pad so T = round(len / hop). For a 1 s segment at
    // the default framing this lands on T = 100, matching the declared
    // network input.
    const std::size_t frames = std::max<std::size_t>(
        1, static_cast<std::size_t>(
               std::llround(static_cast<double>(seg.samples.size()) / static_cast<double>(hop))));
    const std::size_t padded_len = win + (frames - 1) * hop;

    std::vector<double> hann(win);
    for (std::size_t i = 0; i < win; ++i)
        hann[i] = 0.5 - 0.5 * std::cos(2.0 * M_PI * static_cast<double>(i) / static_cast<double>(win));

    std::vector<double> padded(padded_len, 0.0);
    std::copy(seg.samples.begin(), seg.samples.end(), padded.begin());

    Matrix out(frames, cfg.fft_len / 2 + 1);
    std::vector<double> frame(win);
    for (std::size_t f = 0; f < frames; ++f) {
        const double* src = padded.data() + f * hop;
        for (std::size_t i = 0; i < win; ++i) frame[i] = src[i] * hann[i];
        const std::vector<double> power = rfft_power(frame.data(), win, cfg.fft_len);
        std::copy(power.begin(), power.end(), out.row(f));
    }
    return out;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

Matrix mel_filterbank(const StftConfig& cfg, std::uint32_t sample_rate) {
    if (sample_rate == 0) throw parameter_error("mel_filterbank: sample rate must be positive");
    const std::size_t n_bins = cfg.fft_len / 2 + 1;
    const double nyquist = sample_rate / 2.0;
    const double mel_max = hz_to_mel(nyquist);

    // n_mels + 2 edge points, uniformly spaced in mel; filter i spans
    // edges [i, i+2] with its apex at edge i+1.
    std::vector<double> edges_hz(cfg.n_mels + 2);
    for (std::size_t i = 0; i < edges_hz.size(); ++i)
        edges_hz[i] = mel_to_hz(mel_max * static_cast<double>(i) /
                                static_cast<double>(cfg.n_mels + 1));

    Matrix fb(cfg.n_mels, n_bins);
    for (std::size_t m = 0; m < cfg.n_mels; ++m) {
        const double lo = edges_hz[m];
        const double center = edges_hz[m + 1];
        const double hi = edges_hz[m + 2];
        for (std::size_t k = 0; k < n_bins; ++k) {
            const double f = static_cast<double>(k) * sample_rate / static_cast<double>(cfg.fft_len);
            double w = 0.0;
            if (f > lo && f < center)
                w = (f - lo) / (center - lo);
            else if (f >= center && f < hi)
                w = (hi - f) / (hi - center);
            fb.at(m, k) = w;
        }
    }
    return fb;
}

LogMelImage log_mel(const Waveform& seg, const StftConfig& cfg) {
    const Matrix power = stft_power(seg, cfg);
    const Matrix fb = mel_filterbank(cfg, seg.sample_rate);

    LogMelImage out(power.rows, cfg.n_mels);
    for (std::size_t t = 0; t < power.rows; ++t) {
        const double* p = power.row(t);
        for (std::size_t m = 0; m < cfg.n_mels; ++m) {
            const double* w = fb.row(m);
            double acc = 0.0;
            for (std::size_t k = 0; k < power.cols; ++k) acc += w[k] * p[k];
            out.at(t, m) = std::log(acc + kLogFloor);
        }
    }
    return out;
}

NormStats fit_norm(const std::vector<LogMelImage>& features) {
    if (features.empty()) throw empty_input_error("fit_norm: no features");
    const std::size_t bins = features.front().cols;
    for (const auto& f : features)
        if (f.cols != bins) throw shape_error("fit_norm: inconsistent mel bin counts");

    std::vector<double> sum(bins, 0.0), sumsq(bins, 0.0);
    std::size_t n_frames = 0;
    for (const auto& f : features) {
        for (std::size_t t = 0; t < f.rows; ++t) {
            const double* row = f.row(t);
            for (std::size_t m = 0; m < bins; ++m) {
                sum[m] += row[m];
                sumsq[m] += row[m] * row[m];
            }
        }
        n_frames += f.rows;
    }
    if (n_frames == 0) throw empty_input_error("fit_norm: features contain no frames");

    NormStats stats;
    stats.mean.resize(bins);
    stats.std.resize(bins);
    for (std::size_t m = 0; m < bins; ++m) {
        const double mean = sum[m] / static_cast<double>(n_frames);
        const double var = std::max(0.0, sumsq[m] / static_cast<double>(n_frames) - mean * mean);
        stats.mean[m] = mean;
        stats.std[m] = std::max(std::sqrt(var), kStdFloor);
    }
    return stats;
}

LogMelImage apply_norm(const LogMelImage& img, const NormStats& stats) {
    if (img.cols != stats.mean.size() || img.cols != stats.std.size())
        throw shape_error("apply_norm: image has " + std::to_string(img.cols) +
                          " bins, stats have " + std::to_string(stats.mean.size()));
    LogMelImage out(img.rows, img.cols);
    for (std::size_t t = 0; t < img.rows; ++t)
        for (std::size_t m = 0; m < img.cols; ++m)
            out.at(t, m) = (img.at(t, m) - stats.mean[m]) / stats.std[m];
    return out;
}

static constexpr char kFeatureMagic[4] = {'S', 'L', 'N', 'S'};
static constexpr std::uint32_t kFeatureVersion = 1;

void write_feature(const std::filesystem::path& path, const LogMelImage& img) {
    AtomicFile file(path);
    std::ostream& out = file.stream();
    write_magic(out, kFeatureMagic);
    write_u32(out, kFeatureVersion);
    write_u32(out, static_cast<std::uint32_t>(img.rows));
    write_u32(out, static_cast<std::uint32_t>(img.cols));
    write_f64_array(out, img.v.data(), img.v.size());
    file.commit();
}

LogMelImage read_feature(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw not_found_error("cannot open feature file: " + path.string());
    expect_magic(in, kFeatureMagic, path.string());
    const std::uint32_t version = read_u32(in);
    if (version != kFeatureVersion)
        throw unsupported_error("unsupported feature version " + std::to_string(version));
    const std::uint32_t t = read_u32(in);
    const std::uint32_t m = read_u32(in);
    if (t == 0 || m == 0) throw format_error("degenerate feature shape in " + path.string());
    LogMelImage img(t, m);
    read_f64_array(in, img.v.data(), img.v.size());
    return img;
}

void write_norm_stats(const std::filesystem::path& path, const NormStats& stats) {
    if (stats.mean.size() != stats.std.size())
        throw shape_error("norm stats mean/std length mismatch");
    AtomicFile file(path);
    std::ostream& out = file.stream();
    write_u32(out, static_cast<std::uint32_t>(stats.mean.size()));
    write_f64_array(out, stats.mean.data(), stats.mean.size());
    write_f64_array(out, stats.std.data(), stats.std.size());
    file.commit();
}

NormStats read_norm_stats(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw not_found_error("cannot open norm stats file: " + path.string());
    const std::uint32_t m = read_u32(in);
    NormStats stats;
    stats.mean.resize(m);
    stats.std.resize(m);
    read_f64_array(in, stats.mean.data(), m);
    read_f64_array(in, stats.std.data(), m);
    return stats;
}

}  // namespace asc
