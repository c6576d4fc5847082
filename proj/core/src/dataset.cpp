#include "asc/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <set>
#include <sstream>

#include "asc/binio.hpp"
#include "asc/dsp.hpp"
#include "asc/errors.hpp"
#include "asc/fft.hpp"

namespace asc {

std::size_t DatasetIndex::label_id(const std::string& label) const {
    const auto it = std::lower_bound(label_set.begin(), label_set.end(), label);
    if (it == label_set.end() || *it != label)
        throw parameter_error("unknown label: " + label);
    return static_cast<std::size_t>(it - label_set.begin());
}

std::vector<const DatasetEntry*> DatasetIndex::split_entries(const std::string& split) const {
    std::vector<const DatasetEntry*> out;
    for (const auto& e : entries)
        if (e.split == split) out.push_back(&e);
    return out;
}

DatasetIndex load_dcase_index(const std::filesystem::path& root) {
    const std::filesystem::path meta = root / "meta.txt";
    std::ifstream in(meta);
    if (!in) throw not_found_error("missing meta file: " + meta.string());

    DatasetIndex idx;
    idx.root = root;
    std::set<std::string> labels, paths;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;

        std::vector<std::string> fields;
        std::size_t start = 0;
        while (true) {
            const std::size_t tab = line.find('\t', start);
            fields.push_back(line.substr(start, tab - start));
            if (tab == std::string::npos) break;
            start = tab + 1;
        }
        if (fields.size() < 2 || fields.size() > 3 || fields[0].empty() || fields[1].empty())
            throw parse_error(meta.string() + ":" + std::to_string(line_no) +
                              ": expected `path<TAB>label[<TAB>split]`");

        DatasetEntry e;
        e.audio_path = fields[0];
        e.scene_label = fields[1];
        e.split = fields.size() == 3 && !fields[2].empty() ? fields[2] : "train";

        if (!paths.insert(e.audio_path).second)
            throw parse_error(meta.string() + ":" + std::to_string(line_no) +
                              ": duplicate path " + e.audio_path);
        labels.insert(e.scene_label);
        if (!std::filesystem::exists(root / e.audio_path)) idx.missing.push_back(e.audio_path);
        idx.entries.push_back(std::move(e));
    }
    if (idx.entries.empty()) throw parse_error(meta.string() + ": no entries");
    idx.label_set.assign(labels.begin(), labels.end());
    return idx;
}

void write_meta(const std::filesystem::path& root, const std::vector<DatasetEntry>& entries) {
    AtomicFile file(root / "meta.txt");
    for (const auto& e : entries)
        file.stream() << e.audio_path << '\t' << e.scene_label << '\t' << e.split << '\n';
    file.commit();
}

std::vector<double> random_envelope(Rng& rng, std::size_t n_points) {
    if (n_points < 2) throw parameter_error("random_envelope: need at least 2 points");
    std::vector<double> env(n_points);
    for (double& g : env) g = std::exp(rng.uniform(std::log(0.02), std::log(1.0)));
    return env;
}

namespace {

// envelope gain at frequency f: piecewise-linear over control points spaced
// uniformly on the mel axis
double envelope_gain(const std::vector<double>& env, double f_hz, double nyquist) {
    const double mel_max = hz_to_mel(nyquist);
    const double pos = hz_to_mel(std::clamp(f_hz, 0.0, nyquist)) / mel_max *
                       static_cast<double>(env.size() - 1);
    const std::size_t i0 = std::min(static_cast<std::size_t>(pos), env.size() - 2);
    const double w = pos - static_cast<double>(i0);
    return (1.0 - w) * env[i0] + w * env[i0 + 1];
}

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

}  // namespace

Waveform render_texture(const std::vector<double>& envelope, double duration_s,
                        std::uint32_t sample_rate, Rng& rng, double rms) {
    if (duration_s <= 0.0) throw parameter_error("render_texture: duration must be positive");
    if (sample_rate == 0) throw parameter_error("render_texture: zero sample rate");
    const auto n = static_cast<std::size_t>(std::llround(duration_s * sample_rate));
    const std::size_t fft_len = next_pow2(std::max<std::size_t>(n, 2));
    const double nyquist = sample_rate / 2.0;

    // Hermitian spectrum with random complex gaussian bins shaped by the
    // envelope, so the time signal is real noise with the desired spectrum.
    std::vector<std::complex<double>> spec(fft_len, {0.0, 0.0});
    for (std::size_t k = 1; k < fft_len / 2; ++k) {
        const double f = static_cast<double>(k) * sample_rate / static_cast<double>(fft_len);
        const double g = envelope_gain(envelope, f, nyquist);
        const std::complex<double> z(rng.normal(), rng.normal());
        spec[k] = g * z;
        spec[fft_len - k] = std::conj(spec[k]);
    }
    spec[fft_len / 2] = {rng.normal() * envelope_gain(envelope, nyquist, nyquist), 0.0};

    fft(spec, /*inverse=*/true);

    Waveform w;
    w.sample_rate = sample_rate;
    w.samples.resize(n);
    double sumsq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        w.samples[i] = spec[i].real();
        sumsq += w.samples[i] * w.samples[i];
    }
    const double cur = std::sqrt(sumsq / static_cast<double>(n));
    if (cur > 0.0)
        for (double& s : w.samples) s *= rms / cur;
    return w;
}

void add_tone_burst(Waveform& w, double freq_hz, double onset_s, double dur_s, double amp) {
    const auto start = static_cast<std::size_t>(std::llround(onset_s * w.sample_rate));
    const auto len = static_cast<std::size_t>(std::llround(dur_s * w.sample_rate));
    for (std::size_t i = 0; i < len && start + i < w.samples.size(); ++i) {
        const double t = static_cast<double>(i) / w.sample_rate;
        const double env = 0.5 - 0.5 * std::cos(2.0 * M_PI * static_cast<double>(i) /
                                                 static_cast<double>(len));
        w.samples[start + i] += amp * env * std::sin(2.0 * M_PI * freq_hz * t);
    }
}

void add_chirp(Waveform& w, double f0_hz, double f1_hz, double onset_s, double dur_s, double amp) {
    const auto start = static_cast<std::size_t>(std::llround(onset_s * w.sample_rate));
    const auto len = static_cast<std::size_t>(std::llround(dur_s * w.sample_rate));
    for (std::size_t i = 0; i < len && start + i < w.samples.size(); ++i) {
        const double t = static_cast<double>(i) / w.sample_rate;
        const double frac = static_cast<double>(i) / static_cast<double>(len);
        const double env = 0.5 - 0.5 * std::cos(2.0 * M_PI * frac);
        // instantaneous phase of a linear sweep f0 -> f1
        const double phase = 2.0 * M_PI * (f0_hz * t + 0.5 * (f1_hz - f0_hz) * t * frac);
        w.samples[start + i] += amp * env * std::sin(phase);
    }
}

void add_random_events(Waveform& w, double event_rate, Rng& rng) {
    const double dur_total = w.duration_s();
    const double nyquist = w.sample_rate / 2.0;
    const std::size_t count = rng.poisson(event_rate);
    for (std::size_t e = 0; e < count; ++e) {
        const double dur = rng.uniform(0.05, 0.25);
        const double onset = rng.uniform(0.0, std::max(0.0, dur_total - dur));
        const double amp = rng.uniform(0.08, 0.2);
        if (rng.below(2) == 0) {
            const double f = rng.uniform(200.0, 0.8 * nyquist);
            add_tone_burst(w, f, onset, dur, amp);
        } else {
            const double f0 = rng.uniform(200.0, 0.6 * nyquist);
            const double f1 = f0 * rng.uniform(1.2, 2.0);
            add_chirp(w, f0, std::min(f1, 0.9 * nyquist), onset, dur, amp);
        }
    }
}

DatasetIndex make_synth(const SynthConfig& cfg, const std::filesystem::path& out_dir) {
    if (cfg.n_classes == 0 || cfg.samples_per_class == 0)
        throw parameter_error("make_synth: counts must be positive");
    if (cfg.sample_s < 1.0)
        throw parameter_error("make_synth: samples must be at least one segment long");
    if (cfg.event_rate < 0.0) throw parameter_error("make_synth: negative event rate");

    std::filesystem::create_directories(out_dir);
    const Rng master(cfg.seed);
    const std::size_t n_train = (2 * cfg.samples_per_class) / 3;

    std::vector<DatasetEntry> entries;
    for (std::size_t c = 0; c < cfg.n_classes; ++c) {
        Rng env_rng = master.fork(1000 + c);
        const std::vector<double> envelope = random_envelope(env_rng);

        char label[32];
        std::snprintf(label, sizeof(label), "class%02zu", c);
        std::filesystem::create_directories(out_dir / label);

        for (std::size_t i = 0; i < cfg.samples_per_class; ++i) {
            Rng sample_rng = master.fork(c * 1000003ULL + i);
            Waveform w = render_texture(envelope, cfg.sample_s, cfg.sample_rate, sample_rng);
            add_random_events(w, cfg.event_rate, sample_rng);

            char name[64];
            std::snprintf(name, sizeof(name), "%s/%s_%03zu.wav", label, label, i);
            save_wav(out_dir / name, w);

            DatasetEntry e;
            e.audio_path = name;
            e.scene_label = label;
            e.split = i < n_train ? "train" : "eval";
            entries.push_back(std::move(e));
        }
    }
    write_meta(out_dir, entries);
    return load_dcase_index(out_dir);
}

}  // namespace asc
