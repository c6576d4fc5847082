#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "asc/rng.hpp"
#include "asc/wav.hpp"

namespace asc {

struct DatasetEntry {
    std::string audio_path;   // relative to the index root
    std::string scene_label;
    std::string split;        // train | eval | fold tag
};

struct DatasetIndex {
    std::filesystem::path root;
    std::vector<DatasetEntry> entries;
    std::vector<std::string> label_set;  // sorted distinct labels
    std::vector<std::string> missing;    // referenced files absent at index time

    std::size_t label_id(const std::string& label) const;
    std::vector<const DatasetEntry*> split_entries(const std::string& split) const;
};

// Parses <root>/meta.txt: UTF-8 lines `path<TAB>label[<TAB>split]`, LF
// terminated. Entries keep file order; the split column defaults to
// "train". Missing audio files are recorded, not fatal.
DatasetIndex load_dcase_index(const std::filesystem::path& root);

void write_meta(const std::filesystem::path& root, const std::vector<DatasetEntry>& entries);

// Synthetic corpus: each class gets a distinct stationary noise texture
// (class-specific random spectral envelope); sparse foreground events come
// from a pool shared across classes, so texture is the only discriminative
// cue.
struct SynthConfig {
    std::size_t n_classes = 4;
    std::size_t samples_per_class = 60;  // first 2/3 train, rest eval
    double sample_s = 10.0;
    std::uint32_t sample_rate = 44100;
    std::uint64_t seed = 0;
    double event_rate = 3.0;  // expected foreground events per sample
};

DatasetIndex make_synth(const SynthConfig& cfg, const std::filesystem::path& out_dir);

// Texture/event primitives (exposed so tests can drive them directly).

// Smooth positive spectral envelope: n_points gains over a mel-spaced grid
// from 0 Hz to Nyquist, log-uniform in [0.02, 1].
std::vector<double> random_envelope(Rng& rng, std::size_t n_points = 8);

// Stationary noise whose spectrum follows the envelope (piecewise-linear
// on the mel axis), RMS-normalized.
Waveform render_texture(const std::vector<double>& envelope, double duration_s,
                        std::uint32_t sample_rate, Rng& rng, double rms = 0.1);

void add_tone_burst(Waveform& w, double freq_hz, double onset_s, double dur_s, double amp);
void add_chirp(Waveform& w, double f0_hz, double f1_hz, double onset_s, double dur_s, double amp);

// Draws events from the shared pool and adds them in place.
void add_random_events(Waveform& w, double event_rate, Rng& rng);

}  // namespace asc
