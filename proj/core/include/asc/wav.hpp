#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace asc {

// Mono waveform, samples in [-1, 1].
struct Waveform {
    std::vector<double> samples;
    std::uint32_t sample_rate = 0;

    double duration_s() const {
        return sample_rate ? static_cast<double>(samples.size()) / sample_rate : 0.0;
    }
};

// Reads a RIFF/WAVE file. Only 16-bit PCM with 1 or 2 channels is accepted;
// samples are scaled by 1/32768 and stereo is averaged down to mono.
Waveform load_wav(const std::filesystem::path& path);

// Writes mono 16-bit PCM (atomically). Samples are clamped to [-1, 1].
void save_wav(const std::filesystem::path& path, const Waveform& w);

// Cuts w into fixed-length segments starting at 0, hop_s, 2*hop_s, ...;
// a trailing remainder shorter than seg_s is dropped.
std::vector<Waveform> segment(const Waveform& w, double seg_s = 1.0, double hop_s = 0.5);

}  // namespace asc
