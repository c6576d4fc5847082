#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "asc/matrix.hpp"
#include "asc/wav.hpp"

namespace asc {

// STFT / log-Mel front-end configuration. Defaults follow the 25 ms window,
// 10 ms hop, 2048-point FFT, 128-mel setup used throughout.
struct StftConfig {
    double window_ms = 25.0;
    double hop_ms = 10.0;
    std::size_t fft_len = 2048;
    std::size_t n_mels = 128;

    std::size_t window_samples(std::uint32_t sample_rate) const;
    std::size_t hop_samples(std::uint32_t sample_rate) const;
    void validate(std::uint32_t sample_rate) const;
};

// Power spectrogram of a Hann-windowed framing: rows = frames, cols =
// fft_len/2 + 1 bins. The signal is right-padded with zeros so the frame
// count comes out at round(len / hop); a 1-second segment therefore yields
// exactly round(1000 / hop_ms) frames (100 at the defaults) regardless of
// sample rate.
Matrix stft_power(const Waveform& seg, const StftConfig& cfg);

// Triangular mel filterbank: rows = n_mels, cols = fft_len/2 + 1. Centers
// are uniformly spaced on the HTK mel scale between 0 Hz and Nyquist;
// triangle areas are left unnormalized.
Matrix mel_filterbank(const StftConfig& cfg, std::uint32_t sample_rate);

double hz_to_mel(double hz);
double mel_to_hz(double mel);

// ln(melfb * power + kLogFloor), shape T x n_mels.
inline constexpr double kLogFloor = 1e-10;
LogMelImage log_mel(const Waveform& seg, const StftConfig& cfg);

// Per-mel-bin normalization statistics, fit on training features only.
struct NormStats {
    std::vector<double> mean;
    std::vector<double> std;  // floored at kStdFloor
};
inline constexpr double kStdFloor = 1e-8;

// Population mean/std per frequency bin over all frames of all images.
NormStats fit_norm(const std::vector<LogMelImage>& features);

// (img - mean) / std, per bin.
LogMelImage apply_norm(const LogMelImage& img, const NormStats& stats);

// Feature container: "SLNS" magic, version, T, M (u32 LE), then row-major
// f64 LE values.
void write_feature(const std::filesystem::path& path, const LogMelImage& img);
LogMelImage read_feature(const std::filesystem::path& path);

// NormStats container: M (u32 LE), mean[M], std[M] as f64 LE.
void write_norm_stats(const std::filesystem::path& path, const NormStats& stats);
NormStats read_norm_stats(const std::filesystem::path& path);

}  // namespace asc
