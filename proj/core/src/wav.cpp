#include "asc/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "asc/binio.hpp"
#include "asc/errors.hpp"

namespace asc {
namespace {

std::uint16_t read_u16(std::istream& in) {
    unsigned char b[2];
    in.read(reinterpret_cast<char*>(b), 2);
    if (!in) throw format_error("unexpected end of WAV file");
    return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

void write_u16(std::ostream& out, std::uint16_t x) {
    unsigned char b[2] = {static_cast<unsigned char>(x), static_cast<unsigned char>(x >> 8)};
    out.write(reinterpret_cast<const char*>(b), 2);
}

}  // namespace

Waveform load_wav(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw not_found_error("cannot open WAV file: " + path.string());

    char riff[4];
    in.read(riff, 4);
    if (!in || std::memcmp(riff, "RIFF", 4) != 0)
        throw format_error("not a RIFF file: " + path.string());
    read_u32(in);  // overall size, unused
    char wave[4];
    in.read(wave, 4);
    if (!in || std::memcmp(wave, "WAVE", 4) != 0)
        throw format_error("not a WAVE file: " + path.string());

    std::uint16_t channels = 0, bits = 0, audio_format = 0;
    std::uint32_t sample_rate = 0;
    bool have_fmt = false;

    while (in) {
        char id[4];
        in.read(id, 4);
        if (!in) break;
        const std::uint32_t chunk_size = read_u32(in);
        if (std::memcmp(id, "fmt ", 4) == 0) {
            if (chunk_size < 16) throw format_error("fmt chunk too short: " + path.string());
            audio_format = read_u16(in);
            channels = read_u16(in);
            sample_rate = read_u32(in);
            read_u32(in);  // byte rate
            read_u16(in);  // block align
            bits = read_u16(in);
            in.seekg(chunk_size - 16, std::ios::cur);
            have_fmt = true;
        } else if (std::memcmp(id, "data", 4) == 0) {
            if (!have_fmt) throw format_error("data chunk before fmt chunk: " + path.string());
            if (audio_format != 1)
                throw unsupported_error("only PCM WAV is supported (format " +
                                        std::to_string(audio_format) + "): " + path.string());
            if (bits != 16)
                throw unsupported_error("only 16-bit PCM is supported (" + std::to_string(bits) +
                                        " bits): " + path.string());
            if (channels != 1 && channels != 2)
                throw unsupported_error("only mono or stereo is supported (" +
                                        std::to_string(channels) + " channels): " + path.string());
            if (sample_rate == 0) throw format_error("zero sample rate: " + path.string());

            const std::size_t n_values = chunk_size / 2;
            const std::size_t n_frames = n_values / channels;
            if (n_frames == 0) throw format_error("empty data chunk: " + path.string());

            std::vector<char> raw(static_cast<std::size_t>(chunk_size));
            in.read(raw.data(), static_cast<std::streamsize>(chunk_size));
            if (!in) throw format_error("truncated data chunk: " + path.string());

            Waveform w;
            w.sample_rate = sample_rate;
            w.samples.resize(n_frames);
            const double scale = 1.0 / 32768.0;
            for (std::size_t f = 0; f < n_frames; ++f) {
                double acc = 0.0;
                for (std::uint16_t c = 0; c < channels; ++c) {
                    const std::size_t off = 2 * (f * channels + c);
                    const std::int16_t s = static_cast<std::int16_t>(
                        static_cast<unsigned char>(raw[off]) |
                        (static_cast<unsigned char>(raw[off + 1]) << 8));
                    acc += s * scale;
                }
                w.samples[f] = acc / channels;
            }
            return w;
        } else {
            // skip unknown chunk (LIST, fact, ...), padded to even size
            in.seekg(chunk_size + (chunk_size & 1), std::ios::cur);
        }
    }
    throw format_error("no data chunk found: " + path.string());
}

void save_wav(const std::filesystem::path& path, const Waveform& w) {
    if (w.samples.empty()) throw empty_input_error("save_wav: empty waveform");
    if (w.sample_rate == 0) throw parameter_error("save_wav: zero sample rate");

    const std::uint32_t n = static_cast<std::uint32_t>(w.samples.size());
    const std::uint32_t data_bytes = n * 2;

    AtomicFile file(path);
    std::ostream& out = file.stream();
    out.write("RIFF", 4);
    write_u32(out, 36 + data_bytes);
    out.write("WAVE", 4);
    out.write("fmt ", 4);
    write_u32(out, 16);
    write_u16(out, 1);  // PCM
    write_u16(out, 1);  // mono
    write_u32(out, w.sample_rate);
    write_u32(out, w.sample_rate * 2);
    write_u16(out, 2);
    write_u16(out, 16);
    out.write("data", 4);
    write_u32(out, data_bytes);
    for (double s : w.samples) {
        const double clamped = std::clamp(s, -1.0, 1.0);
        const auto q = static_cast<std::int16_t>(std::lrint(clamped * 32767.0));
        write_u16(out, static_cast<std::uint16_t>(q));
    }
    file.commit();
}

std::vector<Waveform> segment(const Waveform& w, double seg_s, double hop_s) {
    if (seg_s <= 0.0 || hop_s <= 0.0) throw parameter_error("segment: durations must be positive");
    if (w.sample_rate == 0) throw parameter_error("segment: zero sample rate");

    const auto seg_len = static_cast<std::size_t>(std::llround(seg_s * w.sample_rate));
    const auto hop_len = static_cast<std::size_t>(std::llround(hop_s * w.sample_rate));
    if (seg_len == 0 || hop_len == 0) throw parameter_error("segment: degenerate segment/hop");
    if (w.samples.size() < seg_len)
        throw Error(Error::Kind::parameter,
                    "segment: waveform shorter than one segment (" +
                        std::to_string(w.samples.size()) + " < " + std::to_string(seg_len) + ")");

    std::vector<Waveform> out;
    for (std::size_t start = 0; start + seg_len <= w.samples.size(); start += hop_len) {
        Waveform s;
        s.sample_rate = w.sample_rate;
        s.samples.assign(w.samples.begin() + static_cast<std::ptrdiff_t>(start),
                         w.samples.begin() + static_cast<std::ptrdiff_t>(start + seg_len));
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace asc
