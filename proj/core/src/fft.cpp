#include "asc/fft.hpp"

#include <cmath>

#include "asc/errors.hpp"

namespace asc {
namespace {

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

void fft_radix2(std::vector<std::complex<double>>& a, bool inverse) {
    const std::size_t n = a.size();
    // bit-reversal permutation
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = (inverse ? 2.0 : -2.0) * M_PI / static_cast<double>(len);
        const std::complex<double> wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> u = a[i + k];
                const std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
    if (inverse) {
        const double inv = 1.0 / static_cast<double>(n);
        for (auto& x : a) x *= inv;
    }
}

void dft_naive(std::vector<std::complex<double>>& a, bool inverse) {
    const std::size_t n = a.size();
    std::vector<std::complex<double>> out(n);
    const double sgn = inverse ? 2.0 : -2.0;
    for (std::size_t k = 0; k < n; ++k) {
        std::complex<double> acc(0.0, 0.0);
        for (std::size_t t = 0; t < n; ++t) {
            const double ang = sgn * M_PI * static_cast<double>(k) * static_cast<double>(t) /
                               static_cast<double>(n);
            acc += a[t] * std::complex<double>(std::cos(ang), std::sin(ang));
        }
        out[k] = inverse ? acc / static_cast<double>(n) : acc;
    }
    a = std::move(out);
}

}  // namespace

void fft(std::vector<std::complex<double>>& data, bool inverse) {
    if (data.empty()) return;
    if (is_pow2(data.size()))
        fft_radix2(data, inverse);
    else
        dft_naive(data, inverse);
}

std::vector<double> rfft_power(const double* frame, std::size_t frame_len, std::size_t fft_len) {
    if (frame_len > fft_len)
        throw parameter_error("rfft_power: frame longer than fft length");
    std::vector<std::complex<double>> buf(fft_len, {0.0, 0.0});
    for (std::size_t i = 0; i < frame_len; ++i) buf[i] = {frame[i], 0.0};
    fft(buf);
    std::vector<double> power(fft_len / 2 + 1);
    for (std::size_t k = 0; k < power.size(); ++k) power[k] = std::norm(buf[k]);
    return power;
}

}  // namespace asc
