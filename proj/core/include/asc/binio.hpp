#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "asc/errors.hpp"

namespace asc {

// Little-endian primitives for the on-disk formats.

inline void write_u32(std::ostream& out, std::uint32_t x) {
    unsigned char b[4] = {static_cast<unsigned char>(x),
                          static_cast<unsigned char>(x >> 8),
                          static_cast<unsigned char>(x >> 16),
                          static_cast<unsigned char>(x >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

inline std::uint32_t read_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw format_error("unexpected end of file while reading u32");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

inline void write_f64(std::ostream& out, double x) {
    std::uint64_t u;
    std::memcpy(&u, &x, 8);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(u >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
}

inline double read_f64(std::istream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    if (!in) throw format_error("unexpected end of file while reading f64");
    std::uint64_t u = 0;
    for (int i = 0; i < 8; ++i) u |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    double x;
    std::memcpy(&x, &u, 8);
    return x;
}

inline void write_f64_array(std::ostream& out, const double* p, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) write_f64(out, p[i]);
}

inline void read_f64_array(std::istream& in, double* p, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) p[i] = read_f64(in);
}

inline void write_magic(std::ostream& out, const char magic[4]) { out.write(magic, 4); }

inline void expect_magic(std::istream& in, const char magic[4], const std::string& what) {
    char got[4] = {};
    in.read(got, 4);
    if (!in || std::memcmp(got, magic, 4) != 0)
        throw format_error("bad magic in " + what + " (not a " + std::string(magic, 4) + " file)");
}

// Writes to <path>.tmp<pid-ish suffix> and renames on success so failed runs
// never leave partial outputs behind.
class AtomicFile {
public:
    explicit AtomicFile(const std::filesystem::path& path)
        : final_(path), tmp_(path.string() + ".tmp") {
        out_.open(tmp_, std::ios::binary | std::ios::trunc);
        if (!out_) throw io_error("cannot open for writing: " + tmp_.string());
    }

    ~AtomicFile() {
        if (!committed_) {
            out_.close();
            std::error_code ec;
            std::filesystem::remove(tmp_, ec);
        }
    }

    std::ostream& stream() { return out_; }

    void commit() {
        out_.flush();
        if (!out_) throw io_error("write failed: " + tmp_.string());
        out_.close();
        std::error_code ec;
        std::filesystem::rename(tmp_, final_, ec);
        if (ec) throw io_error("rename failed: " + tmp_.string() + " -> " + final_.string());
        committed_ = true;
    }

private:
    std::filesystem::path final_;
    std::filesystem::path tmp_;
    std::ofstream out_;
    bool committed_ = false;
};

}  // namespace asc
