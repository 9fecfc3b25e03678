#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>

#include "types.hpp"

namespace aic {

namespace detail {

inline void put_u16(std::ofstream& f, std::uint16_t v) {
    const std::array<char, 2> b{static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff)};
    f.write(b.data(), 2);
}

inline void put_u32(std::ofstream& f, std::uint32_t v) {
    const std::array<char, 4> b{static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                                static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
    f.write(b.data(), 4);
}

inline std::uint16_t get_u16(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

inline std::uint32_t get_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

} // namespace detail

// Write mono 16-bit PCM. Samples outside [-1, 1] are clipped; the
// return value counts them so callers can tell when their gain staging
// is off.
inline std::size_t write_wav(const std::string& path, const Waveform& w) {
    if (w.sample_rate <= 0.0) throw std::invalid_argument("write_wav: bad sample rate");
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("write_wav: cannot open " + path);

    const auto rate = static_cast<std::uint32_t>(std::lround(w.sample_rate));
    const auto data_bytes = static_cast<std::uint32_t>(w.size() * 2);

    f.write("RIFF", 4);
    detail::put_u32(f, 36 + data_bytes);
    f.write("WAVE", 4);
    f.write("fmt ", 4);
    detail::put_u32(f, 16);
    detail::put_u16(f, 1); // PCM
    detail::put_u16(f, 1); // mono
    detail::put_u32(f, rate);
    detail::put_u32(f, rate * 2);
    detail::put_u16(f, 2);
    detail::put_u16(f, 16);
    f.write("data", 4);
    detail::put_u32(f, data_bytes);

    std::size_t clipped = 0;
    for (double x : w.samples) {
        if (x > 1.0 || x < -1.0) ++clipped;
        const double c = std::clamp(x, -1.0, 1.0);
        const auto q = static_cast<std::int16_t>(std::lround(c * 32767.0));
        detail::put_u16(f, static_cast<std::uint16_t>(q));
    }
    if (!f) throw std::runtime_error("write_wav: write failed for " + path);
    return clipped;
}

// Read mono 16-bit PCM written by write_wav (or anything else that
// sticks to that subset). Walks chunks so extra metadata is tolerated.
inline Waveform read_wav(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("read_wav: cannot open " + path);
    std::string raw((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    const auto* p = reinterpret_cast<const unsigned char*>(raw.data());
    const std::size_t n = raw.size();

    if (n < 12 || std::memcmp(p, "RIFF", 4) != 0 || std::memcmp(p + 8, "WAVE", 4) != 0)
        throw std::runtime_error("read_wav: not a RIFF/WAVE file: " + path);

    std::uint16_t channels = 0, bits = 0, format = 0;
    std::uint32_t rate = 0;
    const unsigned char* data = nullptr;
    std::uint32_t data_len = 0;

    std::size_t off = 12;
    while (off + 8 <= n) {
        const std::uint32_t len = detail::get_u32(p + off + 4);
        const unsigned char* body = p + off + 8;
        if (off + 8 + len > n) throw std::runtime_error("read_wav: truncated chunk in " + path);
        if (std::memcmp(p + off, "fmt ", 4) == 0) {
            if (len < 16) throw std::runtime_error("read_wav: short fmt chunk in " + path);
            format = detail::get_u16(body);
            channels = detail::get_u16(body + 2);
            rate = detail::get_u32(body + 4);
            bits = detail::get_u16(body + 14);
        } else if (std::memcmp(p + off, "data", 4) == 0) {
            data = body;
            data_len = len;
        }
        off += 8 + len + (len & 1);
    }

    if (format != 1 || bits != 16) throw std::runtime_error("read_wav: only 16-bit PCM supported: " + path);
    if (channels != 1) throw std::runtime_error("read_wav: only mono supported: " + path);
    if (!data) throw std::runtime_error("read_wav: no data chunk in " + path);

    Waveform w;
    w.sample_rate = static_cast<double>(rate);
    w.samples.reserve(data_len / 2);
    for (std::uint32_t i = 0; i + 1 < data_len; i += 2) {
        const auto q = static_cast<std::int16_t>(detail::get_u16(data + i));
        w.samples.push_back(static_cast<double>(q) / 32767.0);
    }
    return w;
}

} // namespace aic
