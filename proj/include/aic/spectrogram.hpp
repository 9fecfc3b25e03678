#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <fstream>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "csv.hpp"
#include "fft.hpp"
#include "types.hpp"

namespace aic {

inline constexpr double kSpectrogramFloorDb = -300.0;

// Power spectrogram on a dB scale. Cells are normalized so that the
// sum over one column's frequency bins equals that window's mean
// square (one-sided, Hann-corrected): a tone at -20 dBFS shows up as
// roughly -20 dB in its bin.
struct SpectrogramMatrix {
    std::vector<double> freq_hz;
    std::vector<double> time_s;
    std::vector<std::vector<double>> power_db; // [time][freq]
    double freq_resolution_hz{};
};

inline SpectrogramMatrix spectrogram(const Waveform& w, double freq_resolution_hz = 50.0) {
    if (freq_resolution_hz <= 0.0) throw std::invalid_argument("spectrogram: resolution must be positive");
    const long win_l = std::lround(w.sample_rate / freq_resolution_hz);
    if (win_l < 4) throw std::invalid_argument("spectrogram: resolution too coarse for the sample rate");
    const auto win = static_cast<std::size_t>(win_l);
    if (w.size() < win) throw std::invalid_argument("spectrogram: waveform shorter than one window");
    const std::size_t hop = win / 2;

    std::vector<double> hann(win);
    double wsum2 = 0.0;
    for (std::size_t i = 0; i < win; ++i) {
        hann[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(win));
        wsum2 += hann[i] * hann[i];
    }

    SpectrogramMatrix m;
    m.freq_resolution_hz = w.sample_rate / static_cast<double>(win);
    const std::size_t bins = win / 2 + 1;
    m.freq_hz.resize(bins);
    for (std::size_t k = 0; k < bins; ++k) m.freq_hz[k] = static_cast<double>(k) * m.freq_resolution_hz;

    std::vector<double> seg(win);
    for (std::size_t start = 0; start + win <= w.size(); start += hop) {
        for (std::size_t i = 0; i < win; ++i) seg[i] = w.samples[start + i] * hann[i];
        const std::vector<std::complex<double>> spec = dft_real(seg);

        std::vector<double> col(bins);
        for (std::size_t k = 0; k < bins; ++k) {
            const double one_sided = (k == 0 || k == bins - 1) ? 1.0 : 2.0;
            const double cell = one_sided * std::norm(spec[k]) / (static_cast<double>(win) * wsum2);
            col[k] = cell > 0.0 ? std::max(kSpectrogramFloorDb, 10.0 * std::log10(cell)) : kSpectrogramFloorDb;
        }
        m.time_s.push_back(static_cast<double>(start + win / 2) / w.sample_rate);
        m.power_db.push_back(std::move(col));
    }
    return m;
}

// CSV layout: first row is the frequency axis (first cell empty),
// then one row per window: time in seconds followed by per-bin dB.
inline void write_spectrogram_csv(const std::string& path, const SpectrogramMatrix& m) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("write_spectrogram_csv: cannot open " + path);
    std::string line;
    for (double fr : m.freq_hz) {
        line.push_back(',');
        detail::append_double(line, fr);
    }
    line.push_back('\n');
    f << line;
    for (std::size_t t = 0; t < m.time_s.size(); ++t) {
        line.clear();
        detail::append_double(line, m.time_s[t]);
        for (double v : m.power_db[t]) {
            line.push_back(',');
            detail::append_double(line, v);
        }
        line.push_back('\n');
        f << line;
    }
    if (!f) throw std::runtime_error("write_spectrogram_csv: write failed for " + path);
}

} // namespace aic
