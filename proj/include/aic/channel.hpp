#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "dsp.hpp"
#include "rng.hpp"
#include "types.hpp"

namespace aic {

inline constexpr double kSnrFloorDb = -100.0;

enum class PathLabel { a_to_b, a_to_m, m_to_b };

// Line-of-sight path: scalar attenuation plus a propagation delay,
// rounded to whole samples.
struct ChannelSpec {
    double attenuation = 1.0;
    double delay_s = 0.0;
    PathLabel label = PathLabel::a_to_b;
};

struct NoiseSpec {
    double power_dbfs = -87.0;
    Band band{16000.0, 20000.0};
    std::uint64_t seed = 0;
};

struct Geometry {
    double distance_ab_m = 0.4;   // speaker to microphone
    double safe_radius_m = 0.4;   // closest approach allowed to the attacker
    double speed_of_sound = 343.0;
};

inline double delay_from_distance(double distance_m, const Geometry& g) {
    if (distance_m < 0.0) throw std::invalid_argument("delay_from_distance: negative distance");
    if (g.speed_of_sound <= 0.0) throw std::invalid_argument("delay_from_distance: speed of sound must be positive");
    return distance_m / g.speed_of_sound;
}

// y[k] = a * x[k - round(tau*fs)]; output grows by the delay.
inline Waveform apply_los(const Waveform& x, const ChannelSpec& ch) {
    if (ch.delay_s < 0.0) throw std::invalid_argument("apply_los: negative delay");
    const long d = std::lround(ch.delay_s * x.sample_rate);
    const auto shift = static_cast<std::size_t>(d);
    Waveform out{std::vector<double>(x.size() + shift, 0.0), x.sample_rate};
    for (std::size_t i = 0; i < x.size(); ++i) out.samples[i + shift] = ch.attenuation * x.samples[i];
    return out;
}

// Band-limited Gaussian noise calibrated so the generated record's
// mean-square power equals spec.power_dbfs exactly.
inline Waveform gen_noise(const NoiseSpec& spec, double duration_s, double sample_rate) {
    if (spec.power_dbfs > 0.0) throw std::invalid_argument("gen_noise: power above full scale");
    const long n = std::lround(duration_s * sample_rate);
    if (n <= 0) throw std::invalid_argument("gen_noise: duration must cover at least one sample");
    if (!(spec.band.low_hz > 0.0) || !(spec.band.high_hz > spec.band.low_hz) ||
        spec.band.high_hz > sample_rate / 2.0)
        throw std::invalid_argument("gen_noise: band must satisfy 0 < low < high <= Nyquist");

    const auto taps = dsp::design_bandpass_fir(spec.band, sample_rate, 0.1 * spec.band.width_hz(), 65.0);
    std::vector<double> raw(static_cast<std::size_t>(n) + taps.size() - 1);
    Rng rng(spec.seed);
    for (auto& v : raw) v = rng.gaussian();
    std::vector<double> shaped = dsp::fir_filter_valid(raw, taps);

    const double ms = mean_square(std::span<const double>(shaped));
    const double g = std::sqrt(dbfs_to_mean_square(spec.power_dbfs) / ms);
    for (auto& v : shaped) v *= g;
    return Waveform{std::move(shaped), sample_rate};
}

// Sample-wise sum; shorter inputs are zero-extended to the longest.
inline Waveform superpose(const std::vector<const Waveform*>& parts) {
    if (parts.empty()) throw std::invalid_argument("superpose: no inputs");
    const double rate = parts.front()->sample_rate;
    std::size_t len = 0;
    for (const auto* w : parts) {
        if (w->sample_rate != rate) throw std::invalid_argument("superpose: sample rates differ");
        len = std::max(len, w->size());
    }
    Waveform out{std::vector<double>(len, 0.0), rate};
    for (const auto* w : parts)
        for (std::size_t i = 0; i < w->size(); ++i) out.samples[i] += w->samples[i];
    return out;
}

inline Waveform superpose(const Waveform& a, const Waveform& b) { return superpose({&a, &b}); }

inline Waveform superpose(const Waveform& a, const Waveform& b, const Waveform& c) {
    return superpose({&a, &b, &c});
}

// SNR over the common support of the two records. A fully cancelled
// signal reports the -100 dB floor rather than -inf.
inline double measure_snr_db(const Waveform& signal, const Waveform& noise) {
    if (signal.sample_rate != noise.sample_rate)
        throw std::invalid_argument("measure_snr: sample rates differ");
    const std::size_t n = std::min(signal.size(), noise.size());
    if (n == 0) throw std::invalid_argument("measure_snr: empty input");
    double ps = 0.0, pn = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        ps += signal.samples[i] * signal.samples[i];
        pn += noise.samples[i] * noise.samples[i];
    }
    if (pn <= 0.0) throw std::invalid_argument("measure_snr: zero-power noise");
    if (ps <= 0.0) return kSnrFloorDb;
    return std::max(kSnrFloorDb, 10.0 * std::log10(ps / pn));
}

} // namespace aic
