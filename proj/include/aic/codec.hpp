#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "dsp.hpp"
#include "rng.hpp"
#include "types.hpp"

namespace aic {

// Frame delimiter: three on slots, three off slots. Data slots never
// contain a run of three equal values (Manchester pairs alternate), so
// the delimiter is unambiguous inside a stream.
inline constexpr std::array<std::uint8_t, 6> kDelimiter{1, 1, 1, 0, 0, 0};

inline constexpr long kMinSlotSamples = 8;

// Unidirectional Manchester: 1 -> (1,0), 0 -> (0,1). Exactly one slot
// per pair carries energy, which is what the tamper-evident ternary
// decision exploits.
inline Bits manchester_encode(const Bits& data) {
    Bits out;
    out.reserve(data.size() * 2);
    for (auto b : data) {
        if (b > 1) throw std::invalid_argument("manchester_encode: bits must be 0 or 1");
        if (b) {
            out.push_back(1);
            out.push_back(0);
        } else {
            out.push_back(0);
            out.push_back(1);
        }
    }
    return out;
}

// Delimiter followed by the Manchester-coded payload.
inline Bits build_frame(const Bits& data) {
    if (data.empty()) throw std::invalid_argument("build_frame: empty payload");
    Bits frame(kDelimiter.begin(), kDelimiter.end());
    const Bits coded = manchester_encode(data);
    frame.insert(frame.end(), coded.begin(), coded.end());
    return frame;
}

struct BitRates {
    double gross_bps{};
    double net_bps{};
};

// Gross rate counts slots; net rate accounts for the delimiter and the
// Manchester expansion: net = gross * n / (6 + 2n).
inline BitRates bit_rates(const AicParams& p) {
    p.validate();
    const double gross = 1.0 / p.slot_duration_s;
    const auto n = static_cast<double>(p.payload_bits);
    return {gross, gross * n / (6.0 + 2.0 * n)};
}

// Stochastic carrier description: the kind plus the seed of its sample
// stream. Same process + same params -> bit-identical waveform.
struct CarrierProcess {
    CarrierKind kind = CarrierKind::wgn;
    std::uint64_t seed = 0;
};

namespace detail {

// The carrier gets a gentler spectral edge than a plain 10%-of-band
// transition would give on narrow bands: a hard edge leaves sinc
// sidelobes in the autocorrelation (~0.16 near 2 ms for a 600 Hz
// band), defeating the low-autocorrelation design goal. A 480 Hz
// minimum transition pushes those lobes below 0.08. Wider than needed
// is not better: the transition eats flat passband from the nominal
// edges inward, shrinking the effective bandwidth that slot-power
// estimates integrate over.
inline double carrier_transition_hz(const Band& band) {
    const double w = band.width_hz();
    return std::min(std::max(0.1 * w, 480.0), 0.8 * w);
}

inline constexpr double kCarrierStopbandDb = 65.0;

// Synthesize exactly `count` band-limited carrier samples. The raw
// process is generated with filter-length pre-roll and convolved in
// "valid" mode so the output is steady-state throughout.
inline std::vector<double> synthesize_carrier_samples(const CarrierProcess& proc, std::size_t count,
                                                      const AicParams& p) {
    const auto taps = dsp::design_bandpass_fir(p.band, p.sample_rate,
                                               carrier_transition_hz(p.band), kCarrierStopbandDb);
    const std::size_t raw_len = count + taps.size() - 1;
    std::vector<double> raw(raw_len);
    Rng rng(proc.seed);
    if (proc.kind == CarrierKind::wgn) {
        for (auto& v : raw) v = rng.gaussian();
    } else {
        if (p.qpsk_carrier_freq_hz < p.band.low_hz || p.qpsk_carrier_freq_hz > p.band.high_hz)
            throw std::invalid_argument("qpsk carrier frequency outside band");
        const long sym_len = std::lround(p.qpsk_symbol_duration_s() * p.sample_rate);
        if (sym_len < 1) throw std::invalid_argument("qpsk minislot shorter than one sample");
        static constexpr std::array<double, 4> phases{
            std::numbers::pi / 4, 3 * std::numbers::pi / 4,
            5 * std::numbers::pi / 4, 7 * std::numbers::pi / 4};
        double phase = phases[rng.uniform_int(4)];
        for (std::size_t i = 0; i < raw_len; ++i) {
            if (i > 0 && i % static_cast<std::size_t>(sym_len) == 0)
                phase = phases[rng.uniform_int(4)];
            const double t = static_cast<double>(i) / p.sample_rate;
            raw[i] = std::cos(2.0 * std::numbers::pi * p.qpsk_carrier_freq_hz * t + phase);
        }
    }
    return dsp::fir_filter_valid(raw, taps);
}

} // namespace detail

// Band-limited stochastic carrier of the requested duration.
inline Waveform synthesize_carrier(const CarrierProcess& proc, double duration_s, const AicParams& p) {
    p.validate();
    const long n = std::lround(duration_s * p.sample_rate);
    if (n <= 0) throw std::invalid_argument("synthesize_carrier: duration must cover at least one sample");
    return Waveform{detail::synthesize_carrier_samples(proc, static_cast<std::size_t>(n), p), p.sample_rate};
}

// On-off keying of the carrier by the framed slot sequence. Off slots
// are exactly zero; the whole frame is scaled so its mean-square power
// sits at noise_floor + target_snr dBFS.
inline Waveform modulate(const Bits& frame, const AicParams& p, const CarrierProcess& proc) {
    p.validate();
    if (frame.size() < 8) throw std::invalid_argument("modulate: frame too short to be framed");
    if (!std::equal(kDelimiter.begin(), kDelimiter.end(), frame.begin()))
        throw std::invalid_argument("modulate: frame does not start with the delimiter");
    const long slot_len = p.slot_samples();
    if (slot_len < kMinSlotSamples)
        throw std::invalid_argument("modulate: slot shorter than 8 samples");

    const auto ls = static_cast<std::size_t>(slot_len);
    const std::size_t total = frame.size() * ls;
    const std::vector<double> carrier = detail::synthesize_carrier_samples(proc, total, p);

    Waveform out{std::vector<double>(total, 0.0), p.sample_rate};
    for (std::size_t s = 0; s < frame.size(); ++s) {
        if (!frame[s]) continue;
        const std::size_t base = s * ls;
        for (std::size_t i = 0; i < ls; ++i) out.samples[base + i] = carrier[base + i];
    }

    const double ms = mean_square(out);
    if (ms <= 0.0) throw std::invalid_argument("modulate: degenerate carrier");
    const double target = dbfs_to_mean_square(p.noise_floor_dbfs + p.target_snr_db);
    const double g = std::sqrt(target / ms);
    for (auto& v : out.samples) v *= g;
    return out;
}

// Receiver-grade bandpass: linear phase, group delay compensated,
// length preserved. The default transition is 10% of the band width;
// pass a wider one when the filter's time support must stay short
// (its step response rises over roughly 2/transition seconds, which
// smears slot boundaries at high slot rates).
inline Waveform apply_bandpass(const Waveform& w, Band band, double transition_hz = 0.0) {
    if (!(band.low_hz > 0.0) || !(band.high_hz > band.low_hz) || band.high_hz > w.sample_rate / 2.0)
        throw std::invalid_argument("apply_bandpass: band must satisfy 0 < low < high <= Nyquist");
    if (transition_hz <= 0.0) transition_hz = 0.1 * band.width_hz();
    const auto taps = dsp::design_bandpass_fir(band, w.sample_rate, transition_hz, 65.0);
    return dsp::fir_filter_centered(w, taps);
}

// Receive filter: passband padded past the nominal band edges so the
// response is flat over the whole emission support (the carrier's own
// spectral transition straddles the nominal edges). A filter that is
// transparent to the signal neither smears slot boundaries nor shaves
// flat bandwidth off the slot-power estimate; its transitions reject
// out-of-band noise just outside the occupied support.
struct RxFilterPlan {
    Band band;
    double transition_hz;
};

inline RxFilterPlan rx_filter_plan(const AicParams& p) {
    const double ctw = detail::carrier_transition_hz(p.band);
    const double tw = ctw;
    // Flat response from half a carrier transition beyond each nominal
    // edge (the emission's support), plus clearance for this filter's
    // own transition and for the gating sidebands the keying adds.
    const double pad = ctw + tw / 2.0;
    const double nyq = p.sample_rate / 2.0;
    const double lo = std::max(p.band.low_hz - pad, 0.2 * p.band.low_hz);
    const double hi = std::max(std::min(p.band.high_hz + pad, nyq), p.band.high_hz);
    return {{lo, hi}, tw};
}

inline Waveform apply_rx_filter(const Waveform& w, const AicParams& p) {
    const RxFilterPlan plan = rx_filter_plan(p);
    return apply_bandpass(w, plan.band, plan.transition_hz);
}

} // namespace aic
