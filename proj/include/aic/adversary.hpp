#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "channel.hpp"
#include "codec.hpp"
#include "rng.hpp"
#include "types.hpp"

namespace aic {

inline constexpr double kAttenuationCapDb = 40.0;

// Signal-cancellation relay: the attacker records the transmission at
// its own position and replays the inverted signal toward the
// receiver, hoping the superposition nulls out.
struct CancellationAttack {
    double tau1_s = 0.0;            // transmitter -> attacker mic
    double tau2_s = 0.0;            // attacker speaker -> receiver
    double tau_r_s = 0.0;           // attacker internal processing
    double gain_correction = 1.0;   // attacker's estimate of 1/attenuation mismatch
    Geometry geometry{};
};

// Effective misalignment between the legitimate copy and the relayed
// inverse at the receiver.
inline double cancellation_delay(const CancellationAttack& atk) {
    const double tau_a = delay_from_distance(atk.geometry.distance_ab_m, atk.geometry);
    return atk.tau1_s + atk.tau2_s + atk.tau_r_s - tau_a;
}

// Best case for an attacker kept outside the safe radius around both
// devices: straight-line relay through the midpoint, zero processing
// time. Clamped at zero (a relay cannot arrive before the direct
// path).
inline double cancellation_delay_bound(const Geometry& g) {
    if (g.safe_radius_m <= 0.0 || g.distance_ab_m <= 0.0)
        throw std::invalid_argument("cancellation_delay_bound: distances must be positive");
    const double detour = 2.0 * g.safe_radius_m - g.distance_ab_m;
    return std::max(0.0, detour / g.speed_of_sound);
}

// The attacker's replayed waveform: inverted, delayed by the full loop
// latency, and gain-matched to the legitimate copy at the receiver.
inline Waveform relay_cancellation_signal(const Waveform& at_receiver, const CancellationAttack& atk) {
    const double delay = cancellation_delay(atk);
    if (delay < 0.0)
        throw std::invalid_argument("relay_cancellation_signal: relay would be non-causal");
    const long shift = std::lround(delay * at_receiver.sample_rate);
    Waveform out;
    out.sample_rate = at_receiver.sample_rate;
    out.samples.assign(at_receiver.size() + static_cast<std::size_t>(shift), 0.0);
    for (std::size_t i = 0; i < at_receiver.size(); ++i)
        out.samples[i + static_cast<std::size_t>(shift)] = -atk.gain_correction * at_receiver.samples[i];
    return out;
}

// Power ratio (dB) between the signal alone and the residual after the
// cancellation attempt, capped at +40 dB: beyond that the residual is
// below any plausible noise floor and the exact number is meaningless.
inline double attack_attenuation_db(const Waveform& signal, const Waveform& residual) {
    const double ps = mean_square(signal);
    const double pr = mean_square(residual);
    if (ps <= 0.0) throw std::invalid_argument("attack_attenuation_db: signal has no energy");
    if (pr <= 0.0) return kAttenuationCapDb;
    return std::min(kAttenuationCapDb, 10.0 * std::log10(ps / pr));
}

// Normalized autocorrelation of a waveform at lag tau. For the attack
// this is the quantity that decides everything: residual power after a
// delayed inverted replay is 2P(1-rho), so the attack only attenuates
// when rho(tau) > 0.5.
inline double autocorrelation_coefficient(const Waveform& w, double tau_s) {
    const long lag_l = std::lround(tau_s * w.sample_rate);
    if (lag_l < 0) throw std::invalid_argument("autocorrelation_coefficient: negative lag");
    const auto lag = static_cast<std::size_t>(lag_l);
    if (lag >= w.size()) throw std::invalid_argument("autocorrelation_coefficient: lag exceeds waveform");
    const std::size_t n = w.size() - lag;
    double dot = 0.0, e0 = 0.0, e1 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        dot += w.samples[i] * w.samples[i + lag];
        e0 += w.samples[i] * w.samples[i];
        e1 += w.samples[i + lag] * w.samples[i + lag];
    }
    const double denom = std::sqrt(e0 * e1);
    if (denom <= 0.0) return 0.0;
    return dot / denom;
}

// Overshadowing: the attacker transmits its own framed payload loud
// enough to dominate the legitimate one at the receiver.
struct OvershadowAttack {
    Bits payload;
    double power_dbfs = -60.0;       // on-slot power at the receiver
    long alignment_samples = 0;      // start offset relative to the victim frame
    AicParams params{};
    std::uint64_t seed = 0;
};

// Attacker waveform, sized to the victim capture. The attack frame is
// scaled so its on slots sit at `power_dbfs` (an off slot carries
// nothing, so power is specified where there is signal).
inline Waveform overshadow_signal(const OvershadowAttack& atk, std::size_t capture_len) {
    atk.params.validate();
    if (atk.payload.empty()) throw std::invalid_argument("overshadow_signal: empty payload");
    if (atk.alignment_samples < 0)
        throw std::invalid_argument("overshadow_signal: attack cannot start before the capture");

    AicParams p = atk.params;
    p.payload_bits = atk.payload.size();
    const Bits frame = build_frame(atk.payload);
    const CarrierProcess proc{p.carrier_kind, atk.seed};
    Waveform frame_wave = modulate(frame, p, proc);

    // modulate() calibrates whole-frame power; rescale so the on-slot
    // mean square hits the requested level instead.
    const auto slot_len = static_cast<std::size_t>(p.slot_samples());
    double on_ms = 0.0;
    std::size_t on_slots = 0;
    for (std::size_t s = 0; s < frame.size(); ++s) {
        if (!frame[s]) continue;
        on_ms += mean_square(std::span<const double>(frame_wave.samples.data() + s * slot_len, slot_len));
        ++on_slots;
    }
    on_ms /= static_cast<double>(on_slots);
    const double gain = std::sqrt(dbfs_to_mean_square(atk.power_dbfs) / on_ms);
    for (double& x : frame_wave.samples) x *= gain;

    Waveform out;
    out.sample_rate = frame_wave.sample_rate;
    out.samples.assign(capture_len, 0.0);
    const auto start = static_cast<std::size_t>(atk.alignment_samples);
    for (std::size_t i = 0; i < frame_wave.size() && start + i < capture_len; ++i)
        out.samples[start + i] = frame_wave.samples[i];
    return out;
}

// Blind jammer: dumps band-limited noise into random slots without
// knowing the payload. Useful as a baseline attacker.
struct SlotEnergyInjection {
    double power_dbfs = -70.0;
    double slot_probability = 0.5;
    std::uint64_t seed = 0;
};

inline Waveform slot_energy_injection(const SlotEnergyInjection& atk, const AicParams& p,
                                      std::size_t capture_len) {
    p.validate();
    if (atk.slot_probability < 0.0 || atk.slot_probability > 1.0)
        throw std::invalid_argument("slot_energy_injection: probability out of range");
    const auto slot_len = static_cast<std::size_t>(p.slot_samples());
    NoiseSpec spec;
    spec.power_dbfs = atk.power_dbfs;
    spec.band = p.band;
    spec.seed = mix_seed(atk.seed, 0x6a6du);
    Waveform noise = gen_noise(spec, static_cast<double>(capture_len) / p.sample_rate, p.sample_rate);
    noise.samples.resize(capture_len, 0.0);

    Rng rng(mix_seed(atk.seed, 0x6d61736bu));
    for (std::size_t s = 0; s * slot_len < capture_len; ++s) {
        if (rng.coin(atk.slot_probability)) continue;
        const std::size_t a = s * slot_len;
        const std::size_t b = std::min(capture_len, a + slot_len);
        std::fill(noise.samples.begin() + static_cast<std::ptrdiff_t>(a),
                  noise.samples.begin() + static_cast<std::ptrdiff_t>(b), 0.0);
    }
    return noise;
}

} // namespace aic
