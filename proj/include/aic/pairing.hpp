#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <variant>

#include "adversary.hpp"
#include "channel.hpp"
#include "codec.hpp"
#include "receiver.hpp"
#include "rng.hpp"
#include "types.hpp"

namespace aic {

inline constexpr double kStreamLeadSilenceS = 0.2;
// The microphone keeps recording briefly after the stream ends, so the
// receive filter's edge taper never lands on the final slot.
inline constexpr double kStreamTailSilenceS = 0.05;

struct NoAttack {};
using AttackSpec = std::variant<NoAttack, CancellationAttack, OvershadowAttack, SlotEnergyInjection>;

enum class PairingVerdict { success, failed_attack_detected, failed_no_signal, failed_noise };

inline const char* to_string(PairingVerdict v) {
    switch (v) {
        case PairingVerdict::success: return "success";
        case PairingVerdict::failed_attack_detected: return "failed_attack_detected";
        case PairingVerdict::failed_no_signal: return "failed_no_signal";
        case PairingVerdict::failed_noise: return "failed_noise";
    }
    return "?";
}

// One device-pairing exchange: A keeps transmitting the framed key
// material back to back; B samples its microphone at some arbitrary
// moment and verifies what it hears.
struct PairingSession {
    Bits key_material;
    AicParams params{};
    std::size_t repetitions = 3;
    ChannelSpec channel{};
    NoiseSpec noise{};
    AttackSpec attack = NoAttack{};
    std::uint64_t session_seed = 0;
    // Where within the repeating stream the receiver starts listening;
    // drawn at random from the first repetition when unset.
    std::optional<double> receiver_start_offset_s;
};

struct PairingOutcome {
    PairingVerdict verdict = PairingVerdict::failed_no_signal;
    DecodeReport report;
    Bits sent;
    double measured_snr_db = 0.0;
};

// The loudspeaker signal for a whole session: `repetitions` frames
// back to back, as one continuously gated carrier. The tamper-evident
// construction needs an on slot with nothing under it to stay silent,
// so only the gated-noise carrier is allowed here.
inline Waveform transmitter_stream(const PairingSession& s) {
    if (s.key_material.empty()) throw std::invalid_argument("transmitter_stream: empty key material");
    if (s.repetitions == 0) throw std::invalid_argument("transmitter_stream: need at least one repetition");
    if (s.params.carrier_kind != CarrierKind::wgn)
        throw std::invalid_argument("transmitter_stream: pairing requires the gated-noise carrier");

    AicParams p = s.params;
    p.payload_bits = s.key_material.size();
    p.validate();

    const Bits frame = build_frame(s.key_material);
    Bits stream;
    stream.reserve(frame.size() * s.repetitions);
    for (std::size_t r = 0; r < s.repetitions; ++r) stream.insert(stream.end(), frame.begin(), frame.end());

    const CarrierProcess proc{CarrierKind::wgn, mix_seed(s.session_seed, 0x7478u)};
    return modulate(stream, p, proc);
}

// Simulate the exchange end to end and map the decode result onto a
// protocol verdict. The receiver's capture is guaranteed to begin with
// an attack-free noise-only window: the floor estimate is a trust
// anchor, and an attacker who could poison it before the exchange
// starts could defeat the threshold outright.
inline PairingOutcome run_pairing(const PairingSession& s) {
    AicParams p = s.params;
    p.payload_bits = s.key_material.size();
    p.validate();

    const Waveform tx = transmitter_stream(s);
    Waveform at_rx = apply_los(tx, s.channel);

    const double fs = p.sample_rate;
    const auto lead = static_cast<std::size_t>(std::lround(kStreamLeadSilenceS * fs));
    const std::size_t frame_len = p.frame_slots() * static_cast<std::size_t>(p.slot_samples());

    double start_s;
    if (s.receiver_start_offset_s) {
        start_s = *s.receiver_start_offset_s;
        if (start_s < 0.0) throw std::invalid_argument("run_pairing: negative receiver start offset");
    } else {
        Rng rng(mix_seed(s.session_seed, 0x6f6666u));
        start_s = rng.uniform() * static_cast<double>(frame_len) / fs;
    }
    const auto start = static_cast<std::size_t>(std::lround(start_s * fs));
    if (start >= at_rx.size()) throw std::invalid_argument("run_pairing: receiver starts after the stream ends");

    const std::size_t copied = at_rx.size() - start;
    Waveform capture;
    capture.sample_rate = fs;
    capture.samples.assign(lead, 0.0);
    capture.samples.insert(capture.samples.end(), at_rx.samples.begin() + static_cast<std::ptrdiff_t>(start),
                           at_rx.samples.end());
    capture.samples.insert(capture.samples.end(),
                           static_cast<std::size_t>(std::lround(kStreamTailSilenceS * fs)), 0.0);

    std::vector<const Waveform*> parts{&capture};

    NoiseSpec nspec = s.noise;
    nspec.band = p.band;
    nspec.seed = mix_seed(s.session_seed, 0x6e6fu);
    const Waveform noise = gen_noise(nspec, capture.duration_s(), fs);
    parts.push_back(&noise);

    Waveform attack_wave;
    if (!std::holds_alternative<NoAttack>(s.attack)) {
        const std::size_t attack_at = lead; // attacks act on the stream, never on the clean lead
        if (const auto* c = std::get_if<CancellationAttack>(&s.attack)) {
            Waveform victim;
            victim.sample_rate = fs;
            victim.samples.assign(capture.samples.begin() + static_cast<std::ptrdiff_t>(attack_at),
                                  capture.samples.end());
            Waveform relayed = relay_cancellation_signal(victim, *c);
            attack_wave.sample_rate = fs;
            attack_wave.samples.assign(attack_at, 0.0);
            attack_wave.samples.insert(attack_wave.samples.end(), relayed.samples.begin(), relayed.samples.end());
        } else if (const auto* o = std::get_if<OvershadowAttack>(&s.attack)) {
            OvershadowAttack shifted = *o;
            shifted.params = p;
            shifted.alignment_samples += static_cast<long>(attack_at);
            attack_wave = overshadow_signal(shifted, std::max(capture.size(), attack_at + frame_len));
        } else if (const auto* j = std::get_if<SlotEnergyInjection>(&s.attack)) {
            Waveform burst = slot_energy_injection(*j, p, capture.size() - attack_at);
            attack_wave.sample_rate = fs;
            attack_wave.samples.assign(attack_at, 0.0);
            attack_wave.samples.insert(attack_wave.samples.end(), burst.samples.begin(), burst.samples.end());
        }
        parts.push_back(&attack_wave);
    }

    const Waveform rx = superpose(parts);

    PairingOutcome out;
    out.sent = s.key_material;
    {
        // SNR over the stream portion; the silent lead and tail would
        // dilute it
        const auto first = capture.samples.begin() + static_cast<std::ptrdiff_t>(lead);
        const auto nfirst = noise.samples.begin() + static_cast<std::ptrdiff_t>(lead);
        Waveform sig_tail{std::vector<double>(first, first + static_cast<std::ptrdiff_t>(copied)), fs};
        Waveform noise_tail{std::vector<double>(nfirst, nfirst + static_cast<std::ptrdiff_t>(copied)), fs};
        out.measured_snr_db = measure_snr_db(sig_tail, noise_tail);
    }
    out.report = demodulate(rx, p, DecodeMode::ternary, kStreamLeadSilenceS);

    switch (out.report.failure) {
        case DecodeFailure::none:
            out.verdict = (out.report.data && *out.report.data == s.key_material)
                              ? PairingVerdict::success
                              : PairingVerdict::failed_attack_detected;
            break;
        case DecodeFailure::epsilon_detected:
            out.verdict = PairingVerdict::failed_attack_detected;
            break;
        case DecodeFailure::no_sync:
            out.verdict = PairingVerdict::failed_no_signal;
            break;
        case DecodeFailure::manchester_violation:
            out.verdict = PairingVerdict::failed_noise;
            break;
    }
    return out;
}

} // namespace aic
