#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "codec.hpp"
#include "dsp.hpp"
#include "types.hpp"

namespace aic {

enum class Trit : std::uint8_t { zero = 0, one = 1, epsilon = 2 };

inline char trit_char(Trit t) { return t == Trit::zero ? '0' : t == Trit::one ? '1' : 'e'; }

enum class DecodeMode { binary, ternary };

enum class DecodeFailure { none, no_sync, epsilon_detected, manchester_violation };

inline const char* to_string(DecodeFailure f) {
    switch (f) {
        case DecodeFailure::none: return "none";
        case DecodeFailure::no_sync: return "no_sync";
        case DecodeFailure::epsilon_detected: return "epsilon_detected";
        case DecodeFailure::manchester_violation: return "manchester_violation";
    }
    return "?";
}

// Per-slot mean-square powers (dBFS) for one frame, measured over the
// slot interior (a small guard at each edge keeps boundary transients
// out of the window without giving up integration time).
struct SlotPowers {
    std::vector<double> powers_dbfs;
    double slot_duration_s{};
    std::size_t frame_offset{};
};

struct FrameDecode {
    std::vector<Trit> pair_decisions;
    std::optional<Bits> data;
    DecodeFailure failure = DecodeFailure::none;
};

struct DecodeReport {
    DecodeMode mode = DecodeMode::ternary;
    std::vector<std::size_t> sync_offsets;      // every detected delimiter
    std::vector<SlotPowers> frames;             // powers for frames that fit the buffer
    std::vector<Trit> pair_decisions;           // decisions for the first frame
    std::optional<Bits> data;
    DecodeFailure failure = DecodeFailure::no_sync;
    double noise_floor_dbfs = 0.0;
    double threshold_dbfs = 0.0;
};

// Receiver tuning. A candidate backed by decodable payload slots is
// accepted on two tests: delimiter-template correlation (a truncated
// (1,1,0,0,0,...) pattern at the capture edge correlates at ~0.71, a
// real delimiter near 1) and mean one-hotness of the Manchester pairs
// that follow (grid-aligned pairs put all energy in one slot of each
// pair; a misaligned grid over payload slots reads half-and-half
// mixtures, and trailing silence reads none). A candidate too close to
// the buffer end to check any pair faces the stricter correlation gate
// alone.
inline constexpr double kSlotGuardFraction = 0.01;
inline constexpr double kSyncCoarseCorrMin = 0.6;
inline constexpr double kSyncRefinedCorrMin = 0.85;
inline constexpr double kSyncPairedCorrMin = 0.75;
inline constexpr double kSyncPairOneHotMin = 0.75;
inline constexpr double kSyncPairMinOneHot = 0.5;
inline constexpr double kSyncContrastMinDb = 3.0;
inline constexpr double kNoiseFloorClampDbfs = -140.0;
inline constexpr double kDefaultLeadingSilenceS = 0.15;

// Mean-square power (dBFS) of the leading noise-only segment. The
// caller passes the already bandpass-filtered capture.
inline double estimate_noise_floor(const Waveform& w, double leading_silence_s) {
    if (leading_silence_s < 0.05)
        throw std::invalid_argument("estimate_noise_floor: need at least 50 ms of leading silence");
    const long n = std::lround(leading_silence_s * w.sample_rate);
    if (n <= 0 || static_cast<std::size_t>(n) > w.size())
        throw std::invalid_argument("estimate_noise_floor: recording shorter than the declared silence");
    return power_dbfs(mean_square(std::span<const double>(w.samples.data(), static_cast<std::size_t>(n))));
}

namespace detail {

struct SyncScorer {
    const dsp::CumulativeEnergy& cum;
    std::size_t slot_len;
    std::size_t limit;     // last valid start for a 6-slot window
    std::size_t wave_size; // samples in the buffer
    std::size_t max_pairs; // payload pairs to inspect after the window

    double slot_power(std::size_t start, std::size_t slot) const {
        return cum.window_mean(start + slot * slot_len, start + (slot + 1) * slot_len);
    }

    // Normalized correlation of the six slot powers against the
    // delimiter template (1,1,1,0,0,0).
    double correlation(std::size_t start) const {
        double p[6];
        double mean = 0.0;
        for (std::size_t j = 0; j < 6; ++j) {
            p[j] = slot_power(start, j);
            mean += p[j];
        }
        mean /= 6.0;
        double dot = 0.0, var = 0.0;
        for (std::size_t j = 0; j < 6; ++j) {
            const double c = p[j] - mean;
            dot += (j < 3 ? 0.5 : -0.5) * c;
            var += c * c;
        }
        if (var <= 0.0) return 0.0;
        return dot / std::sqrt(1.5 * var);
    }

    double contrast_db(std::size_t start) const {
        double on = 0.0, off = 0.0;
        for (std::size_t j = 0; j < 3; ++j) on += slot_power(start, j);
        for (std::size_t j = 3; j < 6; ++j) off += slot_power(start, j);
        if (off <= 0.0) return on > 0.0 ? std::numeric_limits<double>::infinity()
                                        : -std::numeric_limits<double>::infinity();
        return 10.0 * std::log10(on / off);
    }

    // One-hotness |p1-p2|/(p1+p2) of the payload pairs following the
    // delimiter window, over up to max_pairs pairs that fit the buffer.
    // mean and min are -1 when no pair fits. The min matters: a
    // grid-aligned frame is strongly one-hot in every pair, while a
    // fractional-slot impostor that gets lucky on average still reads
    // some pair as an even mixture.
    struct PairStats {
        double mean;
        double min;
        std::size_t n;
    };
    PairStats pair_stats(std::size_t start) const {
        double sum = 0.0;
        double mn = std::numeric_limits<double>::infinity();
        std::size_t n = 0;
        for (std::size_t i = 0; i < max_pairs; ++i) {
            if (start + (8 + 2 * i) * slot_len > wave_size) break;
            const double p1 = slot_power(start, 6 + 2 * i);
            const double p2 = slot_power(start, 7 + 2 * i);
            const double oh = p1 + p2 > 0.0 ? std::abs(p1 - p2) / (p1 + p2) : 0.0;
            sum += oh;
            mn = std::min(mn, oh);
            ++n;
        }
        if (!n) return {-1.0, -1.0, 0};
        return {sum / static_cast<double>(n), mn, n};
    }

    double pair_onehot(std::size_t start) const { return pair_stats(start).mean; }

    // Sample-granular refinement score: normalized on/off contrast of
    // the delimiter window plus pair one-hotness. Raw on-minus-off
    // energy drifts into the slot before the delimiter when a
    // back-to-back frame ends in 0 (that slot is on, so shifting left
    // is free energy); the normalized form has no such incentive, and
    // the one-hotness term peaks sharply on the true slot grid.
    double refine_score(std::size_t start) const {
        const double on = cum.window_sum(start, start + 3 * slot_len);
        const double off = cum.window_sum(start + 3 * slot_len, start + 6 * slot_len);
        if (on + off <= 0.0) return 0.0;
        double score = (on - off) / (on + off);
        const double oh = pair_onehot(start);
        if (oh > 0.0) score += oh;
        return score;
    }

    // Acceptance test for a refined candidate. When payload pairs follow
    // within the buffer, their one-hotness separates the true slot grid
    // from fractional-slot impostors and a relaxed correlation bound
    // tolerates noisy delimiters; with no pair in view (frame tail at the
    // very end of a capture) only a strict delimiter match is trusted.
    bool accepts(std::size_t start) const {
        if (contrast_db(start) < kSyncContrastMinDb) return false;
        const PairStats st = pair_stats(start);
        if (st.n > 0)
            return correlation(start) >= kSyncPairedCorrMin && st.mean >= kSyncPairOneHotMin &&
                   st.min >= kSyncPairMinOneHot;
        return correlation(start) >= kSyncRefinedCorrMin;
    }
};

} // namespace detail

// Delimiter search: scan the slot-power envelope on a T_s/8 grid, keep
// correlation peaks, then refine each candidate at sample granularity
// within +/- half a slot.
inline std::vector<std::size_t> synchronize(const Waveform& w, const AicParams& p) {
    p.validate();
    const long slot_len_l = p.slot_samples();
    if (slot_len_l < kMinSlotSamples) throw std::invalid_argument("synchronize: slot shorter than 8 samples");
    const auto slot_len = static_cast<std::size_t>(slot_len_l);
    if (w.size() < 6 * slot_len) return {};

    const dsp::CumulativeEnergy cum(w.samples);
    const std::size_t limit = w.size() - 6 * slot_len;
    const std::size_t max_pairs = std::min<std::size_t>(8, p.payload_bits);
    const detail::SyncScorer scorer{cum, slot_len, limit, w.size(), max_pairs};

    const std::size_t step = std::max<std::size_t>(1, slot_len / 8);

    // Cluster coarse hits (gaps over 3 slots separate clusters), keep
    // each cluster's extent for refinement.
    struct Cluster {
        std::size_t first, last;
    };
    std::vector<Cluster> coarse;
    {
        std::size_t last_hit = 0;
        bool in_cluster = false;
        for (std::size_t o = 0;; o += step) {
            const bool done = o > limit;
            const bool hit = !done && scorer.correlation(o) > kSyncCoarseCorrMin &&
                             scorer.contrast_db(o) >= kSyncContrastMinDb;
            if (hit) {
                if (!in_cluster || o > last_hit + 3 * slot_len) {
                    coarse.push_back({o, o});
                    in_cluster = true;
                } else {
                    coarse.back().last = o;
                }
                last_hit = o;
            } else if (done) {
                break;
            }
        }
    }

    // Within each cluster, take the best-scoring candidate among those
    // that pass the acceptance test. Gating before the argmax matters:
    // a one-slot-shifted grid can edge out the true grid on score alone
    // (both windows cover mostly-on slots) while failing the
    // correlation bound, and it must not veto the cluster.
    std::vector<std::size_t> offsets;
    for (const Cluster& cl : coarse) {
        const std::size_t lo = cl.first > slot_len / 2 ? cl.first - slot_len / 2 : 0;
        const std::size_t hi = std::min(cl.last + slot_len / 2, limit);
        std::size_t best = 0;
        double best_c = -std::numeric_limits<double>::infinity();
        for (std::size_t cand = lo; cand <= hi; ++cand) {
            const double c = scorer.refine_score(cand);
            if (c <= best_c) continue;
            if (!scorer.accepts(cand)) continue;
            best_c = c;
            best = cand;
        }
        if (!std::isfinite(best_c)) continue;
        if (!offsets.empty() && best < offsets.back() + slot_len) continue;
        offsets.push_back(best);
    }
    return offsets;
}

// Interior-window slot powers for the frame starting at `offset`.
inline SlotPowers slot_powers(const Waveform& w, std::size_t offset, const AicParams& p) {
    p.validate();
    const auto slot_len = static_cast<std::size_t>(p.slot_samples());
    const std::size_t slots = p.frame_slots();
    if (offset + slots * slot_len > w.size())
        throw std::invalid_argument("slot_powers: frame extends past the end of the recording");
    const std::size_t guard = std::max<std::size_t>(1, std::lround(kSlotGuardFraction * slot_len));

    const dsp::CumulativeEnergy cum(w.samples);
    SlotPowers sp;
    sp.slot_duration_s = p.slot_duration_s;
    sp.frame_offset = offset;
    sp.powers_dbfs.reserve(slots);
    for (std::size_t s = 0; s < slots; ++s) {
        const std::size_t a = offset + s * slot_len + guard;
        const std::size_t b = offset + (s + 1) * slot_len - guard;
        sp.powers_dbfs.push_back(power_dbfs(cum.window_mean(a, b)));
    }
    return sp;
}

inline int decide_binary(double p1_dbfs, double p2_dbfs) {
    return p1_dbfs > p2_dbfs ? 1 : 0;
}

// Tamper-evident pair decision: a bit is accepted only when exactly
// the expected slot is above threshold and its partner is below.
// Anything else (both above, both below, equality) is epsilon.
inline Trit decide_ternary(double p1_dbfs, double p2_dbfs, double threshold_dbfs) {
    if (p1_dbfs < threshold_dbfs && p2_dbfs > threshold_dbfs) return Trit::zero;
    if (p2_dbfs < threshold_dbfs && p1_dbfs > threshold_dbfs) return Trit::one;
    return Trit::epsilon;
}

// Decode one frame from its slot powers. Delimiter slots are skipped;
// each Manchester pair yields one decision.
inline FrameDecode decode_frame(const SlotPowers& sp, DecodeMode mode, double threshold_dbfs) {
    const std::size_t slots = sp.powers_dbfs.size();
    if (slots < 8 || (slots - 6) % 2 != 0)
        throw std::invalid_argument("decode_frame: slot powers do not cover a framed payload");
    const std::size_t n = (slots - 6) / 2;

    FrameDecode fd;
    fd.pair_decisions.reserve(n);
    Bits data;
    data.reserve(n);
    bool saw_epsilon = false;
    for (std::size_t i = 0; i < n; ++i) {
        const double p1 = sp.powers_dbfs[6 + 2 * i];
        const double p2 = sp.powers_dbfs[7 + 2 * i];
        if (mode == DecodeMode::binary) {
            const int b = decide_binary(p1, p2);
            fd.pair_decisions.push_back(b ? Trit::one : Trit::zero);
            data.push_back(static_cast<std::uint8_t>(b));
        } else {
            const Trit t = decide_ternary(p1, p2, threshold_dbfs);
            fd.pair_decisions.push_back(t);
            if (t == Trit::epsilon) saw_epsilon = true;
            else data.push_back(static_cast<std::uint8_t>(t));
        }
    }
    if (saw_epsilon) {
        fd.failure = DecodeFailure::epsilon_detected;
    } else {
        fd.failure = DecodeFailure::none;
        fd.data = std::move(data);
    }
    return fd;
}

// Full receive pipeline: bandpass -> noise floor -> synchronize ->
// slot powers -> pair decisions. Only the first frame that fits the
// buffer is decoded; later repetitions are ignored deliberately (an
// adversary must corrupt the frame the receiver actually uses, not
// merely append a clean one).
inline DecodeReport demodulate(const Waveform& w, const AicParams& p, DecodeMode mode,
                               double leading_silence_s = kDefaultLeadingSilenceS,
                               std::optional<double> noise_floor_override_dbfs = std::nullopt) {
    p.validate();
    DecodeReport rep;
    rep.mode = mode;
    rep.noise_floor_dbfs = kNoiseFloorClampDbfs;
    rep.threshold_dbfs = kNoiseFloorClampDbfs + p.detection_threshold_db;

    if (w.duration_s() < 0.05) return rep; // too short for a floor estimate, let alone a frame

    const Waveform filtered = apply_rx_filter(w, p);
    const double lead = std::min(leading_silence_s, filtered.duration_s());
    const double floor_est =
        noise_floor_override_dbfs
            ? std::max(*noise_floor_override_dbfs, kNoiseFloorClampDbfs)
            : std::max(estimate_noise_floor(filtered, lead), kNoiseFloorClampDbfs);
    rep.noise_floor_dbfs = floor_est;
    rep.threshold_dbfs = floor_est + p.detection_threshold_db;

    rep.sync_offsets = synchronize(filtered, p);

    const auto slot_len = static_cast<std::size_t>(p.slot_samples());
    const std::size_t frame_len = p.frame_slots() * slot_len;
    for (std::size_t o : rep.sync_offsets)
        if (o + frame_len <= filtered.size()) rep.frames.push_back(slot_powers(filtered, o, p));

    if (rep.frames.empty()) {
        rep.failure = DecodeFailure::no_sync;
        return rep;
    }

    FrameDecode fd = decode_frame(rep.frames.front(), mode, rep.threshold_dbfs);
    rep.pair_decisions = std::move(fd.pair_decisions);
    rep.data = std::move(fd.data);
    rep.failure = fd.failure;
    return rep;
}

} // namespace aic
