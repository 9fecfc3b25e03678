#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "adversary.hpp"
#include "channel.hpp"
#include "codec.hpp"
#include "csv.hpp"
#include "pairing.hpp"
#include "receiver.hpp"
#include "rng.hpp"
#include "types.hpp"

namespace aic {

// Grid for the robustness/threshold sweeps. Empty axes fall back to
// the corresponding value in the base parameter set.
struct SweepGrid {
    std::vector<double> snrs_db;
    std::vector<double> gross_rates_bps;
    std::vector<double> bandwidths_hz;   // bands are centered on the base band's center
    std::vector<double> thresholds_db;
    std::size_t repetitions = 200;
    std::size_t payload_bits = 128;
    std::uint64_t base_seed = 1;
};

// Error accounting: an epsilon decision counts as one bit error, and a
// capture with no detected frame counts every bit as errored.
inline std::pair<std::size_t, std::size_t> ber_counts(const Bits& sent, const DecodeReport& rep) {
    const std::size_t total = sent.size();
    if (rep.failure == DecodeFailure::no_sync || rep.pair_decisions.size() != total)
        return {total, total};
    std::size_t errors = 0;
    for (std::size_t i = 0; i < total; ++i) {
        const Trit t = rep.pair_decisions[i];
        if (t == Trit::epsilon || static_cast<std::uint8_t>(t) != sent[i]) ++errors;
    }
    return {errors, total};
}

inline Bits random_payload(std::size_t bits, Rng& rng) {
    Bits b(bits);
    for (auto& x : b) x = static_cast<std::uint8_t>(rng.uniform_int(2));
    return b;
}

namespace detail {

// One clean transmission as the receiver hears it: silent lead, one
// frame, a short tail (keeps the last slot clear of the receive
// filter's edge taper), additive in-band noise over the whole capture.
inline Waveform simulate_capture(const Bits& payload, const AicParams& p, std::uint64_t seed,
                                 Waveform* frame_out = nullptr) {
    const Bits frame = build_frame(payload);
    const CarrierProcess proc{p.carrier_kind, mix_seed(seed, 0x7478u)};
    Waveform tx = modulate(frame, p, proc);

    const auto lead = static_cast<std::size_t>(std::lround(kStreamLeadSilenceS * p.sample_rate));
    const auto tail = static_cast<std::size_t>(std::lround(0.05 * p.sample_rate));
    Waveform capture;
    capture.sample_rate = p.sample_rate;
    capture.samples.assign(lead, 0.0);
    capture.samples.insert(capture.samples.end(), tx.samples.begin(), tx.samples.end());
    capture.samples.insert(capture.samples.end(), tail, 0.0);
    if (frame_out) *frame_out = std::move(tx);

    NoiseSpec nspec;
    nspec.power_dbfs = p.noise_floor_dbfs;
    nspec.band = p.band;
    nspec.seed = mix_seed(seed, 0x6e7au);
    const Waveform noise = gen_noise(nspec, capture.duration_s(), p.sample_rate);
    return superpose(capture, noise);
}

} // namespace detail

struct RobustnessRow {
    double snr_db{};
    double gross_bps{};
    double bandwidth_hz{};
    std::size_t trials{};
    std::size_t bit_errors{};
    std::size_t total_bits{};
    double ber{};
};

inline std::vector<RobustnessRow> sweep_robustness(const SweepGrid& g, const AicParams& base) {
    base.validate();
    const std::vector<double> snrs = g.snrs_db.empty() ? std::vector<double>{base.target_snr_db} : g.snrs_db;
    const std::vector<double> rates =
        g.gross_rates_bps.empty() ? std::vector<double>{1.0 / base.slot_duration_s} : g.gross_rates_bps;
    const std::vector<double> bws =
        g.bandwidths_hz.empty() ? std::vector<double>{base.band.width_hz()} : g.bandwidths_hz;
    const double center = base.band.center_hz();

    std::vector<RobustnessRow> rows;
    for (std::size_t bi = 0; bi < bws.size(); ++bi) {
        for (std::size_t ri = 0; ri < rates.size(); ++ri) {
            for (std::size_t si = 0; si < snrs.size(); ++si) {
                AicParams p = base;
                p.band = Band{center - bws[bi] / 2.0, center + bws[bi] / 2.0};
                p.slot_duration_s = 1.0 / rates[ri];
                p.target_snr_db = snrs[si];
                p.payload_bits = g.payload_bits;
                p.validate();

                RobustnessRow row;
                row.snr_db = snrs[si];
                row.gross_bps = rates[ri];
                row.bandwidth_hz = bws[bi];
                row.trials = g.repetitions;
                for (std::size_t t = 0; t < g.repetitions; ++t) {
                    const std::uint64_t seed = mix_seed(g.base_seed, bi, ri, si, t);
                    Rng pay(mix_seed(seed, 0x706cu));
                    const Bits payload = random_payload(g.payload_bits, pay);
                    const Waveform rx = detail::simulate_capture(payload, p, seed);
                    const DecodeReport rep = demodulate(rx, p, DecodeMode::ternary);
                    const auto [err, tot] = ber_counts(payload, rep);
                    row.bit_errors += err;
                    row.total_bits += tot;
                }
                row.ber = row.total_bits ? static_cast<double>(row.bit_errors) / static_cast<double>(row.total_bits)
                                         : 0.0;
                rows.push_back(row);
            }
        }
    }
    return rows;
}

struct ThresholdRow {
    double snr_db{};
    double threshold_db{};
    std::size_t trials{};
    std::size_t bit_errors{};
    std::size_t total_bits{};
    double ber{};
};

// Sweep the detection margin. Synchronization and slot powers do not
// depend on the threshold, so each trial is simulated once and
// re-decided for every threshold value.
inline std::vector<ThresholdRow> sweep_threshold(const SweepGrid& g, const AicParams& base) {
    base.validate();
    if (g.thresholds_db.empty()) throw std::invalid_argument("sweep_threshold: no thresholds given");
    const std::vector<double> snrs = g.snrs_db.empty() ? std::vector<double>{base.target_snr_db} : g.snrs_db;

    std::vector<ThresholdRow> rows(snrs.size() * g.thresholds_db.size());
    for (std::size_t si = 0; si < snrs.size(); ++si) {
        for (std::size_t ti = 0; ti < g.thresholds_db.size(); ++ti) {
            ThresholdRow& row = rows[si * g.thresholds_db.size() + ti];
            row.snr_db = snrs[si];
            row.threshold_db = g.thresholds_db[ti];
            row.trials = g.repetitions;
        }

        AicParams p = base;
        p.target_snr_db = snrs[si];
        p.payload_bits = g.payload_bits;
        p.validate();
        const std::size_t frame_len = p.frame_slots() * static_cast<std::size_t>(p.slot_samples());

        for (std::size_t t = 0; t < g.repetitions; ++t) {
            const std::uint64_t seed = mix_seed(g.base_seed, 0x7468u, si, t);
            Rng pay(mix_seed(seed, 0x706cu));
            const Bits payload = random_payload(g.payload_bits, pay);
            const Waveform rx = detail::simulate_capture(payload, p, seed);

            const Waveform filtered = apply_rx_filter(rx, p);
            const double floor_est =
                std::max(estimate_noise_floor(filtered, kDefaultLeadingSilenceS), kNoiseFloorClampDbfs);
            std::optional<SlotPowers> sp;
            for (std::size_t o : synchronize(filtered, p)) {
                if (o + frame_len <= filtered.size()) {
                    sp = slot_powers(filtered, o, p);
                    break;
                }
            }

            for (std::size_t ti = 0; ti < g.thresholds_db.size(); ++ti) {
                ThresholdRow& row = rows[si * g.thresholds_db.size() + ti];
                if (!sp) {
                    row.bit_errors += payload.size();
                    row.total_bits += payload.size();
                    continue;
                }
                const FrameDecode fd = decode_frame(*sp, DecodeMode::ternary, floor_est + g.thresholds_db[ti]);
                DecodeReport rep;
                rep.failure = fd.failure;
                rep.pair_decisions = fd.pair_decisions;
                const auto [err, tot] = ber_counts(payload, rep);
                row.bit_errors += err;
                row.total_bits += tot;
            }
        }
    }
    for (ThresholdRow& row : rows)
        row.ber = row.total_bits ? static_cast<double>(row.bit_errors) / static_cast<double>(row.total_bits) : 0.0;
    return rows;
}

// Largest swept threshold that still decodes: the edge of the usable
// detection-margin range at this SNR.
inline double knee_threshold_db(const std::vector<ThresholdRow>& rows, double snr_db,
                                double max_ber = 0.5) {
    double knee = -std::numeric_limits<double>::infinity();
    for (const ThresholdRow& r : rows)
        if (r.snr_db == snr_db && r.ber <= max_ber) knee = std::max(knee, r.threshold_db);
    return knee;
}

struct CancellationRow {
    CarrierKind carrier = CarrierKind::wgn;
    double gross_bps{};
    double tau_s{};
    double rho_mean{};
    double attenuation_db_mean{};
    std::size_t seeds{};
};

// Cancellation resistance: for each delay, the carrier's
// autocorrelation and the attenuation an ideal inverting relay
// achieves against a modulated frame. Positive attenuation means the
// attack helps the attacker; negative means it adds energy.
inline std::vector<CancellationRow> sweep_cancellation(const std::vector<double>& taus_s, const AicParams& base,
                                                       std::vector<double> gross_rates_bps = {},
                                                       std::size_t seeds = 20, std::uint64_t base_seed = 1) {
    base.validate();
    if (taus_s.empty()) throw std::invalid_argument("sweep_cancellation: no delays given");
    if (seeds == 0) throw std::invalid_argument("sweep_cancellation: need at least one seed");
    if (gross_rates_bps.empty()) gross_rates_bps = {5.46, 21.8, 109.0, 218.0};

    const double max_tau = *std::max_element(taus_s.begin(), taus_s.end());
    const double carrier_dur = std::max(1.0, 4.0 * max_tau);

    // rho is a property of the carrier process, not of the bit rate:
    // measure it once per seed on an ungated carrier.
    std::vector<std::vector<double>> rho(seeds, std::vector<double>(taus_s.size()));
    for (std::size_t s = 0; s < seeds; ++s) {
        const CarrierProcess proc{base.carrier_kind, mix_seed(base_seed, 0x726fu, s)};
        const Waveform carrier = synthesize_carrier(proc, carrier_dur, base);
        for (std::size_t ti = 0; ti < taus_s.size(); ++ti)
            rho[s][ti] = autocorrelation_coefficient(carrier, taus_s[ti]);
    }

    std::vector<CancellationRow> rows;
    for (std::size_t ri = 0; ri < gross_rates_bps.size(); ++ri) {
        AicParams p = base;
        p.slot_duration_s = 1.0 / gross_rates_bps[ri];
        p.payload_bits = 16;
        p.validate();

        std::vector<double> atten(taus_s.size(), 0.0);
        for (std::size_t s = 0; s < seeds; ++s) {
            const std::uint64_t seed = mix_seed(base_seed, 0x6374u, ri, s);
            Rng pay(mix_seed(seed, 0x706cu));
            const Bits payload = random_payload(16, pay);
            const CarrierProcess proc{p.carrier_kind, mix_seed(seed, 0x7478u)};
            const Waveform frame = modulate(build_frame(payload), p, proc);

            for (std::size_t ti = 0; ti < taus_s.size(); ++ti) {
                const auto shift = static_cast<std::size_t>(std::lround(taus_s[ti] * p.sample_rate));
                if (shift == 0 || shift >= frame.size())
                    throw std::invalid_argument("sweep_cancellation: delay outside the frame duration");
                double ps = 0.0, pr = 0.0;
                for (std::size_t i = shift; i < frame.size(); ++i) {
                    const double d = frame.samples[i] - frame.samples[i - shift];
                    ps += frame.samples[i] * frame.samples[i];
                    pr += d * d;
                }
                double a;
                if (ps <= 0.0) a = 0.0;
                else if (pr <= 0.0) a = kAttenuationCapDb;
                else a = std::min(kAttenuationCapDb, 10.0 * std::log10(ps / pr));
                atten[ti] += a;
            }
        }

        for (std::size_t ti = 0; ti < taus_s.size(); ++ti) {
            CancellationRow row;
            row.carrier = base.carrier_kind;
            row.gross_bps = gross_rates_bps[ri];
            row.tau_s = taus_s[ti];
            double rsum = 0.0;
            for (std::size_t s = 0; s < seeds; ++s) rsum += rho[s][ti];
            row.rho_mean = rsum / static_cast<double>(seeds);
            row.attenuation_db_mean = atten[ti] / static_cast<double>(seeds);
            row.seeds = seeds;
            rows.push_back(row);
        }
    }
    return rows;
}

struct OvershadowRow {
    int legit_bit{};
    int attacker_bit{};   // -1 when the attacker stays silent
    double p1_dbfs{};
    double p2_dbfs{};
    int binary_decision{};
    Trit ternary_decision{};
};

// The slot-power arithmetic of overshadowing, row by row: what the
// receiver measures in a Manchester pair when the attacker injects its
// own on-slot on top of the victim's, and what each decision rule
// makes of it. Powers are averaged linearly across all pairs of a
// repeated-bit payload.
inline std::vector<OvershadowRow> overshadow_table(const AicParams& base, double legit_snr_db = 20.0,
                                                   double attacker_snr_db = 30.0, std::size_t pairs = 32,
                                                   std::uint64_t seed = 1) {
    AicParams p = base;
    p.payload_bits = pairs;
    p.target_snr_db = legit_snr_db;
    p.validate();
    const double floor = p.noise_floor_dbfs;
    const double threshold = floor + p.detection_threshold_db;
    const auto slot_len = static_cast<std::size_t>(p.slot_samples());
    const std::size_t capture_len = p.frame_slots() * slot_len;

    constexpr int kCases[6][2] = {{0, -1}, {0, 0}, {0, 1}, {1, -1}, {1, 1}, {1, 0}};

    std::vector<OvershadowRow> rows;
    for (const auto& c : kCases) {
        const Bits legit_payload(pairs, static_cast<std::uint8_t>(c[0]));

        OvershadowAttack legit;
        legit.payload = legit_payload;
        legit.power_dbfs = floor + legit_snr_db;
        legit.alignment_samples = 0;
        legit.params = p;
        legit.seed = mix_seed(seed, 0x6c67u, static_cast<std::uint64_t>(c[0] * 3 + c[1] + 1));
        const Waveform legit_wave = overshadow_signal(legit, capture_len);

        NoiseSpec nspec;
        nspec.power_dbfs = floor;
        nspec.band = p.band;
        nspec.seed = mix_seed(seed, 0x6e7au, static_cast<std::uint64_t>(c[0] * 3 + c[1] + 1));
        const Waveform noise = gen_noise(nspec, static_cast<double>(capture_len) / p.sample_rate, p.sample_rate);

        Waveform rx;
        if (c[1] >= 0) {
            OvershadowAttack atk = legit;
            atk.payload = Bits(pairs, static_cast<std::uint8_t>(c[1]));
            atk.power_dbfs = floor + attacker_snr_db;
            atk.seed = mix_seed(seed, 0x61746bu, static_cast<std::uint64_t>(c[0] * 3 + c[1] + 1));
            const Waveform attack_wave = overshadow_signal(atk, capture_len);
            rx = superpose(legit_wave, noise, attack_wave);
        } else {
            rx = superpose(legit_wave, noise);
        }

        // Every component is already band-limited; a second receive
        // filter would only smear the slot edges again.
        const SlotPowers sp = slot_powers(rx, 0, p);
        double ms1 = 0.0, ms2 = 0.0;
        for (std::size_t i = 0; i < pairs; ++i) {
            ms1 += dbfs_to_mean_square(sp.powers_dbfs[6 + 2 * i]);
            ms2 += dbfs_to_mean_square(sp.powers_dbfs[7 + 2 * i]);
        }
        ms1 /= static_cast<double>(pairs);
        ms2 /= static_cast<double>(pairs);

        OvershadowRow row;
        row.legit_bit = c[0];
        row.attacker_bit = c[1];
        row.p1_dbfs = power_dbfs(ms1);
        row.p2_dbfs = power_dbfs(ms2);
        row.binary_decision = decide_binary(row.p1_dbfs, row.p2_dbfs);
        row.ternary_decision = decide_ternary(row.p1_dbfs, row.p2_dbfs, threshold);
        rows.push_back(row);
    }
    return rows;
}

struct AttackTrialResult {
    Bits sent;
    Bits attacker_payload;
    long alignment_samples{};
    double attacker_power_dbfs{};
    DecodeReport ternary;
    DecodeReport binary;
};

// One randomized overshadowing attempt against a single frame,
// decoded under both rules so the rules can be compared on identical
// captures. `force_aligned` pins the attack frame exactly onto the
// victim frame (the attacker's best case).
inline AttackTrialResult run_overshadow_trial(const AicParams& base, std::uint64_t seed,
                                              bool force_aligned = false) {
    AicParams p = base;
    p.validate();

    Rng rng(mix_seed(seed, 0x61747280u));
    const Bits payload = random_payload(p.payload_bits, rng);
    const Bits attacker_payload = random_payload(p.payload_bits, rng);

    Waveform frame_wave;
    Waveform clean = detail::simulate_capture(payload, p, seed, &frame_wave);
    const auto lead = static_cast<std::size_t>(std::lround(kStreamLeadSilenceS * p.sample_rate));
    const std::size_t frame_len = frame_wave.size();

    AttackTrialResult res;
    res.sent = payload;
    res.attacker_payload = attacker_payload;
    res.alignment_samples =
        force_aligned ? 0 : static_cast<long>(rng.uniform_int(static_cast<std::uint64_t>(2 * frame_len)));
    res.attacker_power_dbfs = p.noise_floor_dbfs + rng.uniform(12.0, 35.0);

    OvershadowAttack atk;
    atk.payload = attacker_payload;
    atk.power_dbfs = res.attacker_power_dbfs;
    atk.alignment_samples = res.alignment_samples + static_cast<long>(lead);
    atk.params = p;
    atk.seed = mix_seed(seed, 0x61746b32u);
    const Waveform attack_wave =
        overshadow_signal(atk, std::max(clean.size(), static_cast<std::size_t>(atk.alignment_samples) + frame_len));

    const Waveform rx = superpose(clean, attack_wave);
    res.ternary = demodulate(rx, p, DecodeMode::ternary);
    res.binary = demodulate(rx, p, DecodeMode::binary);
    return res;
}

// --- CSV output -----------------------------------------------------

namespace detail {

inline std::ofstream open_csv(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    return f;
}

inline std::string rule_line(std::uint64_t seed) {
    return "# rule: epsilon=bit-error, nosync=all-errored; seed=" + std::to_string(seed) + "\n";
}

} // namespace detail

inline void write_robustness_csv(const std::string& path, const std::vector<RobustnessRow>& rows,
                                 std::uint64_t base_seed) {
    std::ofstream f = detail::open_csv(path);
    f << detail::rule_line(base_seed) << "snr_db,gross_bps,bandwidth_hz,trials,bit_errors,total_bits,ber\n";
    for (const auto& r : rows) {
        std::string line;
        detail::append_double(line, r.snr_db);
        line += ',';
        detail::append_double(line, r.gross_bps);
        line += ',';
        detail::append_double(line, r.bandwidth_hz);
        line += ',' + std::to_string(r.trials) + ',' + std::to_string(r.bit_errors) + ',' +
                std::to_string(r.total_bits) + ',';
        detail::append_double(line, r.ber);
        line += '\n';
        f << line;
    }
    if (!f) throw std::runtime_error("write failed for " + path);
}

inline void write_threshold_csv(const std::string& path, const std::vector<ThresholdRow>& rows,
                                std::uint64_t base_seed) {
    std::ofstream f = detail::open_csv(path);
    f << detail::rule_line(base_seed) << "snr_db,threshold_db,trials,bit_errors,total_bits,ber\n";
    for (const auto& r : rows) {
        std::string line;
        detail::append_double(line, r.snr_db);
        line += ',';
        detail::append_double(line, r.threshold_db);
        line += ',' + std::to_string(r.trials) + ',' + std::to_string(r.bit_errors) + ',' +
                std::to_string(r.total_bits) + ',';
        detail::append_double(line, r.ber);
        line += '\n';
        f << line;
    }
    if (!f) throw std::runtime_error("write failed for " + path);
}

inline void write_cancellation_csv(const std::string& path, const std::vector<CancellationRow>& rows,
                                   std::uint64_t base_seed) {
    std::ofstream f = detail::open_csv(path);
    f << "# seed=" << base_seed << "\ncarrier,gross_bps,tau_ms,rho_mean,attenuation_db_mean,seeds\n";
    for (const auto& r : rows) {
        std::string line = std::string(to_string(r.carrier)) + ',';
        detail::append_double(line, r.gross_bps);
        line += ',';
        detail::append_double(line, r.tau_s * 1e3);
        line += ',';
        detail::append_double(line, r.rho_mean);
        line += ',';
        detail::append_double(line, r.attenuation_db_mean);
        line += ',' + std::to_string(r.seeds) + '\n';
        f << line;
    }
    if (!f) throw std::runtime_error("write failed for " + path);
}

inline void write_overshadow_csv(const std::string& path, const std::vector<OvershadowRow>& rows,
                                 double threshold_dbfs, std::uint64_t seed) {
    std::ofstream f = detail::open_csv(path);
    f << "# threshold_dbfs=" << detail::format_double(threshold_dbfs) << "; seed=" << seed
      << "\nlegit_bit,attacker_bit,p1_dbfs,p2_dbfs,binary,ternary\n";
    for (const auto& r : rows) {
        std::string line = std::to_string(r.legit_bit) + ',';
        line += r.attacker_bit < 0 ? std::string("-") : std::to_string(r.attacker_bit);
        line += ',';
        detail::append_double(line, r.p1_dbfs);
        line += ',';
        detail::append_double(line, r.p2_dbfs);
        line += ',' + std::to_string(r.binary_decision) + ',';
        line += trit_char(r.ternary_decision);
        line += '\n';
        f << line;
    }
    if (!f) throw std::runtime_error("write failed for " + path);
}

} // namespace aic
