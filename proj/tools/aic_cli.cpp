#include <CLI11.hpp>

#include <aic/aic.hpp>

#include <cstdint>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

aic::Band parse_band(const std::string& s) {
    const auto colon = s.find(':');
    if (colon == std::string::npos) throw CLI::ValidationError("--band", "expected LOW:HIGH in Hz");
    try {
        return aic::Band{std::stod(s.substr(0, colon)), std::stod(s.substr(colon + 1))};
    } catch (const std::exception&) {
        throw CLI::ValidationError("--band", "expected LOW:HIGH in Hz");
    }
}

aic::Bits parse_bits(const std::string& s) {
    aic::Bits b;
    b.reserve(s.size());
    for (char c : s) {
        if (c != '0' && c != '1') throw CLI::ValidationError("--bits", "expected a string of 0s and 1s");
        b.push_back(static_cast<std::uint8_t>(c - '0'));
    }
    if (b.empty()) throw CLI::ValidationError("--bits", "empty payload");
    return b;
}

std::string bits_to_text(const aic::Bits& b) {
    std::string s;
    s.reserve(b.size());
    for (auto x : b) s.push_back(x ? '1' : '0');
    return s;
}

std::string decisions_to_text(const std::vector<aic::Trit>& ts) {
    std::string s;
    s.reserve(ts.size());
    for (aic::Trit t : ts) s.push_back(aic::trit_char(t));
    return s;
}

struct CommonOpts {
    double sample_rate = 44100.0;
    std::string band = "16000:20000";
    double gross_bps = 200.0;
    double snr_db = 14.0;
    double noise_floor_dbfs = -87.0;
    double threshold_db = 11.0;
    std::string carrier = "wgn";
    double qpsk_fc_hz = 18000.0;
    double qpsk_minislot_s = 0.0;
    std::uint64_t seed = 1;

    void attach(CLI::App* cmd) {
        cmd->add_option("--sample-rate", sample_rate, "Sample rate in Hz");
        cmd->add_option("--band", band, "Carrier band as LOW:HIGH in Hz");
        cmd->add_option("--gross-bps", gross_bps, "Gross bit rate (slots per second)");
        cmd->add_option("--snr", snr_db, "Target SNR of the transmission in dB");
        cmd->add_option("--noise-floor-dbfs", noise_floor_dbfs, "Ambient noise power in dBFS");
        cmd->add_option("--threshold-db", threshold_db, "Detection threshold above the noise floor in dB");
        cmd->add_option("--carrier", carrier, "Carrier process: wgn or qpsk")
            ->check(CLI::IsMember({"wgn", "qpsk"}));
        cmd->add_option("--qpsk-fc", qpsk_fc_hz, "QPSK carrier frequency in Hz");
        cmd->add_option("--qpsk-minislot", qpsk_minislot_s, "QPSK symbol duration in s (0 = slot/4)");
        cmd->add_option("--seed", seed, "Base seed for every random draw");
    }

    aic::AicParams params(std::size_t payload_bits) const {
        aic::AicParams p;
        p.sample_rate = sample_rate;
        p.band = parse_band(band);
        p.slot_duration_s = 1.0 / gross_bps;
        p.carrier_kind = carrier == "qpsk" ? aic::CarrierKind::qpsk : aic::CarrierKind::wgn;
        p.qpsk_carrier_freq_hz = qpsk_fc_hz;
        p.qpsk_minislot_s = qpsk_minislot_s;
        p.target_snr_db = snr_db;
        p.noise_floor_dbfs = noise_floor_dbfs;
        p.detection_threshold_db = threshold_db;
        p.payload_bits = payload_bits;
        p.validate();
        return p;
    }
};

aic::Bits payload_from_flags(const std::string& bits_str, std::size_t random_bits, std::uint64_t seed) {
    if (!bits_str.empty()) return parse_bits(bits_str);
    aic::Rng rng(aic::mix_seed(seed, 0x706179u));
    return aic::random_payload(random_bits, rng);
}

int run_tx(const CommonOpts& common, const std::string& bits_str, std::size_t random_bits, double lead_s,
           double tail_s, bool add_noise, bool no_normalize, double normalize_dbfs, const std::string& out) {
    const aic::Bits payload = payload_from_flags(bits_str, random_bits, common.seed);
    const aic::AicParams p = common.params(payload.size());

    const aic::CarrierProcess proc{p.carrier_kind, aic::mix_seed(common.seed, 0x7478u)};
    const aic::Waveform frame = aic::modulate(aic::build_frame(payload), p, proc);

    aic::Waveform wave;
    wave.sample_rate = p.sample_rate;
    wave.samples.assign(static_cast<std::size_t>(std::lround(lead_s * p.sample_rate)), 0.0);
    wave.samples.insert(wave.samples.end(), frame.samples.begin(), frame.samples.end());
    wave.samples.insert(wave.samples.end(), static_cast<std::size_t>(std::lround(tail_s * p.sample_rate)), 0.0);

    if (add_noise) {
        aic::NoiseSpec nspec;
        nspec.power_dbfs = p.noise_floor_dbfs;
        nspec.band = p.band;
        nspec.seed = aic::mix_seed(common.seed, 0x6e7au);
        wave = aic::superpose(wave, aic::gen_noise(nspec, wave.duration_s(), p.sample_rate));
    }

    if (!no_normalize) {
        double peak = 0.0;
        for (double x : wave.samples) peak = std::max(peak, std::abs(x));
        if (peak > 0.0) {
            const double gain = std::pow(10.0, normalize_dbfs / 20.0) / peak;
            for (double& x : wave.samples) x *= gain;
        }
    }

    const std::size_t clipped = aic::write_wav(out, wave);
    const aic::BitRates rates = aic::bit_rates(p);
    std::cout << "wrote: " << out << '\n'
              << "payload: " << bits_to_text(payload) << '\n'
              << "samples: " << wave.size() << " (" << wave.duration_s() << " s)\n"
              << "frame_duration_s: " << frame.duration_s() << '\n'
              << "gross_bps: " << rates.gross_bps << "  net_bps: " << rates.net_bps << '\n'
              << "clipped_samples: " << clipped << '\n';
    return 0;
}

int run_rx(const CommonOpts& common, const std::string& in, std::size_t payload_bits, const std::string& mode_str,
           double lead_s, std::optional<double> assume_floor) {
    const aic::AicParams p = common.params(payload_bits);
    const aic::Waveform wave = aic::read_wav(in);
    const aic::DecodeMode mode = mode_str == "binary" ? aic::DecodeMode::binary : aic::DecodeMode::ternary;

    const aic::DecodeReport rep = aic::demodulate(wave, p, mode, lead_s, assume_floor);

    std::cout << "noise_floor_dbfs: " << rep.noise_floor_dbfs << '\n'
              << "threshold_dbfs: " << rep.threshold_dbfs << '\n';
    std::cout << "sync_offsets:";
    for (auto o : rep.sync_offsets) std::cout << ' ' << o;
    std::cout << '\n' << "frames: " << rep.frames.size() << '\n';
    if (!rep.pair_decisions.empty()) std::cout << "decisions: " << decisions_to_text(rep.pair_decisions) << '\n';
    if (rep.data) std::cout << "data: " << bits_to_text(*rep.data) << '\n';
    std::cout << "failure: " << aic::to_string(rep.failure) << '\n';
    return rep.failure == aic::DecodeFailure::none && rep.data ? 0 : 1;
}

int run_pair_cmd(const CommonOpts& common, const std::string& bits_str, std::size_t random_bits,
                 std::size_t reps, const std::string& attack, double tau_ms, double attacker_power_dbfs,
                 long align_samples, double jam_prob, std::optional<double> start_offset_s) {
    aic::PairingSession s;
    s.key_material = payload_from_flags(bits_str, random_bits, common.seed);
    s.params = common.params(s.key_material.size());
    s.repetitions = reps;
    s.noise.power_dbfs = s.params.noise_floor_dbfs;
    s.session_seed = common.seed;
    s.receiver_start_offset_s = start_offset_s;

    if (attack == "cancel") {
        aic::CancellationAttack atk;
        atk.tau1_s = tau_ms * 1e-3 + aic::delay_from_distance(atk.geometry.distance_ab_m, atk.geometry);
        s.attack = atk;
    } else if (attack == "overshadow") {
        aic::OvershadowAttack atk;
        aic::Rng rng(aic::mix_seed(common.seed, 0x61746bu));
        atk.payload = aic::random_payload(s.key_material.size(), rng);
        atk.power_dbfs = attacker_power_dbfs;
        atk.alignment_samples = align_samples;
        atk.seed = aic::mix_seed(common.seed, 0x61746b32u);
        s.attack = atk;
    } else if (attack == "jam") {
        aic::SlotEnergyInjection atk;
        atk.power_dbfs = attacker_power_dbfs;
        atk.slot_probability = jam_prob;
        atk.seed = aic::mix_seed(common.seed, 0x6a616du);
        s.attack = atk;
    }

    const aic::PairingOutcome out = aic::run_pairing(s);
    std::cout << "sent: " << bits_to_text(out.sent) << '\n'
              << "measured_snr_db: " << out.measured_snr_db << '\n'
              << "noise_floor_dbfs: " << out.report.noise_floor_dbfs << '\n'
              << "threshold_dbfs: " << out.report.threshold_dbfs << '\n';
    if (!out.report.pair_decisions.empty())
        std::cout << "decisions: " << decisions_to_text(out.report.pair_decisions) << '\n';
    if (out.report.data) std::cout << "data: " << bits_to_text(*out.report.data) << '\n';
    std::cout << "verdict: " << aic::to_string(out.verdict) << '\n';
    return out.verdict == aic::PairingVerdict::success ? 0 : 1;
}

int run_sweep_robustness(const CommonOpts& common, std::vector<double> snrs, std::vector<double> rates,
                         std::vector<double> bandwidths, std::size_t reps, std::size_t payload_bits,
                         const std::string& out) {
    aic::SweepGrid g;
    g.snrs_db = std::move(snrs);
    g.gross_rates_bps = std::move(rates);
    g.bandwidths_hz = std::move(bandwidths);
    g.repetitions = reps;
    g.payload_bits = payload_bits;
    g.base_seed = common.seed;
    const auto rows = aic::sweep_robustness(g, common.params(payload_bits));
    aic::write_robustness_csv(out, rows, g.base_seed);
    std::cout << "wrote " << rows.size() << " rows to " << out << '\n';
    return 0;
}

int run_sweep_threshold(const CommonOpts& common, std::vector<double> snrs, std::vector<double> thresholds,
                        std::size_t reps, std::size_t payload_bits, const std::string& out) {
    aic::SweepGrid g;
    g.snrs_db = std::move(snrs);
    g.thresholds_db = std::move(thresholds);
    g.repetitions = reps;
    g.payload_bits = payload_bits;
    g.base_seed = common.seed;
    const auto rows = aic::sweep_threshold(g, common.params(payload_bits));
    aic::write_threshold_csv(out, rows, g.base_seed);
    std::cout << "wrote " << rows.size() << " rows to " << out << '\n';
    for (double snr : g.snrs_db)
        std::cout << "knee(snr=" << snr << "): " << aic::knee_threshold_db(rows, snr) << " dB\n";
    return 0;
}

int run_sweep_cancellation(const CommonOpts& common, std::vector<double> taus_ms, std::vector<double> rates,
                           std::size_t seeds, const std::string& out) {
    std::vector<double> taus_s;
    taus_s.reserve(taus_ms.size());
    for (double t : taus_ms) taus_s.push_back(t * 1e-3);
    const auto rows = aic::sweep_cancellation(taus_s, common.params(16), std::move(rates), seeds, common.seed);
    aic::write_cancellation_csv(out, rows, common.seed);
    std::cout << "wrote " << rows.size() << " rows to " << out << '\n';
    return 0;
}

int run_overshadow_table(const CommonOpts& common, double legit_snr, double attacker_snr, std::size_t pairs,
                         const std::string& out) {
    const aic::AicParams p = common.params(pairs);
    const auto rows = aic::overshadow_table(p, legit_snr, attacker_snr, pairs, common.seed);
    if (!out.empty())
        aic::write_overshadow_csv(out, rows, p.noise_floor_dbfs + p.detection_threshold_db, common.seed);

    std::cout << "legit attacker      p1_dbfs      p2_dbfs binary ternary\n";
    for (const auto& r : rows) {
        std::cout << std::setw(5) << r.legit_bit << std::setw(9)
                  << (r.attacker_bit < 0 ? std::string("-") : std::to_string(r.attacker_bit)) << std::fixed
                  << std::setprecision(2) << std::setw(13) << r.p1_dbfs << std::setw(13) << r.p2_dbfs
                  << std::defaultfloat << std::setw(7) << r.binary_decision << std::setw(8)
                  << aic::trit_char(r.ternary_decision) << '\n';
    }
    if (!out.empty()) std::cout << "wrote " << rows.size() << " rows to " << out << '\n';
    return 0;
}

int run_spectrogram(const std::string& in, double freq_res, const std::string& out) {
    const aic::Waveform wave = aic::read_wav(in);
    const aic::SpectrogramMatrix m = aic::spectrogram(wave, freq_res);
    aic::write_spectrogram_csv(out, m);
    std::cout << "wrote " << m.time_s.size() << " x " << m.freq_hz.size() << " cells to " << out << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acoustic integrity codes: modulator, receiver, and attack simulators"};
    app.require_subcommand(1);

    CommonOpts common;

    // tx
    auto* tx = app.add_subcommand("tx", "Modulate a payload and write it as a WAV file");
    std::string tx_bits;
    std::size_t tx_random_bits = 16;
    double tx_lead = 0.2;
    double tx_tail = 0.05;
    bool tx_add_noise = false, tx_no_normalize = false;
    double tx_norm_dbfs = -1.0;
    std::string tx_out = "tx.wav";
    common.attach(tx);
    tx->add_option("--bits", tx_bits, "Payload as a string of 0s and 1s");
    tx->add_option("--random-bits", tx_random_bits, "Draw this many random payload bits instead");
    tx->add_option("--lead", tx_lead, "Leading silence in seconds");
    tx->add_option("--tail", tx_tail, "Trailing silence in seconds (keeps the last slot clear of filter taper)");
    tx->add_flag("--add-noise", tx_add_noise, "Mix in ambient noise at the configured floor");
    tx->add_flag("--no-normalize", tx_no_normalize, "Keep calibrated dBFS levels instead of peak-normalizing");
    tx->add_option("--normalize-dbfs", tx_norm_dbfs, "Peak level after normalization");
    tx->add_option("--out", tx_out, "Output WAV path");

    // rx
    auto* rx = app.add_subcommand("rx", "Demodulate a WAV capture");
    std::string rx_in, rx_mode = "ternary";
    std::size_t rx_payload_bits = 16;
    double rx_lead = 0.15;
    double rx_assume_floor = 0.0;
    common.attach(rx);
    rx->add_option("--in", rx_in, "Input WAV path")->required();
    rx->add_option("--payload-bits", rx_payload_bits, "Expected payload length in bits");
    rx->add_option("--mode", rx_mode, "Decision rule: ternary or binary")
        ->check(CLI::IsMember({"ternary", "binary"}));
    rx->add_option("--lead", rx_lead, "Noise-only lead used for the floor estimate, in seconds");
    auto* rx_floor_opt =
        rx->add_option("--assume-floor-dbfs", rx_assume_floor, "Skip floor estimation and use this value");

    // pair
    auto* pair = app.add_subcommand("pair", "Simulate one pairing exchange end to end");
    std::string pair_bits, pair_attack = "none";
    std::size_t pair_random_bits = 16, pair_reps = 3;
    double pair_tau_ms = 1.0, pair_attacker_power = -60.0, pair_jam_prob = 0.5;
    long pair_align = 0;
    double pair_start_offset = 0.0;
    common.attach(pair);
    pair->add_option("--bits", pair_bits, "Key material as a string of 0s and 1s");
    pair->add_option("--random-bits", pair_random_bits, "Draw this many random key bits instead");
    pair->add_option("--reps", pair_reps, "Back-to-back frame repetitions");
    pair->add_option("--attack", pair_attack, "Attack: none, cancel, overshadow, or jam")
        ->check(CLI::IsMember({"none", "cancel", "overshadow", "jam"}));
    pair->add_option("--tau-ms", pair_tau_ms, "Cancellation relay delay in ms");
    pair->add_option("--attacker-power-dbfs", pair_attacker_power, "Attacker on-slot power in dBFS");
    pair->add_option("--align-samples", pair_align, "Overshadow offset relative to the stream start");
    pair->add_option("--jam-prob", pair_jam_prob, "Probability a slot gets jammed");
    auto* pair_off_opt =
        pair->add_option("--start-offset-s", pair_start_offset, "Receiver start offset within the stream");

    // sweep-robustness
    auto* swr = app.add_subcommand("sweep-robustness", "BER across SNR, bit rate, and bandwidth");
    std::vector<double> swr_snrs{6, 8, 10, 12, 14, 16, 18, 20};
    std::vector<double> swr_rates{200};
    std::vector<double> swr_bws;
    std::size_t swr_reps = 200, swr_bits = 128;
    std::string swr_out = "robustness.csv";
    common.attach(swr);
    swr->add_option("--snrs", swr_snrs, "SNR grid in dB")->delimiter(',');
    swr->add_option("--rates", swr_rates, "Gross bit-rate grid in bps")->delimiter(',');
    swr->add_option("--bandwidths", swr_bws, "Bandwidth grid in Hz (bands centered on the default band)")
        ->delimiter(',');
    swr->add_option("--reps", swr_reps, "Trials per grid point");
    swr->add_option("--payload-bits", swr_bits, "Payload length in bits");
    swr->add_option("--out", swr_out, "Output CSV path");

    // sweep-threshold
    auto* swt = app.add_subcommand("sweep-threshold", "BER across the detection-threshold margin");
    std::vector<double> swt_snrs{10, 12, 14, 16, 18, 20};
    std::vector<double> swt_thresholds;
    std::size_t swt_reps = 50, swt_bits = 128;
    std::string swt_out = "threshold.csv";
    common.attach(swt);
    swt->add_option("--snrs", swt_snrs, "SNR grid in dB")->delimiter(',');
    swt->add_option("--thresholds", swt_thresholds, "Threshold grid in dB over the floor (default 5..25 by 0.5)")
        ->delimiter(',');
    swt->add_option("--reps", swt_reps, "Trials per SNR");
    swt->add_option("--payload-bits", swt_bits, "Payload length in bits");
    swt->add_option("--out", swt_out, "Output CSV path");

    // sweep-cancellation
    auto* swc = app.add_subcommand("sweep-cancellation", "Cancellation attenuation and carrier autocorrelation");
    std::vector<double> swc_taus{0.5, 0.8, 1.0, 1.17, 1.5, 2, 3, 4, 6, 8, 10, 12};
    std::vector<double> swc_rates;
    std::size_t swc_seeds = 20;
    std::string swc_out = "cancellation.csv";
    common.attach(swc);
    swc->add_option("--taus-ms", swc_taus, "Relay delay grid in ms")->delimiter(',');
    swc->add_option("--rates", swc_rates, "Gross bit rates in bps (default 5.46,21.8,109,218)")->delimiter(',');
    swc->add_option("--seeds", swc_seeds, "Carrier realizations per grid point");
    swc->add_option("--out", swc_out, "Output CSV path");

    // overshadow-table
    auto* ovt = app.add_subcommand("overshadow-table", "Slot powers and decisions under overshadowing");
    double ovt_legit_snr = 20.0, ovt_attacker_snr = 30.0;
    std::size_t ovt_pairs = 32;
    std::string ovt_out = "overshadow.csv";
    common.attach(ovt);
    ovt->add_option("--legit-snr", ovt_legit_snr, "Legitimate on-slot SNR in dB");
    ovt->add_option("--attacker-snr", ovt_attacker_snr, "Attacker on-slot SNR in dB");
    ovt->add_option("--pairs", ovt_pairs, "Manchester pairs to average over");
    ovt->add_option("--out", ovt_out, "Output CSV path (empty to skip)");

    // spectrogram
    auto* spg = app.add_subcommand("spectrogram", "Write a spectrogram CSV for a WAV file");
    std::string spg_in, spg_out = "spectrogram.csv";
    double spg_res = 50.0;
    spg->add_option("--in", spg_in, "Input WAV path")->required();
    spg->add_option("--freq-res", spg_res, "Frequency resolution in Hz");
    spg->add_option("--out", spg_out, "Output CSV path");

    try {
        app.parse(argc, argv);

        if (tx->parsed())
            return run_tx(common, tx_bits, tx_random_bits, tx_lead, tx_tail, tx_add_noise, tx_no_normalize,
                          tx_norm_dbfs, tx_out);
        if (rx->parsed())
            return run_rx(common, rx_in, rx_payload_bits, rx_mode, rx_lead,
                          rx_floor_opt->count() ? std::optional<double>(rx_assume_floor) : std::nullopt);
        if (pair->parsed())
            return run_pair_cmd(common, pair_bits, pair_random_bits, pair_reps, pair_attack, pair_tau_ms,
                                pair_attacker_power, pair_align, pair_jam_prob,
                                pair_off_opt->count() ? std::optional<double>(pair_start_offset) : std::nullopt);
        if (swr->parsed()) return run_sweep_robustness(common, swr_snrs, swr_rates, swr_bws, swr_reps, swr_bits, swr_out);
        if (swt->parsed()) {
            if (swt_thresholds.empty())
                for (double t = 5.0; t <= 25.0 + 1e-9; t += 0.5) swt_thresholds.push_back(t);
            return run_sweep_threshold(common, swt_snrs, swt_thresholds, swt_reps, swt_bits, swt_out);
        }
        if (swc->parsed()) return run_sweep_cancellation(common, swc_taus, swc_rates, swc_seeds, swc_out);
        if (ovt->parsed()) return run_overshadow_table(common, ovt_legit_snr, ovt_attacker_snr, ovt_pairs, ovt_out);
        if (spg->parsed()) return run_spectrogram(spg_in, spg_res, spg_out);
        return 2;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
