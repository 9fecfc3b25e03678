// Acceptance gate: one test case per release criterion, each printing a
// [PASS]/[FAIL] line with the measured numbers so the run log doubles
// as a results table.
#include <catch2/catch_amalgamated.hpp>

#include <aic/aic.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using aic::Bits;

namespace {

bool report(int idx, const std::string& what, bool ok, const std::string& detail) {
    std::cout << (ok ? "[PASS]" : "[FAIL]") << " criterion " << idx << ": " << what << " (" << detail
              << ")" << std::endl;
    return ok;
}

std::string fmt(double v, int prec = 3) {
    std::ostringstream ss;
    ss.setf(std::ios::fixed);
    ss.precision(prec);
    ss << v;
    return ss.str();
}

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

double elapsed_s(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace

TEST_CASE("criterion 1: headline robustness at the default operating point") {
    aic::SweepGrid g;
    g.snrs_db = {14.0};
    g.gross_rates_bps = {200.0};
    g.bandwidths_hz = {4000.0};
    g.repetitions = 200;
    g.payload_bits = 128;
    g.base_seed = 20260819;
    aic::AicParams base;

    const auto t0 = std::chrono::steady_clock::now();
    const auto rows = aic::sweep_robustness(g, base);
    const double secs = elapsed_s(t0);

    REQUIRE(rows.size() == 1);
    const bool ok = rows[0].ber <= 0.005 && secs <= 300.0;
    CHECK(report(1, "net 100 bps, snr 14 dB, 200 trials, ber <= 0.5%", ok,
                 "ber=" + fmt(rows[0].ber, 6) + " (" + std::to_string(rows[0].bit_errors) + "/" +
                     std::to_string(rows[0].total_bits) + " bits), " + fmt(secs, 1) + " s"));
}

TEST_CASE("criterion 2: envelope edge at 440 bps gross") {
    aic::SweepGrid g;
    g.snrs_db = {12.0};
    g.gross_rates_bps = {440.0};
    g.bandwidths_hz = {4000.0};
    g.repetitions = 200;
    g.payload_bits = 128;
    g.base_seed = 20260819;
    aic::AicParams base;

    const auto rows = aic::sweep_robustness(g, base);
    REQUIRE(rows.size() == 1);
    const bool ok = rows[0].ber < 0.01;
    CHECK(report(2, "440 bps gross, snr 12 dB, ber < 1%", ok,
                 "ber=" + fmt(rows[0].ber, 6) + " (" + std::to_string(rows[0].bit_errors) + "/" +
                     std::to_string(rows[0].total_bits) + " bits)"));
}

TEST_CASE("criterion 3: transmission time of a 128-bit payload") {
    aic::AicParams p;
    p.payload_bits = 128;
    aic::Rng rng(3);
    const Bits payload = aic::random_payload(128, rng);
    const aic::Waveform w = aic::modulate(aic::build_frame(payload), p, aic::CarrierProcess{p.carrier_kind, 3});
    const double dur = w.duration_s();
    const bool ok = std::abs(dur - 1.31) <= 0.05;
    CHECK(report(3, "128-bit frame lasts 1.31 s +/- 0.05 s", ok, "duration=" + fmt(dur, 4) + " s"));
}

TEST_CASE("criterion 4: detection threshold knee tracks snr + 3 dB") {
    aic::SweepGrid g;
    g.snrs_db = {10.0, 12.0, 14.0, 16.0, 18.0, 20.0};
    for (double th = 5.0; th <= 27.0; th += 0.5) g.thresholds_db.push_back(th);
    g.repetitions = 30;
    g.payload_bits = 128;
    g.base_seed = 20260819;
    aic::AicParams base;
    base.slot_duration_s = 1.0 / 220.0;

    const auto rows = aic::sweep_threshold(g, base);
    bool ok = true;
    std::string detail;
    for (double snr : g.snrs_db) {
        const double knee = aic::knee_threshold_db(rows, snr);
        if (std::abs(knee - (snr + 3.0)) > 1.5) ok = false;
        if (!detail.empty()) detail += ", ";
        detail += fmt(snr, 0) + "->" + fmt(knee, 1);
    }
    CHECK(report(4, "50% ber knee within 1.5 dB of snr+3 at 220 bps", ok, detail));
}

TEST_CASE("criterion 5: noise carrier resists delayed cancellation") {
    aic::AicParams p;
    p.band = {200.0, 800.0};
    const std::vector<double> taus = {1.17e-3, 1.5e-3, 2e-3, 2.5e-3, 3e-3, 4e-3, 6e-3, 8e-3, 10e-3, 12e-3};
    const auto rows = aic::sweep_cancellation(taus, p, {5.46}, 20, 20260819);

    bool ok = true;
    double worst_atten = -1e9, worst_rho = 0.0;
    for (const auto& r : rows) {
        worst_atten = std::max(worst_atten, r.attenuation_db_mean);
        if (r.attenuation_db_mean >= 0.0) ok = false;
        if (r.tau_s >= 1.5e-3) {
            worst_rho = std::max(worst_rho, std::abs(r.rho_mean));
            if (std::abs(r.rho_mean) >= 0.1) ok = false;
        }
    }
    CHECK(report(5, "attenuation < 0 dB over 1.17-12 ms and |rho| < 0.1 past 1.5 ms", ok,
                 "max attenuation=" + fmt(worst_atten, 2) + " dB, max |rho|=" + fmt(worst_rho, 3)));
}

TEST_CASE("criterion 6: deterministic carrier stays cancellable") {
    aic::AicParams p;
    p.band = {200.0, 800.0};
    p.carrier_kind = aic::CarrierKind::qpsk;
    p.qpsk_carrier_freq_hz = 500.0;
    p.slot_duration_s = 1.0 / 5.46;
    const auto rows = aic::sweep_cancellation({2e-3, 4e-3}, p, {5.46}, 20, 20260819);

    bool ok = true;
    std::string detail;
    for (const auto& r : rows) {
        if (r.attenuation_db_mean < 5.0 || r.rho_mean < 0.7) ok = false;
        if (!detail.empty()) detail += ", ";
        detail += fmt(r.tau_s * 1e3, 0) + "ms: a=" + fmt(r.attenuation_db_mean, 2) +
                  " dB rho=" + fmt(r.rho_mean, 3);
    }
    CHECK(report(6, "qpsk at 500 Hz: attenuation >= 5 dB and rho >= 0.7 at 2/4 ms", ok, detail));
}

TEST_CASE("criterion 7: overshadowing slot-power table") {
    aic::AicParams p;
    p.noise_floor_dbfs = -90.0;
    const auto rows = aic::overshadow_table(p, 20.0, 30.0, 32, 20260819);
    REQUIRE(rows.size() == 6);

    const double combined = 10.0 * std::log10(1e-7 + 1e-6); // -59.59
    struct Expect {
        double p1, p2, tol1, tol2;
        int binary;
        aic::Trit ternary;
    };
    const Expect want[6] = {
        {-90.0, -70.0, 1.5, 1.5, 0, aic::Trit::zero},   {-90.0, combined, 1.5, 0.5, 0, aic::Trit::zero},
        {-60.0, -70.0, 1.5, 1.5, 1, aic::Trit::epsilon}, {-70.0, -90.0, 1.5, 1.5, 1, aic::Trit::one},
        {combined, -90.0, 0.5, 1.5, 1, aic::Trit::one},  {-70.0, -60.0, 1.5, 1.5, 0, aic::Trit::epsilon},
    };

    bool ok = true;
    std::string detail;
    for (int i = 0; i < 6; ++i) {
        const auto& r = rows[static_cast<std::size_t>(i)];
        const auto& w = want[i];
        if (std::abs(r.p1_dbfs - w.p1) > w.tol1 || std::abs(r.p2_dbfs - w.p2) > w.tol2 ||
            r.binary_decision != w.binary || r.ternary_decision != w.ternary)
            ok = false;
        if (!detail.empty()) detail += " ";
        detail += std::string(1, aic::trit_char(r.ternary_decision));
    }
    detail = "ternary row decisions: " + detail + ", p1[4]=" + fmt(rows[4].p1_dbfs, 2) + " vs " +
             fmt(combined, 2);
    CHECK(report(7, "all six rows within tolerance, epsilon on both flip rows", ok, detail));
}

TEST_CASE("criterion 8: no forged payload survives ternary decoding") {
    aic::AicParams p;
    p.payload_bits = 16;

    std::size_t ternary_forgeries = 0, binary_witnesses = 0;
    std::size_t detected = 0, clean = 0, lost = 0;

    // 970 pairing runs cycling through the three attack families, each
    // against a full frame the receiver would otherwise accept.
    for (std::size_t t = 0; t < 970; ++t) {
        const std::uint64_t seed = aic::mix_seed(20260819, 0x736fu, t);
        aic::Rng rng(seed);

        aic::PairingSession s;
        s.params = p;
        s.repetitions = 1;
        s.session_seed = seed;
        s.receiver_start_offset_s = 0.0;
        s.key_material = aic::random_payload(16, rng);

        const std::size_t slot = static_cast<std::size_t>(p.slot_samples());
        const std::size_t frame_len = p.frame_slots() * slot;
        switch (t % 3) {
        case 0: {
            aic::OvershadowAttack atk;
            atk.payload = aic::random_payload(16, rng);
            atk.power_dbfs = p.noise_floor_dbfs + rng.uniform(12.0, 35.0);
            atk.alignment_samples = static_cast<long>(rng.uniform_int(2 * frame_len));
            atk.params = p;
            atk.seed = aic::mix_seed(seed, 1u);
            s.attack = atk;
            break;
        }
        case 1: {
            aic::SlotEnergyInjection jam;
            jam.power_dbfs = p.noise_floor_dbfs + rng.uniform(5.0, 30.0);
            jam.slot_probability = rng.uniform(0.2, 0.8);
            jam.seed = aic::mix_seed(seed, 2u);
            s.attack = jam;
            break;
        }
        default: {
            aic::CancellationAttack atk;
            atk.tau1_s = rng.uniform(1.17e-3, 12e-3) +
                         atk.geometry.distance_ab_m / atk.geometry.speed_of_sound;
            s.attack = atk;
            break;
        }
        }

        const aic::PairingOutcome out = aic::run_pairing(s);
        if (out.report.failure == aic::DecodeFailure::none && out.report.data &&
            *out.report.data != s.key_material)
            ++ternary_forgeries;
        if (out.verdict == aic::PairingVerdict::success) ++clean;
        else if (out.verdict == aic::PairingVerdict::failed_no_signal) ++lost;
        else ++detected;
    }

    // 30 best-case attacker runs: frame-aligned overshadowing, decoded
    // under both rules on the same capture. Binary accepting the
    // attacker's payload is the vulnerability these codes close.
    for (std::size_t t = 0; t < 30; ++t) {
        const auto res = aic::run_overshadow_trial(p, aic::mix_seed(20260819, 0x77u, t), true);
        if (res.ternary.failure == aic::DecodeFailure::none && res.ternary.data &&
            *res.ternary.data != res.sent)
            ++ternary_forgeries;
        if (res.binary.failure == aic::DecodeFailure::none && res.binary.data &&
            res.attacker_payload != res.sent && *res.binary.data == res.attacker_payload)
            ++binary_witnesses;
    }

    const bool ok = ternary_forgeries == 0 && binary_witnesses >= 1;
    CHECK(report(8, "1000 attacked runs: zero ternary forgeries, binary witness exists", ok,
                 "forgeries=" + std::to_string(ternary_forgeries) + ", binary witnesses=" +
                     std::to_string(binary_witnesses) + ", detected=" + std::to_string(detected) +
                     ", clean=" + std::to_string(clean) + ", lost=" + std::to_string(lost)));
}

TEST_CASE("criterion 9: identical seeds give byte-identical csv") {
    aic::AicParams base;
    bool ok = true;

    aic::SweepGrid rg;
    rg.snrs_db = {12.0};
    rg.repetitions = 3;
    rg.payload_bits = 16;
    rg.base_seed = 77;
    aic::write_robustness_csv("acc_rob_a.csv", aic::sweep_robustness(rg, base), rg.base_seed);
    aic::write_robustness_csv("acc_rob_b.csv", aic::sweep_robustness(rg, base), rg.base_seed);
    ok = ok && slurp("acc_rob_a.csv") == slurp("acc_rob_b.csv");

    aic::SweepGrid tg;
    tg.snrs_db = {14.0};
    tg.thresholds_db = {9.0, 11.0, 13.0};
    tg.repetitions = 2;
    tg.payload_bits = 8;
    tg.base_seed = 78;
    aic::write_threshold_csv("acc_thr_a.csv", aic::sweep_threshold(tg, base), tg.base_seed);
    aic::write_threshold_csv("acc_thr_b.csv", aic::sweep_threshold(tg, base), tg.base_seed);
    ok = ok && slurp("acc_thr_a.csv") == slurp("acc_thr_b.csv");

    aic::AicParams low = base;
    low.band = {200.0, 800.0};
    aic::write_cancellation_csv("acc_can_a.csv", aic::sweep_cancellation({1e-3, 2e-3}, low, {21.8}, 2, 79), 79);
    aic::write_cancellation_csv("acc_can_b.csv", aic::sweep_cancellation({1e-3, 2e-3}, low, {21.8}, 2, 79), 79);
    ok = ok && slurp("acc_can_a.csv") == slurp("acc_can_b.csv");

    const double th = base.noise_floor_dbfs + base.detection_threshold_db;
    aic::write_overshadow_csv("acc_ovr_a.csv", aic::overshadow_table(base, 20.0, 30.0, 8, 80), th, 80);
    aic::write_overshadow_csv("acc_ovr_b.csv", aic::overshadow_table(base, 20.0, 30.0, 8, 80), th, 80);
    ok = ok && slurp("acc_ovr_a.csv") == slurp("acc_ovr_b.csv");

    for (const char* f : {"acc_rob_a.csv", "acc_rob_b.csv", "acc_thr_a.csv", "acc_thr_b.csv",
                          "acc_can_a.csv", "acc_can_b.csv", "acc_ovr_a.csv", "acc_ovr_b.csv"})
        std::remove(f);
    CHECK(report(9, "robustness/threshold/cancellation/overshadow sweeps reproduce", ok,
                 ok ? "4/4 byte-identical" : "mismatch"));
}

TEST_CASE("criterion 10: io and calibration round trips") {
    aic::AicParams p;
    p.payload_bits = 16;
    bool ok = true;
    std::string detail;

    // wav round trip of one modulated frame, error bounded by one
    // quantization step
    {
        aic::Rng rng(5);
        const Bits payload = aic::random_payload(16, rng);
        const aic::Waveform w = aic::modulate(aic::build_frame(payload), p, aic::CarrierProcess{p.carrier_kind, 5});
        aic::write_wav("acc_frame.wav", w);
        const aic::Waveform back = aic::read_wav("acc_frame.wav");
        std::remove("acc_frame.wav");
        double worst = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i)
            worst = std::max(worst, std::abs(w.samples[i] - back.samples[i]));
        if (back.size() != w.size() || worst > 1.0 / 32767.0) ok = false;
        detail += "wav err=" + fmt(worst * 32767.0, 3) + " lsb";
    }

    // noise generator hits its target power on every seed
    {
        double worst = 0.0;
        for (std::uint64_t s = 1; s <= 100; ++s) {
            aic::NoiseSpec nspec;
            nspec.seed = s;
            const aic::Waveform n = aic::gen_noise(nspec, 0.25, 44100.0);
            worst = std::max(worst, std::abs(aic::signal_power_dbfs(n) - nspec.power_dbfs));
        }
        if (worst > 0.5) ok = false;
        detail += ", noise err=" + fmt(worst, 4) + " dB";
    }

    // 500 random payloads at a comfortable snr decode exactly, some
    // through an actual wav file
    {
        aic::AicParams q = p;
        q.target_snr_db = 20.0;
        std::size_t bad = 0;
        for (std::size_t t = 0; t < 500; ++t) {
            const std::uint64_t seed = aic::mix_seed(0xc0deu, t);
            aic::Rng pay(aic::mix_seed(seed, 0x706cu));
            const Bits payload = aic::random_payload(16, pay);
            aic::Waveform capture = aic::detail::simulate_capture(payload, q, seed);
            if (t % 50 == 0) {
                aic::write_wav("acc_cap.wav", capture);
                capture = aic::read_wav("acc_cap.wav");
                std::remove("acc_cap.wav");
            }
            const aic::DecodeReport rep = aic::demodulate(capture, q, aic::DecodeMode::ternary);
            if (rep.failure != aic::DecodeFailure::none || !rep.data || *rep.data != payload) ++bad;
        }
        if (bad != 0) ok = false;
        detail += ", decode failures=" + std::to_string(bad) + "/500";
    }

    CHECK(report(10, "wav <= 1 lsb, noise within 0.5 dB over 100 seeds, 500/500 decodes", ok, detail));
}
