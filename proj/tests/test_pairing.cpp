#include <catch2/catch_amalgamated.hpp>

#include <aic/pairing.hpp>
#include <aic/sweeps.hpp>

#include <cstdlib>

using aic::Bits;

namespace {

aic::PairingSession base_session(std::uint64_t seed) {
    aic::PairingSession s;
    aic::Rng rng(aic::mix_seed(seed, 0x6b6579u));
    s.key_material = aic::random_payload(16, rng);
    s.params.payload_bits = 16;
    s.repetitions = 2;
    s.noise.power_dbfs = s.params.noise_floor_dbfs;
    s.session_seed = seed;
    return s;
}

} // namespace

TEST_CASE("transmitter stream repeats the frame back to back") {
    auto s = base_session(1);
    s.repetitions = 3;
    const auto w = aic::transmitter_stream(s);
    const auto ls = static_cast<std::size_t>(s.params.slot_samples());
    CHECK(w.size() == 3 * 38 * ls);

    s.params.carrier_kind = aic::CarrierKind::qpsk;
    CHECK_THROWS_AS(aic::transmitter_stream(s), std::invalid_argument);
    s.params.carrier_kind = aic::CarrierKind::wgn;
    s.key_material.clear();
    CHECK_THROWS_AS(aic::transmitter_stream(s), std::invalid_argument);
}

TEST_CASE("pairing succeeds from a known receiver start offset") {
    auto s = base_session(2);
    s.receiver_start_offset_s = 0.05; // mid-delimiter of the first repetition
    const auto out = aic::run_pairing(s);
    CHECK(out.verdict == aic::PairingVerdict::success);
    REQUIRE(out.report.data.has_value());
    CHECK(*out.report.data == s.key_material);
    CHECK(out.measured_snr_db == Catch::Approx(14.0).margin(1.5));
}

TEST_CASE("pairing succeeds from random receiver start offsets") {
    int ok = 0;
    const int trials = 200;
    for (int t = 0; t < trials; ++t) {
        const auto out = aic::run_pairing(base_session(1000 + static_cast<std::uint64_t>(t)));
        if (out.verdict == aic::PairingVerdict::success) ++ok;
    }
    // every capture contains at least one intact repetition
    CHECK(ok >= 198);
}

TEST_CASE("an overshadowing attacker is detected, not believed") {
    auto s = base_session(3);
    s.receiver_start_offset_s = 0.0;

    aic::OvershadowAttack atk;
    aic::Rng rng(99);
    atk.payload = aic::random_payload(16, rng);
    atk.power_dbfs = s.params.noise_floor_dbfs + 30.0;
    atk.alignment_samples = 0;
    atk.seed = 7;
    s.attack = atk;

    const auto out = aic::run_pairing(s);
    CHECK(out.verdict == aic::PairingVerdict::failed_attack_detected);
    CHECK_FALSE(out.report.data.has_value());
}

TEST_CASE("a beyond-the-bound cancellation relay does not erase the signal") {
    auto s = base_session(4);
    s.receiver_start_offset_s = 0.0;

    aic::CancellationAttack atk;
    atk.tau1_s = aic::cancellation_delay_bound(atk.geometry) +
                 aic::delay_from_distance(atk.geometry.distance_ab_m, atk.geometry);
    s.attack = atk;

    const auto out = aic::run_pairing(s);
    // the doubled-up signal still decodes (ternary decisions are
    // threshold-relative), or the distortion trips detection; what
    // must not happen is silence at the receiver
    CHECK(out.verdict != aic::PairingVerdict::failed_no_signal);
}

TEST_CASE("a slot jammer never slips a payload through") {
    // a dense jammer wrecks synchronization (failed_no_signal), a sparse
    // one leaves the frame found but trips the pair check; neither may
    // end in success
    std::size_t tripped = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        auto s = base_session(5);
        s.receiver_start_offset_s = 0.0;

        aic::SlotEnergyInjection atk;
        atk.power_dbfs = s.params.noise_floor_dbfs + 25.0;
        atk.slot_probability = 0.3;
        atk.seed = seed;
        s.attack = atk;

        const auto out = aic::run_pairing(s);
        CHECK(out.verdict != aic::PairingVerdict::success);
        if (out.verdict == aic::PairingVerdict::failed_attack_detected) ++tripped;
    }
    CHECK(tripped >= 1);
}

TEST_CASE("verdict strings are stable") {
    CHECK(std::string(aic::to_string(aic::PairingVerdict::success)) == "success");
    CHECK(std::string(aic::to_string(aic::PairingVerdict::failed_attack_detected)) == "failed_attack_detected");
    CHECK(std::string(aic::to_string(aic::PairingVerdict::failed_no_signal)) == "failed_no_signal");
    CHECK(std::string(aic::to_string(aic::PairingVerdict::failed_noise)) == "failed_noise");
}
