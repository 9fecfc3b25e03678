#include <catch2/catch_amalgamated.hpp>

#include <aic/channel.hpp>
#include <aic/fft.hpp>
#include <aic/types.hpp>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

TEST_CASE("los path applies gain and whole-sample delay") {
    aic::Waveform x{{1.0, 2.0, 3.0}, 1000.0};
    aic::ChannelSpec ch;
    ch.attenuation = 0.5;
    ch.delay_s = 0.002;
    const auto y = aic::apply_los(x, ch);
    REQUIRE(y.size() == 5);
    CHECK(y.samples[0] == 0.0);
    CHECK(y.samples[1] == 0.0);
    CHECK(y.samples[2] == Catch::Approx(0.5));
    CHECK(y.samples[3] == Catch::Approx(1.0));
    CHECK(y.samples[4] == Catch::Approx(1.5));

    ch.delay_s = -1.0;
    CHECK_THROWS_AS(aic::apply_los(x, ch), std::invalid_argument);
}

TEST_CASE("propagation delay follows distance over speed of sound") {
    aic::Geometry g;
    CHECK(aic::delay_from_distance(0.4, g) == Catch::Approx(0.4 / 343.0));
    CHECK(aic::delay_from_distance(0.0, g) == 0.0);
    CHECK_THROWS_AS(aic::delay_from_distance(-1.0, g), std::invalid_argument);
}

TEST_CASE("generated noise hits the requested power exactly") {
    aic::NoiseSpec spec;
    spec.power_dbfs = -87.0;
    spec.band = {16000.0, 20000.0};
    for (std::uint64_t s = 0; s < 5; ++s) {
        spec.seed = s;
        const auto n = aic::gen_noise(spec, 0.3, 44100.0);
        REQUIRE(n.size() == 13230);
        CHECK(aic::signal_power_dbfs(n) == Catch::Approx(-87.0).margin(1e-9));
    }
}

TEST_CASE("generated noise is deterministic and band-limited") {
    aic::NoiseSpec spec;
    spec.power_dbfs = -30.0;
    spec.band = {200.0, 800.0};
    spec.seed = 12;
    const auto a = aic::gen_noise(spec, 0.5, 44100.0);
    const auto b = aic::gen_noise(spec, 0.5, 44100.0);
    REQUIRE(a.samples == b.samples);

    // Hann window keeps the segment's own leakage below the filter skirt
    std::vector<double> windowed(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double h = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                              static_cast<double>(a.size() - 1));
        windowed[i] = a.samples[i] * h;
    }
    const auto spec_f = aic::dft_real(windowed);
    const double bin_hz = 44100.0 / static_cast<double>(a.size());
    double in_band = 0.0, far_out = 0.0;
    for (std::size_t k = 0; k < a.size() / 2; ++k) {
        const double f = static_cast<double>(k) * bin_hz;
        const double e = std::norm(spec_f[k]);
        if (f >= 200.0 && f <= 800.0) in_band += e;
        if (f > 1400.0) far_out += e;
    }
    CHECK(10.0 * std::log10(far_out / in_band) < -50.0);
}

TEST_CASE("superposition zero-extends to the longest input") {
    aic::Waveform a{{1.0, 1.0}, 44100.0};
    aic::Waveform b{{0.5, 0.5, 0.5, 0.5}, 44100.0};
    const auto y = aic::superpose(a, b);
    REQUIRE(y.size() == 4);
    CHECK(y.samples[0] == Catch::Approx(1.5));
    CHECK(y.samples[3] == Catch::Approx(0.5));

    aic::Waveform c{{1.0}, 48000.0};
    CHECK_THROWS_AS(aic::superpose(a, c), std::invalid_argument);
}

TEST_CASE("snr measurement compares common support") {
    aic::Waveform sig{{1.0, 1.0, 1.0, 1.0}, 44100.0};
    aic::Waveform noise{{0.1, 0.1, 0.1, 0.1}, 44100.0};
    CHECK(aic::measure_snr_db(sig, noise) == Catch::Approx(20.0));

    aic::Waveform silent{{0.0, 0.0, 0.0, 0.0}, 44100.0};
    CHECK(aic::measure_snr_db(silent, noise) == -100.0);
    CHECK_THROWS_AS(aic::measure_snr_db(sig, silent), std::invalid_argument);
}
