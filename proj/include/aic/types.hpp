#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace aic {

// A bit sequence. Values are 0/1; helpers below validate on parse.
using Bits = std::vector<std::uint8_t>;

enum class CarrierKind { wgn, qpsk };

inline const char* to_string(CarrierKind k) { return k == CarrierKind::qpsk ? "qpsk" : "wgn"; }

struct Band {
    double low_hz{};
    double high_hz{};

    double width_hz() const { return high_hz - low_hz; }
    double center_hz() const { return 0.5 * (low_hz + high_hz); }
};

// Sampled real-valued signal. Samples are in full-scale units, i.e. a
// constant 1.0 has power 0 dBFS.
struct Waveform {
    std::vector<double> samples;
    double sample_rate{44100.0};

    std::size_t size() const { return samples.size(); }
    double duration_s() const { return static_cast<double>(samples.size()) / sample_rate; }
};

inline double mean_square(std::span<const double> x) {
    if (x.empty()) return 0.0;
    double acc = 0.0;
    for (double v : x) acc += v * v;
    return acc / static_cast<double>(x.size());
}

inline double mean_square(const Waveform& w) { return mean_square(std::span<const double>(w.samples)); }

// Power in dBFS of a mean-square value; exact zero maps to -infinity.
inline double power_dbfs(double ms) {
    if (ms <= 0.0) return -std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(ms);
}

inline double signal_power_dbfs(const Waveform& w) { return power_dbfs(mean_square(w)); }

// dB power value -> linear mean-square.
inline double dbfs_to_mean_square(double dbfs) { return std::pow(10.0, dbfs / 10.0); }

inline double db_to_power_ratio(double db) { return std::pow(10.0, db / 10.0); }

// Modulation and detection parameters shared by transmitter and receiver.
struct AicParams {
    double sample_rate = 44100.0;
    Band band{16000.0, 20000.0};
    double slot_duration_s = 1.0 / 200.0;   // T_s; gross rate = 1/T_s
    CarrierKind carrier_kind = CarrierKind::wgn;
    double qpsk_carrier_freq_hz = 18000.0;
    double qpsk_minislot_s = 0.0;           // 0 -> default T_s/4
    double target_snr_db = 14.0;            // full-frame power over the noise floor
    double noise_floor_dbfs = -87.0;
    double detection_threshold_db = 11.0;   // SNR_th; P_th = noise floor + SNR_th
    std::size_t payload_bits = 128;

    double qpsk_symbol_duration_s() const {
        return qpsk_minislot_s > 0.0 ? qpsk_minislot_s : slot_duration_s / 4.0;
    }

    long slot_samples() const { return std::lround(slot_duration_s * sample_rate); }

    std::size_t frame_slots() const { return 6 + 2 * payload_bits; }

    void validate() const {
        if (sample_rate <= 0.0) throw std::invalid_argument("sample_rate must be positive");
        if (!(band.low_hz > 0.0) || !(band.high_hz > band.low_hz))
            throw std::invalid_argument("band must satisfy 0 < low < high");
        if (band.high_hz > sample_rate / 2.0)
            throw std::invalid_argument("band exceeds Nyquist");
        if (slot_duration_s <= 0.0) throw std::invalid_argument("slot_duration must be positive");
        if (payload_bits == 0) throw std::invalid_argument("payload_bits must be >= 1");
        if (carrier_kind == CarrierKind::qpsk) {
            if (qpsk_carrier_freq_hz < band.low_hz || qpsk_carrier_freq_hz > band.high_hz)
                throw std::invalid_argument("qpsk carrier frequency outside band");
            const double tq = qpsk_symbol_duration_s();
            if (tq <= 0.0) throw std::invalid_argument("qpsk minislot must be positive");
            const double ratio = slot_duration_s / tq;
            if (std::abs(ratio - std::round(ratio)) > 1e-6 * ratio)
                throw std::invalid_argument("qpsk minislot must divide the slot duration");
        }
    }
};

inline Bits bits_from_string(const std::string& s) {
    Bits out;
    out.reserve(s.size());
    for (char c : s) {
        if (c == '0') out.push_back(0);
        else if (c == '1') out.push_back(1);
        else throw std::invalid_argument("bit string may contain only '0' and '1'");
    }
    return out;
}

inline std::string bits_to_string(const Bits& b) {
    std::string s;
    s.reserve(b.size());
    for (auto v : b) s.push_back(v ? '1' : '0');
    return s;
}

} // namespace aic
