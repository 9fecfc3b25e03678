#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "types.hpp"

namespace aic {
namespace dsp {

// Modified Bessel function I0, power series (converges quickly for the
// beta range used by Kaiser windows).
inline double bessel_i0(double x) {
    double sum = 1.0, term = 1.0;
    const double h = x * x / 4.0;
    for (int k = 1; k < 64; ++k) {
        term *= h / (static_cast<double>(k) * k);
        sum += term;
        if (term < sum * 1e-18) break;
    }
    return sum;
}

inline double kaiser_beta(double atten_db) {
    if (atten_db > 50.0) return 0.1102 * (atten_db - 8.7);
    if (atten_db >= 21.0) return 0.5842 * std::pow(atten_db - 21.0, 0.4) + 0.07886 * (atten_db - 21.0);
    return 0.0;
}

// Linear-phase windowed-sinc bandpass. Cutoffs sit at the nominal band
// edges (-6 dB points); the transition region straddles each edge.
inline std::vector<double> design_bandpass_fir(Band band, double sample_rate,
                                               double transition_hz, double atten_db) {
    if (!(band.low_hz > 0.0) || !(band.high_hz > band.low_hz) || band.high_hz > sample_rate / 2.0)
        throw std::invalid_argument("bandpass design: band must satisfy 0 < low < high <= Nyquist");
    if (transition_hz <= 0.0) throw std::invalid_argument("bandpass design: transition width must be positive");

    const double beta = kaiser_beta(atten_db);
    const double dw = 2.0 * std::numbers::pi * transition_hz / sample_rate;
    std::size_t n = static_cast<std::size_t>(std::ceil((atten_db - 7.95) / (2.285 * dw)));
    if (n < 9) n = 9;
    if (n % 2 == 0) ++n; // odd length, type-I symmetric
    const auto m = static_cast<double>(n - 1) / 2.0;

    const double f1 = band.low_hz / sample_rate;
    const double f2 = band.high_hz / sample_rate;
    const double i0b = bessel_i0(beta);

    std::vector<double> h(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) - m;
        double ideal;
        if (t == 0.0) {
            ideal = 2.0 * (f2 - f1);
        } else {
            ideal = (std::sin(2.0 * std::numbers::pi * f2 * t) -
                     std::sin(2.0 * std::numbers::pi * f1 * t)) / (std::numbers::pi * t);
        }
        const double r = t / m;
        const double win = bessel_i0(beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / i0b;
        h[i] = ideal * win;
    }
    return h;
}

// Convolution with the output shifted left by the filter's group delay,
// so y[i] lines up with x[i]. Output length equals input length; the
// first and last half-filter spans see zero-padding.
inline std::vector<double> fir_filter_centered(std::span<const double> x, const std::vector<double>& h) {
    const std::size_t n = x.size();
    const std::size_t nh = h.size();
    const std::size_t m = (nh - 1) / 2;
    std::vector<double> y(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t center = i + m;
        const std::size_t k0 = center >= n - 1 ? center - (n - 1) : 0;
        const std::size_t k1 = std::min(nh - 1, center);
        double acc = 0.0;
        for (std::size_t k = k0; k <= k1; ++k) acc += h[k] * x[center - k];
        y[i] = acc;
    }
    return y;
}

// "Valid" convolution: only outputs where the filter fully overlaps the
// input. Used to synthesize steady-state noise without edge transients.
inline std::vector<double> fir_filter_valid(std::span<const double> x, const std::vector<double>& h) {
    const std::size_t n = x.size();
    const std::size_t nh = h.size();
    if (n < nh) return {};
    std::vector<double> y(n - nh + 1);
    for (std::size_t i = 0; i < y.size(); ++i) {
        double acc = 0.0;
        const double* xp = x.data() + i;
        for (std::size_t k = 0; k < nh; ++k) acc += h[k] * xp[nh - 1 - k];
        y[i] = acc;
    }
    return y;
}

inline Waveform fir_filter_centered(const Waveform& w, const std::vector<double>& h) {
    return Waveform{fir_filter_centered(std::span<const double>(w.samples), h), w.sample_rate};
}

// Prefix sums of x^2 for O(1) windowed power queries.
class CumulativeEnergy {
public:
    explicit CumulativeEnergy(std::span<const double> x) : cum_(x.size() + 1, 0.0) {
        for (std::size_t i = 0; i < x.size(); ++i) cum_[i + 1] = cum_[i] + x[i] * x[i];
    }

    // Mean square over [begin, end).
    double window_mean(std::size_t begin, std::size_t end) const {
        if (end <= begin || end >= cum_.size()) {
            end = std::min(end, cum_.size() - 1);
            if (end <= begin) return 0.0;
        }
        return (cum_[end] - cum_[begin]) / static_cast<double>(end - begin);
    }

    double window_sum(std::size_t begin, std::size_t end) const {
        end = std::min(end, cum_.size() - 1);
        if (end <= begin) return 0.0;
        return cum_[end] - cum_[begin];
    }

private:
    std::vector<double> cum_;
};

} // namespace dsp
} // namespace aic
