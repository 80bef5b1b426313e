// SPDX-License-Identifier: Apache-2.0
//
// Seedable impairment engine: carrier frequency offset with linear drift and
// an optional per-epoch random walk, block fading, and AWGN.
//
// Every random quantity is drawn from a stream derived from the profile seed
// and a global index (epoch, burst), so results do not depend on the order
// in which bursts are processed.
#pragma once

#include "pilotlink/types.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pilotlink {

enum class FadingKind { none, block_rayleigh, block_rician };

struct ChannelProfile {
    std::string name = "default";
    double delta_f_hz = 0.0;            // initial CFO
    double drift_hz_per_s = 0.0;        // linear LO drift
    double drift_walk_sigma_hz = 0.0;   // per-epoch random-walk increment (std dev)
    double theta_in = 0.0;              // initial phase, radians
    std::optional<double> snr_db;       // nullopt = infinite
    std::optional<long> coherence_symbols;  // nullopt = infinite
    FadingKind fading = FadingKind::none;
    double rician_k = 10.0;             // linear K factor for block_rician
    double delay_spread_s = 0.0;
    std::uint64_t seed = 1;

    /// Checks the single-tap assumption (T_D < T_sp / 10) and epoch length.
    void validate(double sample_period) const;
    bool operator==(const ChannelProfile&) const = default;
};

/// Where a buffer sits on the channel's global sample clock.
struct ChannelTiming {
    std::int64_t start_sample = 0;   // global index of buffer sample 0
    int samples_per_symbol = 1;
};

/// Multiplies x[n] by exp(-j(2*pi*integral(f) + theta_in)) with
/// f(t) = delta_f + drift * t + walk(t), t measured on the global clock.
ComplexBuffer apply_cfo_phase(const ComplexBuffer& x, const ChannelProfile& p, const ChannelTiming& timing = {});

/// Instantaneous LO frequency offset (Hz) at global sample index n.
double cfo_at(const ChannelProfile& p, std::int64_t global_sample, double sample_period, int samples_per_symbol);

struct EpochGain {
    std::int64_t epoch = 0;
    Complex gain;
    bool operator==(const EpochGain&) const = default;
};

struct FadedBuffer {
    ComplexBuffer buffer;
    std::vector<EpochGain> gains;   // one entry per epoch touched, ascending
};

/// Complex gain of one coherence epoch (unit mean-square).
Complex epoch_gain(const ChannelProfile& p, std::int64_t epoch);

/// Epoch index of a global sample (0 for infinite coherence).
std::int64_t epoch_of_sample(const ChannelProfile& p, std::int64_t global_sample, int samples_per_symbol);

/// Applies one gain per coherence epoch (epochs aligned to symbol boundaries
/// on the global clock). Requires fading != none.
FadedBuffer apply_block_fading(const ComplexBuffer& x, const ChannelProfile& p, const ChannelTiming& timing = {});

/// Adds circular complex Gaussian noise with variance
/// mean(|x|^2) / 10^(snr/10). Infinite SNR returns x unchanged.
ComplexBuffer apply_awgn(const ComplexBuffer& x, std::optional<double> snr_db, std::uint64_t seed);

/// Adds noise with an explicit total variance (per complex sample).
ComplexBuffer add_noise(const ComplexBuffer& x, double noise_variance, std::uint64_t seed);

double mean_power(std::span<const Complex> x);

}  // namespace pilotlink
