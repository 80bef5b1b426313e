// SPDX-License-Identifier: Apache-2.0
#include "pilotlink/channel.hpp"

#include "pilotlink/rng.hpp"

#include <cmath>
#include <random>
#include <string>

namespace pilotlink {

namespace {

constexpr std::uint64_t kFadingStream = 0xFAD1;
constexpr std::uint64_t kWalkStream = 0xD41F;

std::int64_t floor_div(std::int64_t a, std::int64_t b)
{
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

double walk_increment(const ChannelProfile& p, std::int64_t epoch)
{
    std::mt19937_64 gen(derive_seed(p.seed, {kWalkStream, static_cast<std::uint64_t>(epoch)}));
    std::normal_distribution<double> n(0.0, p.drift_walk_sigma_hz);
    return n(gen);
}

bool has_walk(const ChannelProfile& p) { return p.drift_walk_sigma_hz > 0.0 && p.coherence_symbols.has_value(); }

// Accumulated random-walk frequency and phase (radians, without the 2*pi
// factor applied to Hz*s) at the start of epoch e (e >= 0). Walk steps occur
// at the start of epochs 1, 2, ...
struct WalkState {
    double freq = 0.0;    // Hz
    double cycles = 0.0;  // integral of walk frequency, in cycles
};

WalkState walk_at_epoch(const ChannelProfile& p, std::int64_t epoch, double epoch_seconds)
{
    WalkState s;
    for (std::int64_t e = 1; e <= epoch; ++e) {
        s.cycles += s.freq * epoch_seconds;
        s.freq += walk_increment(p, e);
    }
    return s;
}

}  // namespace

void ChannelProfile::validate(double sample_period) const
{
    if (!(delay_spread_s >= 0.0 && delay_spread_s < sample_period / 10.0))
        throw std::invalid_argument("channel profile: delay spread must be below T_sp/10 (single-tap model)");
    if (coherence_symbols && *coherence_symbols < 1)
        throw std::invalid_argument("channel profile: coherence_symbols must be >= 1");
    if (fading == FadingKind::block_rician && !(rician_k >= 0.0))
        throw std::invalid_argument("channel profile: Rician K must be non-negative");
    if (drift_walk_sigma_hz < 0.0) throw std::invalid_argument("channel profile: walk sigma must be non-negative");
}

double cfo_at(const ChannelProfile& p, std::int64_t global_sample, double sample_period, int samples_per_symbol)
{
    const double t = static_cast<double>(global_sample) * sample_period;
    double f = p.delta_f_hz + p.drift_hz_per_s * t;
    if (has_walk(p) && global_sample >= 0) {
        const double epoch_seconds = static_cast<double>(*p.coherence_symbols) * samples_per_symbol * sample_period;
        f += walk_at_epoch(p, epoch_of_sample(p, global_sample, samples_per_symbol), epoch_seconds).freq;
    }
    return f;
}

ComplexBuffer apply_cfo_phase(const ComplexBuffer& x, const ChannelProfile& p, const ChannelTiming& timing)
{
    const double ts = x.sample_period();
    SymbolVector out(x.size());

    const bool walk = has_walk(p);
    std::int64_t samples_per_epoch = 0;
    double epoch_seconds = 0.0;
    std::int64_t epoch = 0;
    WalkState ws;
    if (walk) {
        samples_per_epoch = *p.coherence_symbols * timing.samples_per_symbol;
        epoch_seconds = static_cast<double>(samples_per_epoch) * ts;
        epoch = std::max<std::int64_t>(0, floor_div(timing.start_sample, samples_per_epoch));
        ws = walk_at_epoch(p, epoch, epoch_seconds);
    }

    for (std::size_t n = 0; n < x.size(); ++n) {
        const std::int64_t g = timing.start_sample + static_cast<std::int64_t>(n);
        const double t = static_cast<double>(g) * ts;
        double cycles = p.delta_f_hz * t + 0.5 * p.drift_hz_per_s * t * t;
        if (walk && g >= 0) {
            while (g >= (epoch + 1) * samples_per_epoch) {
                ws.cycles += ws.freq * epoch_seconds;
                ++epoch;
                ws.freq += walk_increment(p, epoch);
            }
            const double t_epoch = static_cast<double>(epoch * samples_per_epoch) * ts;
            cycles += ws.cycles + ws.freq * (t - t_epoch);
        }
        // Reduce before scaling so large global times keep full phase precision.
        cycles -= std::floor(cycles);
        const double phase = 2.0 * kPi * cycles + p.theta_in;
        out[n] = x[n] * std::polar(1.0, -phase);
    }
    return ComplexBuffer(std::move(out), ts);
}

std::int64_t epoch_of_sample(const ChannelProfile& p, std::int64_t global_sample, int samples_per_symbol)
{
    if (!p.coherence_symbols) return 0;
    const std::int64_t symbol = floor_div(global_sample, samples_per_symbol);
    return floor_div(symbol, *p.coherence_symbols);
}

Complex epoch_gain(const ChannelProfile& p, std::int64_t epoch)
{
    std::mt19937_64 gen(derive_seed(p.seed, {kFadingStream, static_cast<std::uint64_t>(epoch)}));
    std::normal_distribution<double> n(0.0, std::sqrt(0.5));
    const Complex scatter(n(gen), n(gen));
    switch (p.fading) {
    case FadingKind::block_rayleigh: return scatter;
    case FadingKind::block_rician: {
        const double k = p.rician_k;
        return std::sqrt(k / (k + 1.0)) + std::sqrt(1.0 / (k + 1.0)) * scatter;
    }
    case FadingKind::none: break;
    }
    return {1.0, 0.0};
}

FadedBuffer apply_block_fading(const ComplexBuffer& x, const ChannelProfile& p, const ChannelTiming& timing)
{
    if (p.fading == FadingKind::none) throw std::invalid_argument("apply_block_fading: profile has no fading");
    FadedBuffer out{ComplexBuffer(SymbolVector(x.size()), x.sample_period()), {}};
    std::int64_t current = 0;
    Complex gain;
    for (std::size_t n = 0; n < x.size(); ++n) {
        const std::int64_t e =
            epoch_of_sample(p, timing.start_sample + static_cast<std::int64_t>(n), timing.samples_per_symbol);
        if (out.gains.empty() || e != current) {
            current = e;
            gain = epoch_gain(p, e);
            out.gains.push_back({e, gain});
        }
        out.buffer[n] = x[n] * gain;
    }
    return out;
}

double mean_power(std::span<const Complex> x)
{
    if (x.empty()) return 0.0;
    double s = 0.0;
    for (const Complex& z : x) s += std::norm(z);
    return s / static_cast<double>(x.size());
}

ComplexBuffer add_noise(const ComplexBuffer& x, double noise_variance, std::uint64_t seed)
{
    if (noise_variance < 0.0) throw std::invalid_argument("add_noise: negative variance");
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> n(0.0, std::sqrt(noise_variance / 2.0));
    SymbolVector out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double re = n(gen);
        const double im = n(gen);
        out[i] = x[i] + Complex(re, im);
    }
    return ComplexBuffer(std::move(out), x.sample_period());
}

ComplexBuffer apply_awgn(const ComplexBuffer& x, std::optional<double> snr_db, std::uint64_t seed)
{
    if (x.empty()) throw std::invalid_argument("apply_awgn: empty input");
    if (!snr_db) return x;
    const double variance = mean_power(x.samples()) / std::pow(10.0, *snr_db / 10.0);
    return add_noise(x, variance, seed);
}

}  // namespace pilotlink
