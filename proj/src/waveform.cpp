// SPDX-License-Identifier: Apache-2.0
#include "pilotlink/waveform.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pilotlink {

namespace {

unsigned gray(unsigned v) { return v ^ (v >> 1); }

int log2_exact(int v)
{
    int k = 0;
    while ((1 << k) < v) ++k;
    return k;
}

// Level index along one axis for a coordinate expressed in grid units
// (levels at -(m-1), ..., -1, 1, ..., m-1). Exact midpoints go to the lower
// level.
std::size_t slice_axis(double u, int levels)
{
    // level k sits at 2k - (levels - 1)
    const double pos = (u + (levels - 1)) / 2.0;
    if (pos <= 0.0) return 0;
    if (pos >= levels - 1) return static_cast<std::size_t>(levels - 1);
    const double fl = std::floor(pos);
    const double frac = pos - fl;
    auto k = static_cast<std::size_t>(fl);
    return frac > 0.5 ? k + 1 : k;
}

}  // namespace

Constellation build_constellation(int order)
{
    Constellation c;
    switch (order) {
    case 4:  c.i_levels = 2; c.q_levels = 2; break;
    case 8:  c.i_levels = 4; c.q_levels = 2; break;
    case 16: c.i_levels = 4; c.q_levels = 4; break;
    case 64: c.i_levels = 8; c.q_levels = 8; break;
    default:
        throw std::invalid_argument("build_constellation: unsupported order " + std::to_string(order) +
                                    " (expected 4, 8, 16 or 64)");
    }
    c.order = order;
    c.bits_per_symbol = log2_exact(order);
    const int q_bits = log2_exact(c.q_levels);

    // Mean power of the unscaled grid: E[i^2] + E[q^2] with odd-integer levels.
    auto axis_power = [](int m) {
        double s = 0.0;
        for (int k = 0; k < m; ++k) {
            const double v = 2.0 * k - (m - 1);
            s += v * v;
        }
        return s / m;
    };
    c.scale = 1.0 / std::sqrt(axis_power(c.i_levels) + axis_power(c.q_levels));

    c.points.resize(static_cast<std::size_t>(order));
    c.label_of.resize(static_cast<std::size_t>(order));
    c.index_of.resize(static_cast<std::size_t>(order));
    for (int i = 0; i < c.i_levels; ++i) {
        for (int q = 0; q < c.q_levels; ++q) {
            const auto idx = static_cast<std::size_t>(i * c.q_levels + q);
            c.points[idx] = Complex(2.0 * i - (c.i_levels - 1), 2.0 * q - (c.q_levels - 1)) * c.scale;
            const unsigned label = (gray(static_cast<unsigned>(i)) << q_bits) | gray(static_cast<unsigned>(q));
            c.label_of[idx] = label;
            c.index_of[label] = idx;
        }
    }
    return c;
}

SymbolVector map_bits(std::span<const std::uint8_t> bits, const Constellation& c)
{
    const auto k = static_cast<std::size_t>(c.bits_per_symbol);
    if (bits.size() % k != 0)
        throw std::invalid_argument("map_bits: " + std::to_string(bits.size()) +
                                    " bits is not a multiple of " + std::to_string(k));
    SymbolVector out;
    out.reserve(bits.size() / k);
    for (std::size_t pos = 0; pos < bits.size(); pos += k) {
        unsigned label = 0;
        for (std::size_t j = 0; j < k; ++j) label = (label << 1) | (bits[pos + j] & 1u);
        out.push_back(c.points[c.index_of[label]]);
    }
    return out;
}

std::size_t nearest_point(Complex z, const Constellation& c)
{
    const std::size_t i = slice_axis(z.real() / c.scale, c.i_levels);
    const std::size_t q = slice_axis(z.imag() / c.scale, c.q_levels);
    return i * static_cast<std::size_t>(c.q_levels) + q;
}

Bits demap_symbols(std::span<const Complex> symbols, const Constellation& c)
{
    const auto k = static_cast<unsigned>(c.bits_per_symbol);
    Bits out;
    out.reserve(symbols.size() * k);
    for (const Complex& z : symbols) {
        const unsigned label = c.label_of[nearest_point(z, c)];
        for (unsigned j = k; j-- > 0;) out.push_back(static_cast<std::uint8_t>((label >> j) & 1u));
    }
    return out;
}

SymbolVector hard_decisions(std::span<const Complex> symbols, const Constellation& c)
{
    SymbolVector out;
    out.reserve(symbols.size());
    for (const Complex& z : symbols) out.push_back(c.points[nearest_point(z, c)]);
    return out;
}

Bits bytes_to_bits(std::span<const std::uint8_t> bytes)
{
    Bits out;
    out.reserve(bytes.size() * 8);
    for (std::uint8_t b : bytes)
        for (int j = 7; j >= 0; --j) out.push_back(static_cast<std::uint8_t>((b >> j) & 1u));
    return out;
}

Bytes bits_to_bytes(std::span<const std::uint8_t> bits)
{
    if (bits.size() % 8 != 0) throw std::invalid_argument("bits_to_bytes: bit count not a multiple of 8");
    Bytes out(bits.size() / 8, 0);
    for (std::size_t i = 0; i < bits.size(); ++i)
        out[i / 8] = static_cast<std::uint8_t>((out[i / 8] << 1) | (bits[i] & 1u));
    return out;
}

GolayPair generate_golay_pair(std::size_t n)
{
    if (n < 2 || n > 4096 || (n & (n - 1)) != 0)
        throw std::invalid_argument("generate_golay_pair: length " + std::to_string(n) +
                                    " must be a power of two in [2, 4096]");
    GolayPair p{{1}, {1}};
    while (p.a.size() < n) {
        std::vector<int> a2 = p.a;
        std::vector<int> b2 = p.a;
        a2.insert(a2.end(), p.b.begin(), p.b.end());
        for (int v : p.b) b2.push_back(-v);
        p.a = std::move(a2);
        p.b = std::move(b2);
    }
    return p;
}

std::vector<long> aperiodic_autocorrelation(std::span<const int> seq)
{
    std::vector<long> r(seq.size(), 0);
    for (std::size_t lag = 0; lag < seq.size(); ++lag)
        for (std::size_t k = 0; k + lag < seq.size(); ++k) r[lag] += static_cast<long>(seq[k]) * seq[k + lag];
    return r;
}

void PulseShapeConfig::validate() const
{
    if (!(roll_off > 0.0 && roll_off <= 1.0)) throw std::invalid_argument("pulse shape: roll-off must be in (0, 1]");
    if (span_symbols < 1) throw std::invalid_argument("pulse shape: span must be at least one symbol");
    if (interpolation < 2) throw std::invalid_argument("pulse shape: interpolation factor must be >= 2");
    if (span_symbols * interpolation % 2 != 0)
        throw std::invalid_argument("pulse shape: span * interpolation must be even (odd tap count)");
    if (!(symbol_period > 0.0)) throw std::invalid_argument("pulse shape: symbol period must be positive");
}

std::vector<double> design_srrc(const PulseShapeConfig& cfg)
{
    cfg.validate();
    const double beta = cfg.roll_off;
    const int l = cfg.interpolation;
    const std::size_t n = cfg.tap_count();
    const long half = static_cast<long>(n / 2);
    std::vector<double> h(n);

    for (long k = 0; k <= half; ++k) {
        const double t = static_cast<double>(k) / l;   // in symbol periods
        double v;
        if (k == 0) {
            v = 1.0 - beta + 4.0 * beta / kPi;
        } else if (std::abs(4.0 * beta * static_cast<double>(k) - l) < 1e-9) {
            // t = 1/(4 beta)
            v = beta / std::sqrt(2.0) *
                ((1.0 + 2.0 / kPi) * std::sin(kPi / (4.0 * beta)) + (1.0 - 2.0 / kPi) * std::cos(kPi / (4.0 * beta)));
        } else {
            const double x = 4.0 * beta * t;
            v = (std::sin(kPi * t * (1.0 - beta)) + 4.0 * beta * t * std::cos(kPi * t * (1.0 + beta))) /
                (kPi * t * (1.0 - x * x));
        }
        h[static_cast<std::size_t>(half + k)] = v;
        h[static_cast<std::size_t>(half - k)] = v;
    }

    double energy = 0.0;
    for (double v : h) energy += v * v;
    const double norm = 1.0 / std::sqrt(energy);
    for (double& v : h) v *= norm;
    return h;
}

SymbolVector matched_filter(std::span<const Complex> samples, std::span<const double> taps)
{
    if (samples.empty()) return {};
    SymbolVector out(samples.size() + taps.size() - 1);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const Complex s = samples[i];
        if (s == Complex{}) continue;
        for (std::size_t k = 0; k < taps.size(); ++k) out[i + k] += s * taps[k];
    }
    return out;
}

ComplexBuffer shape_and_upsample(std::span<const Complex> symbols, const PulseShapeConfig& cfg)
{
    const auto taps = design_srrc(cfg);
    if (symbols.empty()) return ComplexBuffer({}, cfg.sample_period());
    const auto l = static_cast<std::size_t>(cfg.interpolation);
    SymbolVector out(l * symbols.size() + taps.size() - 1);
    for (std::size_t i = 0; i < symbols.size(); ++i) {
        const Complex s = symbols[i];
        for (std::size_t k = 0; k < taps.size(); ++k) out[i * l + k] += s * taps[k];
    }
    return ComplexBuffer(std::move(out), cfg.sample_period());
}

SymbolVector matched_filter_downsample(const ComplexBuffer& buf, const PulseShapeConfig& cfg, int phase_offset)
{
    if (phase_offset < 0 || phase_offset >= cfg.interpolation)
        throw std::invalid_argument("matched_filter_downsample: phase offset out of range");
    const auto taps = design_srrc(cfg);
    if (buf.empty()) return {};
    const auto l = static_cast<std::size_t>(cfg.interpolation);
    const std::size_t full = buf.size() + taps.size() - 1;
    SymbolVector out;
    out.reserve(full / l + 1);
    const auto& x = buf.samples();
    for (std::size_t m = static_cast<std::size_t>(phase_offset); m < full; m += l) {
        // conv[m] = sum_k x[m - k] taps[k]
        Complex acc{};
        const std::size_t k_lo = m >= x.size() ? m - x.size() + 1 : 0;
        const std::size_t k_hi = std::min(m, taps.size() - 1);
        for (std::size_t k = k_lo; k <= k_hi; ++k) acc += x[m - k] * taps[k];
        out.push_back(acc);
    }
    return out;
}

AgcRun run_agc(const ComplexBuffer& buf, const AgcConfig& cfg)
{
    if (!(cfg.target_power > 0.0)) throw std::invalid_argument("agc: target power must be positive");
    if (!(cfg.loop_gain > 0.0 && cfg.loop_gain < 1.0)) throw std::invalid_argument("agc: loop gain must be in (0, 1)");

    const double log_max = std::log(cfg.max_gain);
    double log_gain = std::clamp(std::log(cfg.initial_gain), -log_max, log_max);
    std::size_t updates = 0;
    bool held = false;

    SymbolVector out(buf.size());
    for (std::size_t n = 0; n < buf.size(); ++n) {
        const Complex x = buf[n];
        const double gain = std::exp(log_gain);
        const Complex y = x * gain;
        out[n] = y;
        if (held || std::norm(x) <= cfg.squelch_power) continue;
        const double err = std::clamp((cfg.target_power - std::norm(y)) / cfg.target_power, -1.0, 1.0);
        log_gain = std::clamp(log_gain + cfg.loop_gain * err, -log_max, log_max);
        if (cfg.hold_after != 0 && ++updates >= cfg.hold_after) held = true;
    }
    return AgcRun{ComplexBuffer(std::move(out), buf.sample_period()), std::exp(log_gain), updates};
}

ComplexBuffer agc(const ComplexBuffer& buf, const AgcConfig& cfg) { return run_agc(buf, cfg).output; }

ComplexBuffer agc(const ComplexBuffer& buf, double target_power, double loop_gain)
{
    AgcConfig cfg;
    cfg.target_power = target_power;
    cfg.loop_gain = loop_gain;
    return agc(buf, cfg);
}

}  // namespace pilotlink
