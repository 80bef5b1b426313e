// SPDX-License-Identifier: Apache-2.0
//
// Symbol- and sample-level signal primitives: QAM constellations, Golay
// complementary pairs, SRRC pulse shaping / matched filtering and a
// square-law AGC loop.
#pragma once

#include "pilotlink/types.hpp"

#include <span>
#include <vector>

namespace pilotlink {

// ---------------------------------------------------------------------------
// Constellations
// ---------------------------------------------------------------------------

/// Rectangular QAM constellation with unit average power.
///
/// Points are stored in raster order: index = i_idx * q_levels + q_idx, with
/// both level indices ascending in amplitude. Labels are Gray coded per axis
/// (in-phase bits first, MSB first).
struct Constellation {
    int order = 0;
    int bits_per_symbol = 0;
    int i_levels = 0;
    int q_levels = 0;
    double scale = 1.0;                  // grid step is 2 * scale
    std::vector<Complex> points;         // indexed by point index
    std::vector<unsigned> label_of;      // point index -> bit label
    std::vector<std::size_t> index_of;   // bit label -> point index

    double min_distance() const { return 2.0 * scale; }
};

/// Builds the normalized constellation for order 4, 8, 16 or 64.
/// 8QAM is a 4x2 rectangular grid. Throws std::invalid_argument otherwise.
Constellation build_constellation(int order);

/// Maps bits (MSB first per symbol) to constellation points.
SymbolVector map_bits(std::span<const std::uint8_t> bits, const Constellation& c);

/// Index of the nearest point; ties go to the lowest index.
std::size_t nearest_point(Complex z, const Constellation& c);

/// Hard-decision demapping.
Bits demap_symbols(std::span<const Complex> symbols, const Constellation& c);

/// Nearest constellation point for every input symbol.
SymbolVector hard_decisions(std::span<const Complex> symbols, const Constellation& c);

Bits bytes_to_bits(std::span<const std::uint8_t> bytes);
Bytes bits_to_bytes(std::span<const std::uint8_t> bits);

// ---------------------------------------------------------------------------
// Golay complementary pairs
// ---------------------------------------------------------------------------

struct GolayPair {
    std::vector<int> a;
    std::vector<int> b;
    std::size_t length() const { return a.size(); }
};

/// Recursive doubling construction: a' = a|b, b' = a|-b, starting from (1),(1).
/// n must be a power of two in [2, 4096].
GolayPair generate_golay_pair(std::size_t n);

/// Aperiodic autocorrelation of a +-1 sequence at lags 0..n-1 (exact integers).
std::vector<long> aperiodic_autocorrelation(std::span<const int> seq);

// ---------------------------------------------------------------------------
// Pulse shaping
// ---------------------------------------------------------------------------

struct PulseShapeConfig {
    double roll_off = 0.25;
    int span_symbols = 32;
    int interpolation = 4;           // samples per symbol
    double symbol_period = 1e-6;     // seconds

    std::size_t tap_count() const {
        return static_cast<std::size_t>(span_symbols) * static_cast<std::size_t>(interpolation) + 1;
    }
    double sample_period() const { return symbol_period / interpolation; }
    void validate() const;
};

/// Unit-energy SRRC taps, symmetric, span_symbols * interpolation + 1 long.
std::vector<double> design_srrc(const PulseShapeConfig& cfg);

/// Zero-stuffs by the interpolation factor and filters with the SRRC taps.
/// Output length is l*n + taps - 1; empty input gives an empty buffer.
ComplexBuffer shape_and_upsample(std::span<const Complex> symbols, const PulseShapeConfig& cfg);

/// Matched filter (same SRRC taps) followed by decimation at the given phase.
/// Returns conv[phase + k*l] for every k inside the full convolution. A symbol
/// shaped at input index i appears at output index i + span_symbols when the
/// shaped buffer is fed back unchanged with phase 0.
SymbolVector matched_filter_downsample(const ComplexBuffer& buf, const PulseShapeConfig& cfg,
                                       int phase_offset);

/// Full-rate matched filter output (no decimation).
SymbolVector matched_filter(std::span<const Complex> samples, std::span<const double> taps);

// ---------------------------------------------------------------------------
// Automatic gain control
// ---------------------------------------------------------------------------

struct AgcConfig {
    double target_power = 1.0;
    double loop_gain = 0.05;
    double initial_gain = 1.0;
    double max_gain = 1e6;
    /// Samples with |x|^2 below this do not drive the loop (and do not count
    /// toward hold_after).
    double squelch_power = 0.0;
    /// Freeze the gain after this many loop updates; 0 keeps the loop running.
    std::size_t hold_after = 0;
};

/// Number of samples the default loop needs to settle within 1% of target.
inline constexpr std::size_t kAgcSettlingSamples = 512;

/// Log-domain accumulation loop: the normalized square-law error
/// (target - |y|^2) / target, clamped to [-1, 1], is integrated into the
/// log-gain. Zero input produces zero output.
ComplexBuffer agc(const ComplexBuffer& buf, const AgcConfig& cfg);

struct AgcRun {
    ComplexBuffer output;
    double final_gain = 1.0;     // gain after the last update (the held value)
    std::size_t updates = 0;
};

AgcRun run_agc(const ComplexBuffer& buf, const AgcConfig& cfg);
ComplexBuffer agc(const ComplexBuffer& buf, double target_power, double loop_gain);

}  // namespace pilotlink
