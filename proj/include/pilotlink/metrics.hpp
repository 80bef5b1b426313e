// SPDX-License-Identifier: Apache-2.0
//
// Link-quality measurement: EVM, decision-aided SINR, goodput, throughput,
// and per-trial aggregation from a per-frame event log.
#pragma once

#include "pilotlink/channel.hpp"
#include "pilotlink/framing.hpp"
#include "pilotlink/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace pilotlink {

/// 100 * RMS(rx - ref) / RMS(ref). Throws on empty or mismatched input.
double evm(std::span<const Complex> rx, std::span<const Complex> ref);

inline constexpr double kSinrInfinite = std::numeric_limits<double>::infinity();

/// 10 log10(mean|d|^2 / mean|rx - d|^2); +inf when the error power is zero.
double sinr_estimate(std::span<const Complex> equalized, std::span<const Complex> decisions);

/// crc_pass * data_bytes * 8 / duration. data_bytes excludes the CRC.
double goodput(std::uint64_t crc_pass, std::uint64_t data_bytes, double duration_s);

/// frames_detected * data_symbols * bits_per_symbol / duration (CRC bits included).
double throughput(std::uint64_t frames_detected, std::uint64_t data_symbols, int bits_per_symbol, double duration_s);

enum class FrameOutcome { missed, detected_no_data, decoded_fail, decoded_pass };

/// What one received frame contributed. Error sums are raw so that
/// aggregation is exact and order-independent.
struct FrameEvent {
    std::uint64_t frame = 0;
    std::string status;                 // receive status name
    bool detected = false;              // frame located and fully parsed
    bool crc_pass = false;
    std::uint64_t symbols = 0;          // equalized data symbols measured
    double err_tx = 0.0;                // sum |y - s_tx|^2
    double ref_tx = 0.0;                // sum |s_tx|^2
    double err_dec = 0.0;               // sum |y - d|^2
    double ref_dec = 0.0;               // sum |d|^2
    std::uint64_t decision_errors = 0;  // decisions differing from transmitted symbols
    double residual_phase_deg = 0.0;    // mean |per-block residual phase|
    double delta_f_est_hz = 0.0;

    bool operator==(const FrameEvent&) const = default;
};

struct TrialResult {
    FrameConfig frame_cfg;
    ChannelProfile profile;
    std::uint64_t trial = 0;
    std::uint64_t seed = 0;
    std::uint64_t frames_sent = 0;
    std::uint64_t frames_detected = 0;
    std::uint64_t crc_pass = 0;
    double duration_s = 0.0;
    double goodput_bps = 0.0;
    double throughput_bps = 0.0;
    double evm_percent = 0.0;           // against transmitted symbols
    double evm_decision_percent = 0.0;  // against hard decisions
    double sinr_db = 0.0;
    double mean_residual_phase_deg = 0.0;
    std::uint64_t symbols_measured = 0;
    std::uint64_t decision_errors = 0;

    bool operator==(const TrialResult&) const = default;
};

/// Builds a TrialResult from the frame events of one trial. Duration is
/// frames_sent * total_symbols * symbol_period.
TrialResult aggregate_trial(const FrameConfig& cfg, const ChannelProfile& profile, std::uint64_t trial,
                            std::uint64_t seed, std::uint64_t frames_sent, double symbol_period,
                            std::span<const FrameEvent> events);

/// Fixed CSV column order, one row per trial.
const std::vector<std::string>& csv_columns();
std::string csv_header();
std::string csv_row(const TrialResult& r);
void write_csv(std::ostream& os, std::span<const TrialResult> rows);

/// Shortest round-trip decimal form ("inf"/"-inf"/"nan" for non-finite).
std::string format_double(double v);
double parse_double(const std::string& s);

std::string modulation_name(int order);
int parse_modulation(const std::string& s);
std::string fading_name(FadingKind k);
FadingKind parse_fading(const std::string& s);

}  // namespace pilotlink
