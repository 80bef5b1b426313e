// SPDX-License-Identifier: Apache-2.0
//
// Receiver synchronization and equalization.
//
// Chain: AGC -> matched filter (best of l sampling phases) -> training
// autocorrelation detect -> coarse CFO estimate + NCO -> Golay frame detect
// -> pilot-block channel estimates -> single-tap equalization -> demap -> CRC.
#pragma once

#include "pilotlink/framing.hpp"
#include "pilotlink/types.hpp"
#include "pilotlink/waveform.hpp"

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pilotlink {

struct DetectorConfig {
    double rho_threshold = 0.7;
    double mf_threshold_factor = 0.5;   // fraction of 2*N_g

    void validate() const;
    bool operator==(const DetectorConfig&) const = default;
};

// ---------------------------------------------------------------------------
// Coarse synchronization
// ---------------------------------------------------------------------------

/// C[n], P[n] and rho[n] = |C[n]| / P[n] for a lag-M repetition. Samples
/// before the start of x count as zero. P[n] averages the energy of the two
/// M-windows being correlated, so rho never exceeds one.
struct AutocorrelationMetric {
    SymbolVector c;
    std::vector<double> p;
    std::vector<double> rho;
};

AutocorrelationMetric autocorrelation_metric(std::span<const Complex> x, std::size_t m);

struct CoarseSyncResult {
    std::size_t cross_index = 0;    // first threshold crossing
    std::size_t detect_index = 0;   // refined peak (end of the last training repetition)
    Complex c_peak;
    double rho_peak = 0.0;
    double delta_f_est = 0.0;       // Hz
    double delta_t = 0.0;           // s
};

/// First crossing of the rho threshold, refined to the rho maximum within
/// the next M samples (last index of a plateau, larger |C| breaks ties).
/// delta_t is the lag between repetitions in seconds.
std::optional<CoarseSyncResult> detect_training(const AutocorrelationMetric& metric, const DetectorConfig& cfg,
                                                std::size_t m, double delta_t);

/// angle(C_peak) / (2 pi delta_t), principal angle in (-pi, pi].
/// Throws std::domain_error for C_peak == 0.
double estimate_coarse_cfo(Complex c_peak, double delta_t);

/// y[n] = x[n] exp(-j 2 pi f n T_sp), n counted from the buffer start.
ComplexBuffer nco_correct(const ComplexBuffer& x, double f_hz);

// ---------------------------------------------------------------------------
// Frame detection
// ---------------------------------------------------------------------------

/// Coherent complementary correlation: for each n (last symbol of the b
/// half), |sum a[k] x[n-2N+1+k] + sum b[k] x[n-N+1+k]|. Entries with
/// n < 2N-1 are zero.
std::vector<double> golay_correlation(std::span<const Complex> x, const GolayPair& pair);

struct GolayDetection {
    std::size_t peak_index = 0;      // last preamble symbol
    std::size_t payload_start = 0;   // peak_index + 1
    double peak = 0.0;
};

/// Searches peak indices in [search_begin, search_end) for the first value
/// above mf_threshold_factor * 2N_g, refined to the maximum within N_g.
std::optional<GolayDetection> golay_frame_detect(std::span<const Complex> x, const GolayPair& pair,
                                                 const DetectorConfig& cfg, std::size_t search_begin = 0,
                                                 std::size_t search_end = static_cast<std::size_t>(-1));

// ---------------------------------------------------------------------------
// Channel estimation / equalization
// ---------------------------------------------------------------------------

/// (1/N_p) sum rx[n] conj(ref[n]).
Complex estimate_channel(std::span<const Complex> rx_pilot, std::span<const Complex> ref_pilot);

inline constexpr double kDefaultHMin = 1e-6;

class UnequalizableBlock : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

SymbolVector equalize_block(std::span<const Complex> data, Complex h, double h_min = kDefaultHMin);

struct ChannelEstimate {
    std::vector<Complex> h_blocks;          // one per pilot block
    std::vector<double> block_positions;    // pilot block centres, payload-relative symbols
    double correction_interval = 0.0;       // payload symbols / lambda_p
    double residual_freq_hz = 0.0;          // least-squares slope of unwrapped block phases
    /// Phase accumulated across each correction interval, measured on the
    /// equalized data symbols against their hard decisions (degrees).
    std::vector<double> residual_phase_per_block;
};

struct ResidualOffset {
    double residual_freq_hz = 0.0;
    double mean_residual_phase_deg = 0.0;
};

/// Least-squares slope of unwrapped angle(H) versus block position gives the
/// residual frequency (0 for a single block); the mean residual phase is
/// |2 pi f_res * correction_interval * T_sym| in degrees.
ResidualOffset residual_offset(const ChannelEstimate& est, double symbol_period);

/// Phase drift across one correction interval, from the least-squares slope
/// of angle(y * conj(d)) over a segment of equalized symbols y with
/// decisions d. Degrees, signed.
double segment_residual_phase_deg(std::span<const Complex> equalized, std::span<const Complex> decisions,
                                  double correction_interval);

// ---------------------------------------------------------------------------
// Full receive chain
// ---------------------------------------------------------------------------

enum class RxStatus { ok, no_training, no_frame, truncated, unequalizable, crc_fail };

std::string to_string(RxStatus s);

struct ReceiverConfig {
    PulseShapeConfig pulse;
    DetectorConfig detector;
    /// Burst AGC: the loop acquires over the first training_symbols * l
    /// active samples and its held gain is applied to the whole buffer.
    /// Target power is 1/l per sample, i.e. unit-power symbols.
    bool use_agc = true;
    double agc_loop_gain = 0.05;
    double h_min = kDefaultHMin;
};

struct RxResult {
    RxStatus status = RxStatus::no_training;
    std::optional<CoarseSyncResult> coarse;
    std::optional<GolayDetection> frame;
    int timing_phase = 0;
    ChannelEstimate estimate;
    SymbolVector equalized;     // data symbols in payload order
    SymbolVector decisions;
    std::optional<PacketPayload> payload;   // present once data was demapped
};

RxResult receive_frame(const ComplexBuffer& buf, const FrameConfig& cfg, const DetectorConfig& det);
RxResult receive_frame(const ComplexBuffer& buf, const FrameConfig& cfg, const ReceiverConfig& rx);

}  // namespace pilotlink
