// SPDX-License-Identifier: Apache-2.0
//
// Experiment orchestration: payload generation, burst scheduling through the
// channel, trial aggregation, parameter sweeps and the per-frame event log.
#pragma once

#include "pilotlink/channel.hpp"
#include "pilotlink/config_file.hpp"
#include "pilotlink/framing.hpp"
#include "pilotlink/metrics.hpp"
#include "pilotlink/sync.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace pilotlink {

/// Deterministic pseudo-random bytes.
Bytes generate_payload(std::size_t byte_count, std::uint64_t seed);

struct TrialOptions {
    ReceiverConfig receiver;
    int guard_symbols = 8;          // idle symbols captured before and after each burst
    bool capture_iq = false;
};

struct TrialRun {
    TrialResult result;
    std::vector<FrameEvent> events;
    double symbol_period = 1e-6;
    /// Received buffers back to back (cf32 capture) and the start sample of
    /// each frame's buffer within it; filled when capture_iq is set.
    SymbolVector iq;
    std::vector<std::uint64_t> frame_offsets;
};

/// Sends `frames` bursts on a shared clock (burst k nominally starts at
/// k * total_symbols * l samples, plus a random sub-symbol offset) through
/// the channel and receives each one. Channel randomness (fading, drift
/// walk) follows profile.seed; payloads, noise and timing follow `seed`.
///
/// SNR is measured over the occupied samples of the transmitted burst
/// (total_symbols * l samples), before fading. Noise is white over the
/// full sample rate, so the per-symbol SNR after matched filtering is
/// higher by 10 log10(l).
TrialRun run_trial_detailed(const FrameConfig& cfg, const ChannelProfile& profile, std::uint64_t frames,
                            std::uint64_t seed, std::uint64_t trial_index = 0, const TrialOptions& opts = {});

TrialResult run_trial(const FrameConfig& cfg, const ChannelProfile& profile, std::uint64_t frames,
                      std::uint64_t seed);

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

struct SweepSpec {
    std::vector<int> lambdas = {1, 2, 4, 6, 8};
    std::vector<int> modulations = {4, 8, 16, 64};
    std::vector<ChannelProfile> profiles = {ChannelProfile{}};
    std::uint64_t frames_per_trial = 20;
    std::uint64_t trials_per_cell = 3;
    std::uint64_t master_seed = 1;
    FrameConfig base_frame;          // lambda_p and modulation are overridden per cell

    void validate() const;
};

/// Reads a sweep description. Recognised keys: lambda_p, modulation (lists),
/// frames, trials, seed, profiles (list of names), any FrameConfig key, and
/// "<profile>.<key>" entries.
SweepSpec sweep_spec_from(const KeyValues& kv);
SweepSpec load_sweep_spec(const std::string& path);

struct SweepCell {
    std::size_t profile_index = 0;
    int lambda_p = 0;
    int modulation = 0;
    std::uint64_t trial = 0;
};

/// Grid order: profile, lambda_p, modulation, trial (last varies fastest).
std::vector<SweepCell> sweep_cells(const SweepSpec& spec);

/// Seed for a cell: derived from the master seed and the cell's index.
std::uint64_t cell_seed(const SweepSpec& spec, std::size_t cell_index);
/// Channel seed: shared by every (lambda_p, modulation) cell of a given
/// profile and trial, so cells see the same channel realisation.
std::uint64_t channel_seed(const SweepSpec& spec, std::size_t profile_index, std::uint64_t trial);

/// One run per cell, in cell order regardless of the worker count.
std::vector<TrialRun> run_sweep_detailed(const SweepSpec& spec, unsigned workers = 1,
                                         const TrialOptions& opts = {});
std::vector<TrialResult> run_sweep(const SweepSpec& spec, unsigned workers = 1);

/// Goodput gain (percent) from lambda_p = 1 to the best lambda_p, per
/// (profile, modulation), averaged over trials.
struct ImprovementRow {
    std::string profile;
    int modulation = 0;
    double baseline_bps = 0.0;
    int best_lambda = 0;
    double best_bps = 0.0;
    double gain_percent = 0.0;
};
std::vector<ImprovementRow> improvement_table(std::span<const TrialResult> rows);

// ---------------------------------------------------------------------------
// Event log
// ---------------------------------------------------------------------------

struct TrialLog {
    FrameConfig frame_cfg;
    ChannelProfile profile;
    std::uint64_t trial = 0;
    std::uint64_t seed = 0;
    std::uint64_t frames_sent = 0;
    double symbol_period = 1e-6;
    std::vector<FrameEvent> events;
};

/// Appends one trial block: '#'-prefixed key = value metadata, a CSV header
/// and one row per frame. Reals are written in shortest round-trip form.
void write_event_log(std::ostream& os, const TrialRun& run);
std::vector<TrialLog> read_event_log(std::istream& is);

/// Recomputes the TrialResult of a logged trial.
TrialResult report_from_log(const TrialLog& log);

/// Interleaved little-endian float32 I/Q (SigMF "cf32_le").
void write_cf32_le(std::ostream& os, std::span<const Complex> samples);
SymbolVector read_cf32_le(std::istream& is);

}  // namespace pilotlink
