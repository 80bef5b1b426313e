// SPDX-License-Identifier: Apache-2.0
//
// Frame construction and deconstruction.
//
//   [training: reps x M] [preamble: golay a | golay b] [payload section]
//
// The payload section holds lambda_p repetitions of (pilot block | data
// segment). Data segment lengths differ by at most one symbol; the remainder
// goes to the earliest segments.
#pragma once

#include "pilotlink/types.hpp"
#include "pilotlink/waveform.hpp"

#include <span>
#include <stdexcept>
#include <vector>

namespace pilotlink {

struct FrameConfig {
    int lambda_p = 4;
    int payload_symbols = 256;
    int pilot_block_len = 16;
    int training_rep_len = 32;
    int training_reps = 2;
    int golay_len = 64;
    int modulation = 16;
    int crc_bits = 32;

    /// Throws std::invalid_argument naming the violated constraint.
    void validate() const;

    int pilot_symbols() const { return pilot_block_len * lambda_p; }
    int data_symbols() const { return payload_symbols - pilot_symbols(); }
    int training_symbols() const { return training_rep_len * training_reps; }
    int preamble_symbols() const { return 2 * golay_len; }
    int payload_offset() const { return training_symbols() + preamble_symbols(); }
    int total_symbols() const { return payload_offset() + payload_symbols; }
    int bits_per_symbol() const;
    /// Bytes carried by the data field, CRC included.
    int data_field_bytes() const;
    /// User bytes per frame (CRC excluded).
    int data_bytes() const { return data_field_bytes() - crc_bits / 8; }

    bool operator==(const FrameConfig&) const = default;
};

struct FrameLayout {
    IndexRange training_span;
    IndexRange preamble_span;
    std::vector<IndexRange> pilot_spans;
    std::vector<IndexRange> data_spans;
    std::size_t total_symbols = 0;
};

FrameLayout compute_layout(const FrameConfig& cfg);

/// Pilot, training and preamble tables shared by transmitter and receiver.
struct FrameTables {
    SymbolVector training;   // one repetition, M symbols
    SymbolVector pilots;     // N_p symbols, unit magnitude
    GolayPair golay;
};

/// Fixed tables for a configuration. Identical on every call.
FrameTables make_frame_tables(const FrameConfig& cfg);

// ---------------------------------------------------------------------------
// CRC-32 (reflected, polynomial 0x04C11DB7, init/xorout 0xFFFFFFFF)
// ---------------------------------------------------------------------------

std::uint32_t crc32(std::span<const std::uint8_t> bytes);

struct PacketPayload {
    Bytes data;
    std::uint32_t crc = 0;

    /// data followed by the CRC, little-endian.
    Bytes wire_bytes() const;
    bool operator==(const PacketPayload&) const = default;
};

PacketPayload crc_attach(Bytes data);
bool crc_check(const PacketPayload& p);
/// Splits a received data field into payload bytes and trailing CRC.
PacketPayload payload_from_wire(std::span<const std::uint8_t> wire);

// ---------------------------------------------------------------------------
// Assembly / parsing
// ---------------------------------------------------------------------------

SymbolVector assemble_frame(const PacketPayload& payload, const FrameConfig& cfg, const FrameTables& tables);

class TruncatedFrame : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ParsedFrame {
    std::vector<SymbolVector> pilot_blocks;
    std::vector<SymbolVector> data_blocks;
};

/// start_index is the first payload-section symbol. Throws TruncatedFrame if
/// the sequence ends before the payload section does.
ParsedFrame parse_frame(std::span<const Complex> symbols, const FrameConfig& cfg, std::size_t start_index);

/// Per-symbol IS_PILOT flags over the payload section.
std::vector<bool> pilot_mask(const FrameConfig& cfg);

/// Shaped baseband burst for one frame.
ComplexBuffer transmit_frame(const PacketPayload& payload, const FrameConfig& cfg, const FrameTables& tables,
                             const PulseShapeConfig& pulse);

}  // namespace pilotlink
