// SPDX-License-Identifier: Apache-2.0
#include "pilotlink/framing.hpp"

#include "pilotlink/rng.hpp"

#include <array>
#include <cmath>
#include <string>

namespace pilotlink {

namespace {

constexpr std::uint64_t kTrainingSeed = 0x7452414e494e4731ULL;
constexpr std::uint64_t kPilotSeed = 0x50494c4f54534551ULL;

SymbolVector unit_qpsk_sequence(std::size_t n, std::uint64_t seed)
{
    const double a = 1.0 / std::sqrt(2.0);
    SplitMix64 gen(seed);
    SymbolVector out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint64_t r = gen.next();
        out.emplace_back((r & 1) ? a : -a, (r & 2) ? a : -a);
    }
    return out;
}

const std::array<std::uint32_t, 256>& crc_table()
{
    static const std::array<std::uint32_t, 256> table = [] {
        std::array<std::uint32_t, 256> t{};
        for (std::uint32_t i = 0; i < 256; ++i) {
            std::uint32_t c = i;
            for (int k = 0; k < 8; ++k) c = (c & 1) ? (c >> 1) ^ 0xEDB88320u : c >> 1;
            t[i] = c;
        }
        return t;
    }();
    return table;
}

}  // namespace

void FrameConfig::validate() const
{
    auto fail = [](const std::string& what) { throw std::invalid_argument("frame config: " + what); };
    if (lambda_p != 1 && lambda_p != 2 && lambda_p != 4 && lambda_p != 6 && lambda_p != 8)
        fail("lambda_p must be one of 1, 2, 4, 6, 8 (got " + std::to_string(lambda_p) + ")");
    if (modulation != 4 && modulation != 8 && modulation != 16 && modulation != 64)
        fail("modulation must be 4, 8, 16 or 64 (got " + std::to_string(modulation) + ")");
    if (pilot_block_len < 1) fail("pilot_block_len must be positive");
    if (training_rep_len < 1) fail("training_rep_len must be positive");
    if (training_reps < 2) fail("training_reps must be at least 2");
    if (golay_len < 2 || golay_len > 4096 || (golay_len & (golay_len - 1)) != 0)
        fail("golay_len must be a power of two in [2, 4096]");
    if (crc_bits != 32) fail("only 32-bit CRC is supported");
    if (pilot_symbols() >= payload_symbols)
        fail("pilot symbols (" + std::to_string(pilot_symbols()) + ") must be fewer than payload_symbols (" +
             std::to_string(payload_symbols) + ")");
    const long bits = static_cast<long>(data_symbols()) * bits_per_symbol();
    if (bits % 8 != 0) fail("data field of " + std::to_string(bits) + " bits is not a whole number of bytes");
    if (bits / 8 <= crc_bits / 8) fail("data field too small to hold the CRC");
}

int FrameConfig::bits_per_symbol() const
{
    switch (modulation) {
    case 4: return 2;
    case 8: return 3;
    case 16: return 4;
    case 64: return 6;
    default: throw std::invalid_argument("frame config: unsupported modulation " + std::to_string(modulation));
    }
}

int FrameConfig::data_field_bytes() const { return data_symbols() * bits_per_symbol() / 8; }

FrameLayout compute_layout(const FrameConfig& cfg)
{
    cfg.validate();
    FrameLayout lay;
    const auto train = static_cast<std::size_t>(cfg.training_symbols());
    const auto pre = static_cast<std::size_t>(cfg.preamble_symbols());
    lay.training_span = {0, train};
    lay.preamble_span = {train, train + pre};

    const auto lambda = static_cast<std::size_t>(cfg.lambda_p);
    const auto np = static_cast<std::size_t>(cfg.pilot_block_len);
    const auto data = static_cast<std::size_t>(cfg.data_symbols());
    const std::size_t base = data / lambda;
    const std::size_t rem = data % lambda;

    std::size_t pos = train + pre;
    for (std::size_t i = 0; i < lambda; ++i) {
        lay.pilot_spans.push_back({pos, pos + np});
        pos += np;
        const std::size_t len = base + (i < rem ? 1 : 0);
        lay.data_spans.push_back({pos, pos + len});
        pos += len;
    }
    lay.total_symbols = pos;
    return lay;
}

FrameTables make_frame_tables(const FrameConfig& cfg)
{
    cfg.validate();
    return FrameTables{
        unit_qpsk_sequence(static_cast<std::size_t>(cfg.training_rep_len), kTrainingSeed),
        unit_qpsk_sequence(static_cast<std::size_t>(cfg.pilot_block_len), kPilotSeed),
        generate_golay_pair(static_cast<std::size_t>(cfg.golay_len)),
    };
}

std::uint32_t crc32(std::span<const std::uint8_t> bytes)
{
    const auto& table = crc_table();
    std::uint32_t c = 0xFFFFFFFFu;
    for (std::uint8_t b : bytes) c = table[(c ^ b) & 0xFFu] ^ (c >> 8);
    return c ^ 0xFFFFFFFFu;
}

Bytes PacketPayload::wire_bytes() const
{
    Bytes out = data;
    for (int k = 0; k < 4; ++k) out.push_back(static_cast<std::uint8_t>((crc >> (8 * k)) & 0xFFu));
    return out;
}

PacketPayload crc_attach(Bytes data)
{
    const std::uint32_t c = crc32(data);
    return PacketPayload{std::move(data), c};
}

bool crc_check(const PacketPayload& p) { return crc32(p.data) == p.crc; }

PacketPayload payload_from_wire(std::span<const std::uint8_t> wire)
{
    if (wire.size() < 4) throw std::invalid_argument("payload_from_wire: fewer than 4 bytes");
    PacketPayload p;
    p.data.assign(wire.begin(), wire.end() - 4);
    const std::size_t n = wire.size() - 4;
    p.crc = 0;
    for (int k = 0; k < 4; ++k) p.crc |= static_cast<std::uint32_t>(wire[n + static_cast<std::size_t>(k)]) << (8 * k);
    return p;
}

SymbolVector assemble_frame(const PacketPayload& payload, const FrameConfig& cfg, const FrameTables& tables)
{
    const FrameLayout lay = compute_layout(cfg);
    const Bytes wire = payload.wire_bytes();
    if (wire.size() != static_cast<std::size_t>(cfg.data_field_bytes()))
        throw std::invalid_argument("assemble_frame: payload has " + std::to_string(payload.data.size()) +
                                    " data bytes; this configuration requires " + std::to_string(cfg.data_bytes()) +
                                    " (" + std::to_string(cfg.data_field_bytes()) + " including CRC)");
    if (tables.pilots.size() != static_cast<std::size_t>(cfg.pilot_block_len) ||
        tables.training.size() != static_cast<std::size_t>(cfg.training_rep_len) ||
        tables.golay.length() != static_cast<std::size_t>(cfg.golay_len))
        throw std::invalid_argument("assemble_frame: symbol tables do not match the frame configuration");

    const Constellation c = build_constellation(cfg.modulation);
    const SymbolVector data = map_bits(bytes_to_bits(wire), c);

    SymbolVector out;
    out.reserve(lay.total_symbols);
    for (int r = 0; r < cfg.training_reps; ++r) out.insert(out.end(), tables.training.begin(), tables.training.end());
    for (int v : tables.golay.a) out.emplace_back(v, 0.0);
    for (int v : tables.golay.b) out.emplace_back(v, 0.0);

    auto next = data.begin();
    for (std::size_t i = 0; i < lay.pilot_spans.size(); ++i) {
        out.insert(out.end(), tables.pilots.begin(), tables.pilots.end());
        const auto len = static_cast<std::ptrdiff_t>(lay.data_spans[i].size());
        out.insert(out.end(), next, next + len);
        next += len;
    }
    return out;
}

ParsedFrame parse_frame(std::span<const Complex> symbols, const FrameConfig& cfg, std::size_t start_index)
{
    const FrameLayout lay = compute_layout(cfg);
    const std::size_t payload_start = lay.preamble_span.end;
    const std::size_t needed = start_index + static_cast<std::size_t>(cfg.payload_symbols);
    if (symbols.size() < needed)
        throw TruncatedFrame("parse_frame: payload section needs " + std::to_string(cfg.payload_symbols) +
                             " symbols from index " + std::to_string(start_index) + ", only " +
                             std::to_string(symbols.size() > start_index ? symbols.size() - start_index : 0) +
                             " available");

    auto slice = [&](const IndexRange& r) {
        const std::size_t b = start_index + (r.begin - payload_start);
        return SymbolVector(symbols.begin() + static_cast<std::ptrdiff_t>(b),
                            symbols.begin() + static_cast<std::ptrdiff_t>(b + r.size()));
    };
    ParsedFrame out;
    for (std::size_t i = 0; i < lay.pilot_spans.size(); ++i) {
        out.pilot_blocks.push_back(slice(lay.pilot_spans[i]));
        out.data_blocks.push_back(slice(lay.data_spans[i]));
    }
    return out;
}

std::vector<bool> pilot_mask(const FrameConfig& cfg)
{
    const FrameLayout lay = compute_layout(cfg);
    const std::size_t payload_start = lay.preamble_span.end;
    std::vector<bool> mask(static_cast<std::size_t>(cfg.payload_symbols), false);
    for (const auto& span : lay.pilot_spans)
        for (std::size_t i = span.begin; i < span.end; ++i) mask[i - payload_start] = true;
    return mask;
}

ComplexBuffer transmit_frame(const PacketPayload& payload, const FrameConfig& cfg, const FrameTables& tables,
                             const PulseShapeConfig& pulse)
{
    return shape_and_upsample(assemble_frame(payload, cfg, tables), pulse);
}

}  // namespace pilotlink
