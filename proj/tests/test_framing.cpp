// SPDX-License-Identifier: Apache-2.0
#include "oracle.hpp"
#include "pilotlink/framing.hpp"

#include <doctest.h>
#include <zlib.h>

#include <random>
#include <string>

using namespace pilotlink;

namespace {

FrameConfig cell(int lambda, int mod)
{
    FrameConfig c;
    c.lambda_p = lambda;
    c.modulation = mod;
    return c;
}

Bytes random_bytes(std::size_t n, std::uint64_t seed)
{
    std::mt19937_64 g(seed);
    Bytes b(n);
    for (auto& x : b) x = static_cast<std::uint8_t>(g());
    return b;
}

std::uint32_t zlib_crc(std::span<const std::uint8_t> b)
{
    return static_cast<std::uint32_t>(::crc32(0L, b.data(), static_cast<uInt>(b.size())));
}

}  // namespace

TEST_CASE("pilot/data split for the default table")
{
    const int pilots[] = {16, 32, 64, 96, 128};
    const int data[] = {240, 224, 192, 160, 128};
    const int lambdas[] = {1, 2, 4, 6, 8};
    for (int i = 0; i < 5; ++i) {
        const auto c = cell(lambdas[i], 16);
        CHECK(c.pilot_symbols() == pilots[i]);
        CHECK(c.data_symbols() == data[i]);
        CHECK(c.total_symbols() == 448);
        CHECK(c.payload_offset() == 192);
    }
}

TEST_CASE("layout")
{
    SUBCASE("lambda 1")
    {
        const auto lay = compute_layout(cell(1, 16));
        REQUIRE(lay.pilot_spans.size() == 1);
        CHECK(lay.training_span == IndexRange{0, 64});
        CHECK(lay.preamble_span == IndexRange{64, 192});
        CHECK(lay.pilot_spans[0] == IndexRange{192, 208});
        CHECK(lay.data_spans[0] == IndexRange{208, 448});
        CHECK(lay.total_symbols == 448);
    }
    SUBCASE("lambda 2: pilots at payload offsets 0 and 128")
    {
        const auto lay = compute_layout(cell(2, 16));
        REQUIRE(lay.pilot_spans.size() == 2);
        CHECK(lay.pilot_spans[0].begin - 192 == 0);
        CHECK(lay.pilot_spans[1].begin - 192 == 128);
    }
    SUBCASE("lambda 6: remainder goes first")
    {
        const auto lay = compute_layout(cell(6, 16));
        std::vector<std::size_t> lens;
        for (const auto& d : lay.data_spans) lens.push_back(d.size());
        CHECK(lens == std::vector<std::size_t>{27, 27, 27, 27, 26, 26});
    }
    SUBCASE("lambda 8")
    {
        const auto lay = compute_layout(cell(8, 16));
        REQUIRE(lay.pilot_spans.size() == 8);
        for (std::size_t i = 0; i < 8; ++i) {
            CHECK(lay.pilot_spans[i].size() == 16);
            CHECK(lay.data_spans[i].size() == 16);
            CHECK(lay.pilot_spans[i].begin == 192 + 32 * i);
        }
    }
    SUBCASE("spans tile the frame")
    {
        for (int lam : {1, 2, 4, 6, 8}) {
            const auto lay = compute_layout(cell(lam, 4));
            std::size_t pos = lay.preamble_span.end;
            for (std::size_t i = 0; i < lay.pilot_spans.size(); ++i) {
                CHECK(lay.pilot_spans[i].begin == pos);
                CHECK(lay.data_spans[i].begin == lay.pilot_spans[i].end);
                pos = lay.data_spans[i].end;
            }
            CHECK(pos == lay.total_symbols);
        }
    }
}

TEST_CASE("invalid configurations are rejected")
{
    auto bad = [](auto mutate) {
        FrameConfig c;
        mutate(c);
        CHECK_THROWS_AS(c.validate(), std::invalid_argument);
        CHECK_THROWS_AS(compute_layout(c), std::invalid_argument);
    };
    bad([](FrameConfig& c) { c.lambda_p = 3; });
    bad([](FrameConfig& c) { c.modulation = 32; });
    bad([](FrameConfig& c) { c.golay_len = 48; });
    bad([](FrameConfig& c) { c.training_reps = 1; });
    bad([](FrameConfig& c) { c.pilot_block_len = 0; });
    bad([](FrameConfig& c) { c.pilot_block_len = 64; c.lambda_p = 4; });
    bad([](FrameConfig& c) { c.crc_bits = 16; });
}

TEST_CASE("byte budgets")
{
    CHECK(cell(4, 16).data_field_bytes() == 96);
    CHECK(cell(4, 16).data_bytes() == 92);
    CHECK(cell(1, 4).data_field_bytes() == 60);
    CHECK(cell(1, 4).data_bytes() == 56);
    for (int lam : {1, 2, 4, 6, 8}) {
        for (int mod : {4, 8, 16, 64}) {
            const auto c = cell(lam, mod);
            CHECK(c.data_field_bytes() * 8 == c.data_symbols() * c.bits_per_symbol());
        }
    }
}

TEST_CASE("CRC-32")
{
    const std::string v = "123456789";
    const std::span<const std::uint8_t> vb(reinterpret_cast<const std::uint8_t*>(v.data()), v.size());
    CHECK(crc32(vb) == 0xCBF43926u);
    CHECK(zlib_crc(vb) == 0xCBF43926u);
    CHECK(crc32(Bytes{}) == zlib_crc(Bytes{}));

    for (std::size_t n : {1u, 2u, 3u, 17u, 92u, 188u, 1000u}) {
        const Bytes b = random_bytes(n, n);
        CHECK(crc32(b) == zlib_crc(b));
        CHECK(crc32(b) == oracle::crc32_bitwise(b));
    }

    const PacketPayload p = crc_attach(random_bytes(92, 4));
    CHECK(crc_check(p));
    const Bytes wire = p.wire_bytes();
    CHECK(wire.size() == 96);
    CHECK(payload_from_wire(wire) == p);
    CHECK(wire[92] == (p.crc & 0xFFu));   // little-endian

    for (std::size_t bit = 0; bit < wire.size() * 8; ++bit) {
        Bytes flipped = wire;
        flipped[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
        CHECK_FALSE(crc_check(payload_from_wire(flipped)));
    }
}

TEST_CASE("assemble and parse round trip")
{
    for (int lam : {1, 2, 4, 6, 8}) {
        for (int mod : {4, 8, 16, 64}) {
            const auto c = cell(lam, mod);
            const auto tables = make_frame_tables(c);
            const auto payload = crc_attach(random_bytes(static_cast<std::size_t>(c.data_bytes()), 100 * lam + mod));
            const auto frame = assemble_frame(payload, c, tables);
            REQUIRE(frame.size() == 448);

            const auto parsed = parse_frame(frame, c, 192);
            REQUIRE(parsed.pilot_blocks.size() == static_cast<std::size_t>(lam));
            SymbolVector data;
            for (std::size_t i = 0; i < parsed.pilot_blocks.size(); ++i) {
                CHECK(parsed.pilot_blocks[i] == tables.pilots);
                data.insert(data.end(), parsed.data_blocks[i].begin(), parsed.data_blocks[i].end());
            }
            const auto con = build_constellation(mod);
            CHECK(data == map_bits(bytes_to_bits(payload.wire_bytes()), con));
            CHECK(bits_to_bytes(demap_symbols(data, con)) == payload.wire_bytes());

            const auto mask = pilot_mask(c);
            std::size_t n_pilot = 0;
            for (bool m : mask) n_pilot += m ? 1 : 0;
            CHECK(n_pilot == static_cast<std::size_t>(c.pilot_symbols()));
        }
    }
}

TEST_CASE("frame fields")
{
    const auto c = cell(4, 16);
    const auto t = make_frame_tables(c);
    const auto frame = assemble_frame(crc_attach(random_bytes(92, 1)), c, t);
    for (std::size_t k = 0; k < 32; ++k) {
        CHECK(frame[k] == t.training[k]);
        CHECK(frame[k + 32] == t.training[k]);
    }
    for (std::size_t k = 0; k < 64; ++k) {
        CHECK(frame[64 + k] == Complex(t.golay.a[k], 0));
        CHECK(frame[128 + k] == Complex(t.golay.b[k], 0));
    }
    for (auto p : t.pilots) CHECK(std::abs(p) == doctest::Approx(1.0));
    const auto t2 = make_frame_tables(c);
    CHECK(t2.training == t.training);
    CHECK(t2.pilots == t.pilots);
}

TEST_CASE("size errors")
{
    const auto c = cell(4, 16);
    const auto t = make_frame_tables(c);
    try {
        assemble_frame(crc_attach(random_bytes(90, 1)), c, t);
        FAIL("expected rejection");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("92") != std::string::npos);
    }
    const auto frame = assemble_frame(crc_attach(random_bytes(92, 1)), c, t);
    const std::span<const Complex> cut(frame.data(), frame.size() - 10);
    CHECK_THROWS_AS(parse_frame(cut, c, 192), TruncatedFrame);
}

TEST_CASE("transmit_frame length")
{
    const auto c = cell(2, 64);
    const PulseShapeConfig pulse;
    const auto buf = transmit_frame(crc_attach(random_bytes(static_cast<std::size_t>(c.data_bytes()), 2)), c,
                                    make_frame_tables(c), pulse);
    CHECK(buf.size() == 448 * 4 + pulse.tap_count() - 1);
}
