// SPDX-License-Identifier: Apache-2.0
#include "oracle.hpp"
#include "pilotlink/channel.hpp"

#include <doctest.h>

#include <random>

using namespace pilotlink;

namespace {

ComplexBuffer random_buffer(std::size_t n, double ts, std::uint64_t seed)
{
    return ComplexBuffer(oracle::gaussian_noise(n, 1.0, seed), ts);
}

}  // namespace

TEST_CASE("CFO rotation")
{
    const auto x = random_buffer(1000, 0.25e-6, 1);
    ChannelProfile p;

    SUBCASE("no offset is the identity")
    {
        CHECK(apply_cfo_phase(x, p).samples() == x.samples());
    }
    SUBCASE("theta = pi negates")
    {
        p.theta_in = kPi;
        const auto y = apply_cfo_phase(x, p);
        for (std::size_t n = 0; n < x.size(); ++n) CHECK(std::abs(y[n] + x[n]) < 1e-12);
    }
    SUBCASE("constant offset")
    {
        p.delta_f_hz = 1234.5;
        p.theta_in = 0.3;
        const auto y = apply_cfo_phase(x, p);
        for (std::size_t n = 0; n < x.size(); n += 13) {
            const double ph = 2.0 * kPi * 1234.5 * static_cast<double>(n) * 0.25e-6 + 0.3;
            CHECK(std::abs(y[n] - x[n] * std::polar(1.0, -ph)) < 1e-9);
        }
    }
    SUBCASE("global clock offset")
    {
        p.delta_f_hz = 777.0;
        p.drift_hz_per_s = 5e4;
        const auto whole = apply_cfo_phase(x, p, {1000, 4});
        const ComplexBuffer tail(SymbolVector(x.samples().begin() + 400, x.samples().end()), x.sample_period());
        const auto part = apply_cfo_phase(tail, p, {1400, 4});
        for (std::size_t n = 0; n < part.size(); ++n) CHECK(std::abs(part[n] - whole[n + 400]) < 1e-9);
    }
}

TEST_CASE("linear drift ramps the instantaneous frequency")
{
    const double ts = 1e-4;   // 1 s in 10000 samples
    const std::size_t n = 10001;
    const ComplexBuffer ones(SymbolVector(n, Complex(1.0, 0.0)), ts);
    ChannelProfile p;
    p.delta_f_hz = 50.0;
    p.drift_hz_per_s = 100.0;
    const auto y = apply_cfo_phase(ones, p);
    for (std::size_t k = 0; k + 1 < n; k += 250) {
        // phase is negated by the channel; forward difference sits at the half sample
        const double dphi = oracle::wrap_pi(std::arg(y[k + 1]) - std::arg(y[k]));
        const double f = -dphi / (2.0 * kPi * ts);
        const double t_mid = (static_cast<double>(k) + 0.5) * ts;
        CHECK(f == doctest::Approx(50.0 + 100.0 * t_mid).epsilon(1e-6));
        CHECK(cfo_at(p, static_cast<std::int64_t>(k), ts, 1) ==
              doctest::Approx(50.0 + 100.0 * static_cast<double>(k) * ts));
    }
}

TEST_CASE("drift walk is deterministic and steps once per epoch")
{
    ChannelProfile p;
    p.drift_walk_sigma_hz = 300.0;
    p.coherence_symbols = 128;
    p.seed = 9;
    const ComplexBuffer ones(SymbolVector(128 * 4 * 5, Complex(1.0, 0.0)), 0.25e-6);
    const auto a = apply_cfo_phase(ones, p, {0, 4});
    const auto b = apply_cfo_phase(ones, p, {0, 4});
    CHECK(a.samples() == b.samples());
    CHECK(cfo_at(p, 0, 0.25e-6, 4) == 0.0);
    CHECK(cfo_at(p, 511, 0.25e-6, 4) == 0.0);
    const double f1 = cfo_at(p, 512, 0.25e-6, 4);
    CHECK(f1 != 0.0);
    CHECK(cfo_at(p, 1023, 0.25e-6, 4) == f1);
    // measured frequency inside epoch 1 matches cfo_at
    const double dphi = oracle::wrap_pi(std::arg(a[700]) - std::arg(a[699]));
    CHECK(-dphi / (2.0 * kPi * 0.25e-6) == doctest::Approx(f1).epsilon(1e-6));
}

TEST_CASE("block fading")
{
    ChannelProfile p;
    p.fading = FadingKind::block_rayleigh;
    p.seed = 42;

    SUBCASE("infinite coherence uses one gain")
    {
        const auto x = random_buffer(5000, 0.25e-6, 2);
        const auto f = apply_block_fading(x, p, {0, 4});
        REQUIRE(f.gains.size() == 1);
        for (std::size_t n = 0; n < x.size(); ++n) CHECK(std::abs(f.buffer[n] - x[n] * f.gains[0].gain) < 1e-15);
    }
    SUBCASE("epochs align to symbols on the global clock")
    {
        p.coherence_symbols = 10;
        const auto x = random_buffer(200, 0.25e-6, 3);
        const auto f = apply_block_fading(x, p, {20, 4});
        // samples 20..219 = symbols 5..54 -> epochs 0..5
        REQUIRE(f.gains.size() == 6);
        for (std::size_t i = 0; i < f.gains.size(); ++i) {
            CHECK(f.gains[i].epoch == static_cast<std::int64_t>(i));
            CHECK(f.gains[i].gain == epoch_gain(p, static_cast<std::int64_t>(i)));
        }
        CHECK(f.buffer[19] == x[19] * f.gains[0].gain);   // global sample 39 = symbol 9
        CHECK(f.buffer[20] == x[20] * f.gains[1].gain);
    }
    SUBCASE("rayleigh gains have unit mean square")
    {
        double s = 0.0;
        const int n = 100000;
        for (int e = 0; e < n; ++e) s += std::norm(epoch_gain(p, e));
        CHECK(s / n == doctest::Approx(1.0).epsilon(0.02));
    }
    SUBCASE("rician gains have unit mean square and the right K")
    {
        p.fading = FadingKind::block_rician;
        p.rician_k = 4.0;
        Complex mean{};
        double s = 0.0;
        const int n = 100000;
        for (int e = 0; e < n; ++e) {
            const Complex g = epoch_gain(p, e);
            mean += g;
            s += std::norm(g);
        }
        mean /= static_cast<double>(n);
        CHECK(s / n == doctest::Approx(1.0).epsilon(0.02));
        const double los = std::norm(mean);
        CHECK(los / (s / n - los) == doctest::Approx(4.0).epsilon(0.05));
    }
    SUBCASE("same seed, same gains; other seed, other gains")
    {
        ChannelProfile q = p;
        for (int e = 0; e < 50; ++e) CHECK(epoch_gain(p, e) == epoch_gain(q, e));
        q.seed = 43;
        CHECK(epoch_gain(p, 0) != epoch_gain(q, 0));
    }
    SUBCASE("no fading is rejected")
    {
        p.fading = FadingKind::none;
        CHECK_THROWS_AS(apply_block_fading(random_buffer(10, 1.0, 1), p), std::invalid_argument);
    }
}

TEST_CASE("AWGN")
{
    const std::size_t n = 100000;
    SymbolVector unit(n);
    std::mt19937_64 g(3);
    std::uniform_real_distribution<double> u(-kPi, kPi);
    for (auto& z : unit) z = std::polar(1.0, u(g));
    const ComplexBuffer x(unit, 1e-6);

    CHECK(apply_awgn(x, std::nullopt, 1).samples() == x.samples());

    const auto y = apply_awgn(x, 0.0, 7);
    double e = 0.0;
    for (std::size_t i = 0; i < n; ++i) e += std::norm(y[i] - x[i]);
    CHECK(e / static_cast<double>(n) == doctest::Approx(1.0).epsilon(0.02));

    const auto y10 = apply_awgn(x, 10.0, 7);
    e = 0.0;
    for (std::size_t i = 0; i < n; ++i) e += std::norm(y10[i] - x[i]);
    CHECK(e / static_cast<double>(n) == doctest::Approx(0.1).epsilon(0.02));

    const auto a = apply_awgn(x, 0.0, 7);
    const auto b = apply_awgn(x, 0.0, 8);
    CHECK(a.samples() == y.samples());
    CHECK(a.samples() != b.samples());
    double eb = 0.0;
    for (std::size_t i = 0; i < n; ++i) eb += std::norm(b[i] - x[i]);
    CHECK(eb / static_cast<double>(n) == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("profile validation")
{
    ChannelProfile p;
    CHECK_NOTHROW(p.validate(0.25e-6));
    p.delay_spread_s = 0.1e-6;
    CHECK_THROWS_AS(p.validate(0.25e-6), std::invalid_argument);
    p.delay_spread_s = 0.0;
    p.coherence_symbols = 0;
    CHECK_THROWS_AS(p.validate(0.25e-6), std::invalid_argument);
}
