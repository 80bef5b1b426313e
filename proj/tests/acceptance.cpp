// SPDX-License-Identifier: Apache-2.0
//
// Acceptance run: one PASS/FAIL line per criterion.
//
//   acceptance                 all criteria, exit 1 if any fails
//   acceptance --only 5        a single criterion
//   acceptance --known 6       a failure of criterion 6 exits with 77
#include "oracle.hpp"
#include "pilotlink/harness.hpp"
#include "pilotlink/rng.hpp"
#include "pilotlink/sigmf.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <thread>

using namespace pilotlink;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

unsigned g_workers = 1;

FrameConfig cell(int lambda, int mod)
{
    FrameConfig c;
    c.lambda_p = lambda;
    c.modulation = mod;
    return c;
}

// 1 -------------------------------------------------------------------------
Outcome loopback()
{
    bool ok = true;
    double worst_evm = 0.0, worst_s = 0.0;
    std::uint64_t mismatched = 0;
    for (int lam : {1, 2, 4, 6, 8}) {
        for (int mod : {4, 8, 16, 64}) {
            const auto cfg = cell(lam, mod);
            const auto t0 = std::chrono::steady_clock::now();
            const auto r = run_trial(cfg, ChannelProfile{}, 100, 1000 + lam * 100 + mod);
            const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            worst_s = std::max(worst_s, secs);
            worst_evm = std::max(worst_evm, r.evm_percent);
            ok = ok && r.crc_pass == r.frames_sent && r.evm_percent < 0.1 && secs < 10.0;

            // byte identity on a directly driven chain
            const auto tables = make_frame_tables(cfg);
            const PulseShapeConfig pulse;
            for (std::uint64_t k = 0; k < 10; ++k) {
                const Bytes sent = generate_payload(static_cast<std::size_t>(cfg.data_bytes()), k * 31 + lam + mod);
                auto tx = transmit_frame(crc_attach(sent), cfg, tables, pulse);
                SymbolVector s(40, Complex{});
                s.insert(s.end(), tx.samples().begin(), tx.samples().end());
                s.resize(s.size() + 40);
                const auto rx = receive_frame(ComplexBuffer(s, pulse.sample_period()), cfg, DetectorConfig{});
                if (rx.status != RxStatus::ok || !rx.payload || rx.payload->data != sent) ++mismatched;
            }
        }
    }
    ok = ok && mismatched == 0;
    return {ok, fmt("20 cells x 100 frames: all CRC pass=%s, byte mismatches %llu/200, worst EVM %.4f%%, worst cell %.2f s",
                    ok ? "yes" : "no", static_cast<unsigned long long>(mismatched), worst_evm, worst_s)};
}

// 2 -------------------------------------------------------------------------
Outcome coarse_cfo()
{
    const FrameConfig cfg;
    const auto training = make_frame_tables(cfg).training;
    const std::size_t m = training.size();
    const double ts = 1e-6, dt = static_cast<double>(m) * ts, half = 1.0 / (2.0 * dt);
    std::mt19937_64 g(derive_seed(2, {0}));
    std::uniform_real_distribution<double> u(-0.8 * half, 0.8 * half);

    auto estimate = [&](double f, double noise_var, std::uint64_t seed) -> std::optional<double> {
        SymbolVector x(16, Complex{});
        for (int r = 0; r < 2; ++r) x.insert(x.end(), training.begin(), training.end());
        x.resize(x.size() + 16);
        for (std::size_t n = 0; n < x.size(); ++n) x[n] *= std::polar(1.0, 2.0 * kPi * f * static_cast<double>(n) * ts);
        if (noise_var > 0.0) {
            const auto w = oracle::gaussian_noise(x.size(), noise_var, seed);
            for (std::size_t n = 0; n < x.size(); ++n) x[n] += w[n];
        }
        const auto d = detect_training(autocorrelation_metric(x, m), DetectorConfig{}, m, dt);
        if (!d) return std::nullopt;
        return d->delta_f_est;
    };

    double worst_rel = 0.0;
    int missed = 0;
    for (int i = 0; i < 1000; ++i) {
        const double f = u(g);
        const auto e = estimate(f, 0.0, 0);
        if (!e) {
            ++missed;
            continue;
        }
        worst_rel = std::max(worst_rel, std::abs(*e - f) / std::abs(f));
    }
    double sq = 0.0;
    int n = 0;
    for (int i = 0; i < 1000; ++i) {
        const double f = u(g);
        const auto e = estimate(f, 0.1, derive_seed(2, {1, static_cast<std::uint64_t>(i)}));
        if (!e) {
            ++missed;
            continue;
        }
        sq += (*e - f) * (*e - f);
        ++n;
    }
    const double rms = std::sqrt(sq / std::max(n, 1));
    const double limit = 0.02 * half;
    const bool ok = missed == 0 && worst_rel < 1e-6 && rms < limit;
    return {ok, fmt("noiseless worst relative error %.2e (<1e-6); 10 dB RMS error %.1f Hz (< %.1f Hz); missed %d",
                    worst_rel, rms, limit, missed)};
}

// 3 -------------------------------------------------------------------------
Outcome golay()
{
    bool ok = true;
    std::string lens;
    for (std::size_t n = 2; n <= 512; n *= 2) {
        const auto p = generate_golay_pair(n);
        const auto ra = oracle::autocorr(p.a), rb = oracle::autocorr(p.b);
        const auto la = aperiodic_autocorrelation(p.a), lb = aperiodic_autocorrelation(p.b);
        bool good = ra[0] + rb[0] == static_cast<long>(2 * n) && la == ra && lb == rb;
        for (std::size_t k = 1; k < n; ++k) good = good && ra[k] + rb[k] == 0;
        ok = ok && good;
        if (!good) lens += " " + std::to_string(n);
    }
    return {ok, ok ? "N_g = 2..512: sums are exactly (2N_g, 0, ..., 0)" : "failing lengths:" + lens};
}

// 4 -------------------------------------------------------------------------
Outcome table()
{
    const std::vector<std::pair<std::size_t, std::size_t>> want = {{16, 240}, {32, 224}, {64, 192}, {96, 160}, {128, 128}};
    std::vector<std::pair<std::size_t, std::size_t>> got;
    for (int lam : {1, 2, 4, 6, 8}) {
        const auto lay = compute_layout(cell(lam, 16));
        std::size_t p = 0, d = 0;
        for (const auto& s : lay.pilot_spans) p += s.size();
        for (const auto& s : lay.data_spans) d += s.size();
        got.emplace_back(p, d);
    }
    std::string s;
    for (auto [p, d] : got) s += fmt("(%zu,%zu)", p, d);
    return {got == want, s};
}

// 5 -------------------------------------------------------------------------
constexpr double kDriftHzPerS = 2.5e5;

Outcome residual_phase()
{
    SweepSpec spec;
    spec.lambdas = {1, 2, 4, 8};
    spec.modulations = {16};
    spec.frames_per_trial = 10;
    spec.trials_per_cell = 1;
    spec.master_seed = 5;
    spec.profiles.clear();
    std::mt19937_64 g(derive_seed(5, {0}));
    std::uniform_real_distribution<double> df(-5000.0, 5000.0), th(-kPi, kPi);
    for (int t = 0; t < 30; ++t) {
        ChannelProfile p;
        p.name = "drift" + std::to_string(t);
        p.drift_hz_per_s = kDriftHzPerS;
        p.delta_f_hz = df(g);
        p.theta_in = th(g);
        p.seed = static_cast<std::uint64_t>(t + 1);
        spec.profiles.push_back(p);
    }
    const auto rows = run_sweep(spec, g_workers);
    std::map<int, std::pair<double, int>> acc;
    for (const auto& r : rows) {
        if (std::isnan(r.mean_residual_phase_deg)) continue;
        acc[r.frame_cfg.lambda_p].first += r.mean_residual_phase_deg;
        acc[r.frame_cfg.lambda_p].second += 1;
    }
    std::vector<double> mean;
    std::string s = fmt("drift %.3g Hz/s, 30 trials:", kDriftHzPerS);
    for (int lam : {1, 2, 4, 8}) {
        mean.push_back(acc[lam].second ? acc[lam].first / acc[lam].second : std::nan(""));
        s += fmt(" l%d=%.3f deg", lam, mean.back());
    }
    bool ok = mean[0] >= 5.0 && mean[0] <= 15.0 && mean[3] < 1.0;
    for (std::size_t i = 1; i < mean.size(); ++i) ok = ok && mean[i] < mean[i - 1];
    return {ok, s};
}

// 6 -------------------------------------------------------------------------
Outcome goodput_shape()
{
    SweepSpec spec;
    spec.lambdas = {1, 2, 4, 6, 8};
    spec.modulations = {4, 16, 64};
    ChannelProfile p;
    p.name = "short_coherence";
    p.snr_db = 20.0;
    p.coherence_symbols = 128;
    p.drift_walk_sigma_hz = 250.0;
    p.seed = 6;
    spec.profiles = {p};
    spec.frames_per_trial = 25;
    spec.trials_per_cell = 24;
    spec.master_seed = 6;
    const auto rows = run_sweep(spec, g_workers);
    std::map<std::pair<int, int>, double> gp;
    for (const auto& r : rows) gp[{r.frame_cfg.modulation, r.frame_cfg.lambda_p}] += r.goodput_bps / 24.0;

    auto best46 = [&](int mod) { return std::max(gp[{mod, 4}], gp[{mod, 6}]); };
    const bool a = best46(64) >= 2.0 * gp[{64, 1}] && best46(16) >= 2.0 * gp[{16, 1}];
    double lo = 1e300, hi = 0.0, peak64 = 0.0;
    for (int lam : {1, 2, 4, 6, 8}) {
        lo = std::min(lo, gp[{4, lam}]);
        hi = std::max(hi, gp[{4, lam}]);
        peak64 = std::max(peak64, gp[{64, lam}]);
    }
    const double spread = hi > 0.0 ? (hi - lo) / hi : 1.0;
    const bool b = spread <= 0.25;
    const bool c = gp[{64, 8}] < peak64;
    std::string s = fmt("(a) %s 64qam %.0f/%.0f 16qam %.0f/%.0f kbps; (b) %s 4qam spread %.3f; (c) %s 64qam l8 %.0f vs peak %.0f kbps",
                        a ? "pass" : "fail", best46(64) / 1e3, gp[{64, 1}] / 1e3, best46(16) / 1e3, gp[{16, 1}] / 1e3,
                        b ? "pass" : "fail", spread, c ? "pass" : "fail", gp[{64, 8}] / 1e3, peak64 / 1e3);
    return {a && b && c, s};
}

// 7 -------------------------------------------------------------------------
Outcome evm_sinr()
{
    SweepSpec spec;
    spec.lambdas = {2, 8};
    spec.modulations = {4, 16, 64};
    spec.profiles.clear();
    for (double s : {10.0, 15.0, 20.0, 25.0}) {
        ChannelProfile p;
        p.name = fmt("snr%g", s);
        p.snr_db = s;
        p.delta_f_hz = 700.0;
        p.seed = 7;
        spec.profiles.push_back(p);
    }
    spec.frames_per_trial = 10;
    spec.trials_per_cell = 2;
    spec.master_seed = 7;
    int clean = 0;
    double worst_identity = 0.0;
    for (const auto& r : run_sweep(spec, g_workers)) {
        if (r.decision_errors != 0 || r.symbols_measured == 0) continue;
        ++clean;
        const double want = -20.0 * std::log10(r.evm_percent / 100.0);
        worst_identity = std::max(worst_identity, std::abs(r.sinr_db - want));
    }

    const auto con = build_constellation(16);
    double worst_snr = 0.0;
    std::string per;
    for (double s : {10.0, 15.0, 20.0, 25.0}) {
        std::mt19937_64 g(derive_seed(7, {static_cast<std::uint64_t>(s)}));
        SymbolVector tx(100000);
        for (auto& z : tx) z = con.points[g() % con.points.size()];
        const auto w = oracle::gaussian_noise(tx.size(), std::pow(10.0, -s / 10.0), g());
        SymbolVector y = tx;
        for (std::size_t i = 0; i < y.size(); ++i) y[i] += w[i];
        const double m = sinr_estimate(y, tx);
        worst_snr = std::max(worst_snr, std::abs(m - s));
        per += fmt(" %g->%.2f", s, m);
    }
    const bool ok = clean > 0 && worst_identity <= 0.2 && worst_snr <= 0.3;
    return {ok, fmt("%d error-free trials, worst |sinr + 20log10(evm)| %.2e dB; SNR dB:%s", clean, worst_identity,
                    per.c_str())};
}

// 8 and 10 share the sweep outputs ------------------------------------------
struct SweepOutputs {
    std::string csv;
    std::vector<std::pair<std::string, std::string>> sigmf;   // file name, text
};

SweepOutputs sweep_outputs(unsigned workers)
{
    SweepSpec spec = load_sweep_spec(std::string(PILOTLINK_CONFIG_DIR) + "/g2g.cfg");
    spec.master_seed = 42;
    spec.frames_per_trial = 10;
    TrialOptions opts;
    opts.capture_iq = true;
    const auto runs = run_sweep_detailed(spec, workers, opts);
    SweepOutputs out;
    std::vector<TrialResult> rows;
    for (const auto& r : runs) {
        rows.push_back(r.result);
        const auto rec = make_sigmf_record(r.result, SigmfEnvironment{}, 1.0 / opts.receiver.pulse.sample_period(),
                                           r.frame_offsets);
        out.sigmf.emplace_back(run_id(r.result) + ".sigmf-meta", to_json(rec).dump(2) + "\n");
    }
    std::ostringstream os;
    write_csv(os, rows);
    out.csv = os.str();
    return out;
}

const SweepOutputs& reference_outputs()
{
    static const SweepOutputs ref = sweep_outputs(1);
    return ref;
}

Outcome determinism()
{
    const auto& a = reference_outputs();
    const auto b = sweep_outputs(1);
    const auto c = sweep_outputs(8);
    const bool ok = a.csv == b.csv && a.csv == c.csv && a.sigmf == b.sigmf && a.sigmf == c.sigmf;
    return {ok, fmt("g2g sweep, seed 42: CSV %zu bytes, %zu SigMF files identical across 2 runs and workers {1, 8}",
                    a.csv.size(), a.sigmf.size())};
}

// 9 -------------------------------------------------------------------------
Outcome oracles()
{
    std::size_t diff = 0, total = 0;
    for (int order : {4, 8, 16, 64}) {
        const auto c = build_constellation(order);
        std::mt19937_64 g(derive_seed(9, {static_cast<std::uint64_t>(order)}));
        SymbolVector s(10000);
        for (auto& z : s) z = c.points[g() % c.points.size()];
        const auto w = oracle::gaussian_noise(s.size(), 0.05, g());
        for (std::size_t i = 0; i < s.size(); ++i) s[i] += w[i];
        const Bits got = demap_symbols(s, c);
        for (std::size_t i = 0; i < s.size(); ++i) {
            const unsigned label = c.label_of[oracle::nearest_exhaustive(s[i], c.points)];
            unsigned mine = 0;
            for (int b = 0; b < c.bits_per_symbol; ++b)
                mine = (mine << 1) | got[i * static_cast<std::size_t>(c.bits_per_symbol) + static_cast<std::size_t>(b)];
            diff += mine != label ? 1 : 0;
            ++total;
        }
    }

    const auto ref = make_frame_tables(FrameConfig{}).pilots;
    const double sigma2 = 0.01;
    const Complex h = std::polar(0.8, 0.4);
    double acc = 0.0;
    const int trials = 10000;
    for (int t = 0; t < trials; ++t) {
        const auto w = oracle::gaussian_noise(ref.size(), sigma2, derive_seed(9, {1, static_cast<std::uint64_t>(t)}));
        SymbolVector y(ref.size());
        for (std::size_t k = 0; k < y.size(); ++k) y[k] = h * ref[k] + w[k];
        acc += std::norm(estimate_channel(y, ref) - h);
    }
    const double ratio = (acc / trials) / (sigma2 / static_cast<double>(ref.size()));
    const bool ok = diff == 0 && std::abs(ratio - 1.0) <= 0.1;
    return {ok, fmt("demapper disagreements %zu/%zu; estimator variance / (sigma^2/N_p) = %.4f", diff, total, ratio)};
}

// 10 ------------------------------------------------------------------------
Outcome sigmf_validity()
{
    const auto& out = reference_outputs();
    std::size_t bad = 0;
    std::string first;
    for (const auto& [name, text] : out.sigmf) {
        std::vector<std::string> problems;
        try {
            const auto doc = nlohmann::ordered_json::parse(text);
            problems = validate_sigmf(doc);
            for (const auto& f : sigmf_required_global_fields())
                if (!doc.at("global").contains(f)) problems.push_back("missing " + f);
            const auto rec = sigmf_from_json(doc);
            if (to_json(rec).dump(2) + "\n" != text) problems.push_back("round trip changed the document");
        } catch (const std::exception& e) {
            problems.push_back(e.what());
        }
        if (!problems.empty()) {
            ++bad;
            if (first.empty()) first = name + ": " + problems[0];
        }
    }
    return {bad == 0 && !out.sigmf.empty(),
            fmt("%zu documents, %zu invalid%s%s", out.sigmf.size(), bad, first.empty() ? "" : "; ", first.c_str())};
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"acceptance criteria"};
    std::vector<int> only, known;
    g_workers = std::max(1u, std::thread::hardware_concurrency());
    app.add_option("--only", only, "criteria to run")->check(CLI::Range(1, 10));
    app.add_option("--known", known, "criteria whose failure exits with 77 instead of 1")->check(CLI::Range(1, 10));
    app.add_option("--workers", g_workers, "threads for sweeps");
    CLI11_PARSE(app, argc, argv);

    const std::vector<std::pair<int, std::function<Outcome()>>> all = {
        {1, loopback}, {2, coarse_cfo},   {3, golay},    {4, table},   {5, residual_phase},
        {6, goodput_shape}, {7, evm_sinr}, {8, determinism}, {9, oracles}, {10, sigmf_validity},
    };
    bool unexpected = false, expected = false;
    for (const auto& [id, fn] : all) {
        if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("criterion %2d: %s  %s  [%.1f s]\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
        std::fflush(stdout);
        if (!o.pass) {
            if (std::find(known.begin(), known.end(), id) != known.end()) expected = true;
            else unexpected = true;
        }
    }
    if (unexpected) return 1;
    return expected ? 77 : 0;
}
