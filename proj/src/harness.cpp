// SPDX-License-Identifier: Apache-2.0
#include "pilotlink/harness.hpp"

#include "pilotlink/rng.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstring>
#include <exception>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

namespace pilotlink {

namespace {

constexpr std::uint64_t kPayloadStream = 0x5041;
constexpr std::uint64_t kNoiseStream = 0x4e4f;
constexpr std::uint64_t kTimingStream = 0x5449;
constexpr std::uint64_t kCellStream = 0x4345;
constexpr std::uint64_t kChannelStream = 0x4348;

const char* kEventColumns =
    "frame,status,detected,crc_pass,symbols,err_tx,ref_tx,err_dec,ref_dec,decision_errors,residual_phase_deg,"
    "delta_f_est_hz";

bool is_detected(RxStatus s)
{
    return s == RxStatus::ok || s == RxStatus::crc_fail || s == RxStatus::unequalizable;
}

SymbolVector data_symbols_of(const SymbolVector& frame, const FrameLayout& lay)
{
    SymbolVector out;
    for (const auto& span : lay.data_spans)
        out.insert(out.end(), frame.begin() + static_cast<std::ptrdiff_t>(span.begin),
                   frame.begin() + static_cast<std::ptrdiff_t>(span.end));
    return out;
}

FrameEvent make_event(std::uint64_t k, const RxResult& rx, const SymbolVector& tx_data)
{
    FrameEvent e;
    e.frame = k;
    e.status = to_string(rx.status);
    e.detected = is_detected(rx.status);
    e.crc_pass = rx.status == RxStatus::ok;
    if (rx.coarse) e.delta_f_est_hz = rx.coarse->delta_f_est;
    if (!rx.payload || rx.equalized.size() != tx_data.size()) return e;
    e.symbols = rx.equalized.size();
    for (std::size_t i = 0; i < tx_data.size(); ++i) {
        e.err_tx += std::norm(rx.equalized[i] - tx_data[i]);
        e.ref_tx += std::norm(tx_data[i]);
        e.err_dec += std::norm(rx.equalized[i] - rx.decisions[i]);
        e.ref_dec += std::norm(rx.decisions[i]);
        if (rx.decisions[i] != tx_data[i]) ++e.decision_errors;
    }
    const auto& ph = rx.estimate.residual_phase_per_block;
    if (!ph.empty()) {
        double s = 0.0;
        for (double p : ph) s += std::abs(p);
        e.residual_phase_deg = s / static_cast<double>(ph.size());
    }
    return e;
}

}  // namespace

Bytes generate_payload(std::size_t byte_count, std::uint64_t seed)
{
    SplitMix64 gen(seed);
    Bytes out;
    out.reserve(byte_count);
    while (out.size() < byte_count) {
        std::uint64_t r = gen.next();
        for (int b = 0; b < 8 && out.size() < byte_count; ++b, r >>= 8) out.push_back(static_cast<std::uint8_t>(r));
    }
    return out;
}

TrialRun run_trial_detailed(const FrameConfig& cfg, const ChannelProfile& profile, std::uint64_t frames,
                            std::uint64_t seed, std::uint64_t trial_index, const TrialOptions& opts)
{
    cfg.validate();
    const PulseShapeConfig& pulse = opts.receiver.pulse;
    pulse.validate();
    profile.validate(pulse.sample_period());
    if (opts.guard_symbols < 0) throw std::invalid_argument("run_trial: guard_symbols must be non-negative");

    const int l = pulse.interpolation;
    const std::int64_t frame_samples = static_cast<std::int64_t>(cfg.total_symbols()) * l;
    const std::int64_t guard = static_cast<std::int64_t>(opts.guard_symbols) * l;
    const FrameTables tables = make_frame_tables(cfg);
    const FrameLayout lay = compute_layout(cfg);

    TrialRun run;
    run.symbol_period = pulse.symbol_period;
    run.events.reserve(frames);
    for (std::uint64_t k = 0; k < frames; ++k) {
        const PacketPayload packet = crc_attach(generate_payload(static_cast<std::size_t>(cfg.data_bytes()),
                                                                 derive_seed(seed, {kPayloadStream, k})));
        const SymbolVector frame_symbols = assemble_frame(packet, cfg, tables);
        const ComplexBuffer tx = shape_and_upsample(frame_symbols, pulse);

        double energy = 0.0;
        for (const Complex& z : tx.samples()) energy += std::norm(z);
        const double occupied_power = energy / static_cast<double>(frame_samples);

        SplitMix64 timing(derive_seed(seed, {kTimingStream, k}));
        const auto offset = static_cast<std::int64_t>(timing.next() % static_cast<std::uint64_t>(l));
        const std::int64_t burst_start = static_cast<std::int64_t>(k) * frame_samples + guard + offset;

        SymbolVector samples(static_cast<std::size_t>(guard), Complex{});
        samples.insert(samples.end(), tx.samples().begin(), tx.samples().end());
        samples.resize(samples.size() + static_cast<std::size_t>(guard), Complex{});
        ComplexBuffer buf(std::move(samples), pulse.sample_period());

        const ChannelTiming where{burst_start - guard, l};
        if (profile.fading != FadingKind::none) buf = apply_block_fading(buf, profile, where).buffer;
        buf = apply_cfo_phase(buf, profile, where);
        if (profile.snr_db)
            buf = add_noise(buf, occupied_power / std::pow(10.0, *profile.snr_db / 10.0),
                            derive_seed(seed, {kNoiseStream, k}));

        const RxResult rx = receive_frame(buf, cfg, opts.receiver);
        run.events.push_back(make_event(k, rx, data_symbols_of(frame_symbols, lay)));

        if (opts.capture_iq) {
            run.frame_offsets.push_back(run.iq.size());
            run.iq.insert(run.iq.end(), buf.samples().begin(), buf.samples().end());
        }
    }
    run.result = aggregate_trial(cfg, profile, trial_index, seed, frames, pulse.symbol_period, run.events);
    return run;
}

TrialResult run_trial(const FrameConfig& cfg, const ChannelProfile& profile, std::uint64_t frames,
                      std::uint64_t seed)
{
    return run_trial_detailed(cfg, profile, frames, seed).result;
}

// ---------------------------------------------------------------------------

void SweepSpec::validate() const
{
    if (lambdas.empty() || modulations.empty() || profiles.empty())
        throw std::invalid_argument("sweep: lambda, modulation and profile lists must be nonempty");
    if (frames_per_trial < 1) throw std::invalid_argument("sweep: frames_per_trial must be >= 1");
    if (trials_per_cell < 1) throw std::invalid_argument("sweep: trials_per_cell must be >= 1");
    for (int lam : lambdas)
        for (int mod : modulations) {
            FrameConfig cfg = base_frame;
            cfg.lambda_p = lam;
            cfg.modulation = mod;
            cfg.validate();
        }
    PulseShapeConfig pulse;
    for (const auto& p : profiles) p.validate(pulse.sample_period());
}

SweepSpec sweep_spec_from(const KeyValues& kv)
{
    SweepSpec spec;
    std::vector<std::string> names = {"default"};
    for (const auto& [k, v] : kv)
        if (k == "profiles") names = split_list(v);
    if (names.empty()) throw ConfigError("profiles: empty list");

    for (const auto& [k, v] : kv) {
        const auto dot = k.find('.');
        if (dot != std::string::npos) {
            const std::string name = k.substr(0, dot);
            if (std::find(names.begin(), names.end(), name) == names.end())
                throw ConfigError("key '" + k + "' refers to profile '" + name + "', which is not listed in profiles");
            continue;
        }
        try {
            if (k == "profiles") continue;
            if (k == "lambda_p") {
                spec.lambdas.clear();
                for (const auto& s : split_list(v)) spec.lambdas.push_back(std::stoi(s));
            } else if (k == "modulation") {
                spec.modulations.clear();
                for (const auto& s : split_list(v)) spec.modulations.push_back(parse_modulation(s));
            } else if (k == "frames") {
                spec.frames_per_trial = std::stoull(v);
            } else if (k == "trials") {
                spec.trials_per_cell = std::stoull(v);
            } else if (k == "seed") {
                spec.master_seed = std::stoull(v, nullptr, 0);
            } else if (!apply_key(spec.base_frame, k, v)) {
                throw ConfigError("unknown key '" + k + "'");
            }
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            throw ConfigError(k + ": bad value '" + v + "' (" + e.what() + ")");
        }
    }
    spec.profiles.clear();
    for (const auto& n : names) spec.profiles.push_back(channel_profile_from(kv, n));
    spec.validate();
    return spec;
}

SweepSpec load_sweep_spec(const std::string& path) { return sweep_spec_from(load_key_values(path)); }

std::vector<SweepCell> sweep_cells(const SweepSpec& spec)
{
    std::vector<SweepCell> cells;
    for (std::size_t p = 0; p < spec.profiles.size(); ++p)
        for (int lam : spec.lambdas)
            for (int mod : spec.modulations)
                for (std::uint64_t t = 0; t < spec.trials_per_cell; ++t) cells.push_back({p, lam, mod, t});
    return cells;
}

std::uint64_t cell_seed(const SweepSpec& spec, std::size_t cell_index)
{
    return derive_seed(spec.master_seed, {kCellStream, static_cast<std::uint64_t>(cell_index)});
}

std::uint64_t channel_seed(const SweepSpec& spec, std::size_t profile_index, std::uint64_t trial)
{
    return derive_seed(spec.master_seed,
                       {kChannelStream, static_cast<std::uint64_t>(profile_index), trial,
                        spec.profiles.at(profile_index).seed});
}

std::vector<TrialRun> run_sweep_detailed(const SweepSpec& spec, unsigned workers, const TrialOptions& opts)
{
    spec.validate();
    const std::vector<SweepCell> cells = sweep_cells(spec);
    std::vector<TrialRun> out(cells.size());

    auto run_cell = [&](std::size_t i) {
        const SweepCell& c = cells[i];
        FrameConfig cfg = spec.base_frame;
        cfg.lambda_p = c.lambda_p;
        cfg.modulation = c.modulation;
        ChannelProfile profile = spec.profiles[c.profile_index];
        profile.seed = channel_seed(spec, c.profile_index, c.trial);
        out[i] = run_trial_detailed(cfg, profile, spec.frames_per_trial, cell_seed(spec, i), c.trial, opts);
        out[i].result.profile.seed = spec.profiles[c.profile_index].seed;
    };

    workers = std::max(1u, workers);
    if (workers == 1 || cells.size() <= 1) {
        for (std::size_t i = 0; i < cells.size(); ++i) run_cell(i);
        return out;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    std::vector<std::thread> pool;
    const unsigned n = std::min<unsigned>(workers, static_cast<unsigned>(cells.size()));
    for (unsigned w = 0; w < n; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < cells.size(); i = next++) {
                try {
                    run_cell(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mu);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
    return out;
}

std::vector<TrialResult> run_sweep(const SweepSpec& spec, unsigned workers)
{
    std::vector<TrialResult> rows;
    for (auto& r : run_sweep_detailed(spec, workers)) rows.push_back(std::move(r.result));
    return rows;
}

std::vector<ImprovementRow> improvement_table(std::span<const TrialResult> rows)
{
    // (profile, modulation) -> lambda -> (sum, count), in first-seen order
    std::vector<std::pair<std::string, int>> keys;
    std::map<std::pair<std::string, int>, std::map<int, std::pair<double, int>>> acc;
    for (const auto& r : rows) {
        const auto key = std::make_pair(r.profile.name, r.frame_cfg.modulation);
        if (!acc.count(key)) keys.push_back(key);
        auto& cell = acc[key][r.frame_cfg.lambda_p];
        cell.first += r.goodput_bps;
        cell.second += 1;
    }
    std::vector<ImprovementRow> out;
    for (const auto& key : keys) {
        const auto& by_lambda = acc[key];
        ImprovementRow row;
        row.profile = key.first;
        row.modulation = key.second;
        const auto base = by_lambda.find(1);
        if (base == by_lambda.end()) continue;
        row.baseline_bps = base->second.first / base->second.second;
        row.best_lambda = 1;
        row.best_bps = row.baseline_bps;
        for (const auto& [lam, sc] : by_lambda) {
            const double mean = sc.first / sc.second;
            if (mean > row.best_bps) {
                row.best_bps = mean;
                row.best_lambda = lam;
            }
        }
        row.gain_percent = row.baseline_bps > 0.0 ? 100.0 * (row.best_bps - row.baseline_bps) / row.baseline_bps
                                                  : (row.best_bps > 0.0 ? kSinrInfinite : 0.0);
        out.push_back(row);
    }
    return out;
}

// ---------------------------------------------------------------------------

void write_event_log(std::ostream& os, const TrialRun& run)
{
    const TrialResult& r = run.result;
    os << "# trial_begin\n";
    write_key_values(os, to_key_values(r.frame_cfg, "frame."), "# ");
    write_key_values(os, to_key_values(r.profile, "profile."), "# ");
    write_key_values(os,
                     {{"trial", std::to_string(r.trial)},
                      {"seed", std::to_string(r.seed)},
                      {"frames_sent", std::to_string(r.frames_sent)},
                      {"symbol_period", format_double(run.symbol_period)}},
                     "# ");
    os << kEventColumns << '\n';
    for (const FrameEvent& e : run.events) {
        os << e.frame << ',' << e.status << ',' << (e.detected ? 1 : 0) << ',' << (e.crc_pass ? 1 : 0) << ','
           << e.symbols << ',' << format_double(e.err_tx) << ',' << format_double(e.ref_tx) << ','
           << format_double(e.err_dec) << ',' << format_double(e.ref_dec) << ',' << e.decision_errors << ','
           << format_double(e.residual_phase_deg) << ',' << format_double(e.delta_f_est_hz) << '\n';
    }
    os << "# trial_end\n";
}

std::vector<TrialLog> read_event_log(std::istream& is)
{
    std::vector<TrialLog> logs;
    std::string line;
    int lineno = 0;
    bool in_trial = false;
    TrialLog cur;
    auto fail = [&](const std::string& what) {
        throw std::runtime_error("event log line " + std::to_string(lineno) + ": " + what);
    };
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line == "# trial_begin") {
            if (in_trial) fail("nested trial_begin");
            in_trial = true;
            cur = TrialLog{};
            continue;
        }
        if (!in_trial) fail("data outside a trial block");
        if (line == "# trial_end") {
            if (cur.events.size() != cur.frames_sent)
                fail("trial has " + std::to_string(cur.events.size()) + " events, expected " +
                     std::to_string(cur.frames_sent));
            logs.push_back(std::move(cur));
            in_trial = false;
            continue;
        }
        if (line.starts_with("# ")) {
            const auto eq = line.find(" = ");
            if (eq == std::string::npos) fail("malformed metadata");
            const std::string key = line.substr(2, eq - 2);
            const std::string value = line.substr(eq + 3);
            try {
                if (key.starts_with("frame.")) {
                    if (!apply_key(cur.frame_cfg, key.substr(6), value)) fail("unknown key " + key);
                } else if (key.starts_with("profile.")) {
                    if (!apply_key(cur.profile, key.substr(8), value)) fail("unknown key " + key);
                } else if (key == "trial") cur.trial = std::stoull(value);
                else if (key == "seed") cur.seed = std::stoull(value);
                else if (key == "frames_sent") cur.frames_sent = std::stoull(value);
                else if (key == "symbol_period") cur.symbol_period = parse_double(value);
                else fail("unknown key " + key);
            } catch (const std::runtime_error&) {
                throw;
            } catch (const std::exception& e) {
                fail(key + ": " + e.what());
            }
            continue;
        }
        if (line == kEventColumns) continue;

        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string item;
        while (std::getline(ss, item, ',')) f.push_back(item);
        if (f.size() != 12) fail("expected 12 fields, got " + std::to_string(f.size()));
        try {
            FrameEvent e;
            e.frame = std::stoull(f[0]);
            e.status = f[1];
            e.detected = f[2] == "1";
            e.crc_pass = f[3] == "1";
            e.symbols = std::stoull(f[4]);
            e.err_tx = parse_double(f[5]);
            e.ref_tx = parse_double(f[6]);
            e.err_dec = parse_double(f[7]);
            e.ref_dec = parse_double(f[8]);
            e.decision_errors = std::stoull(f[9]);
            e.residual_phase_deg = parse_double(f[10]);
            e.delta_f_est_hz = parse_double(f[11]);
            cur.events.push_back(std::move(e));
        } catch (const std::exception& e) {
            fail(e.what());
        }
    }
    if (in_trial) fail("unterminated trial block");
    return logs;
}

TrialResult report_from_log(const TrialLog& log)
{
    return aggregate_trial(log.frame_cfg, log.profile, log.trial, log.seed, log.frames_sent, log.symbol_period,
                           log.events);
}

void write_cf32_le(std::ostream& os, std::span<const Complex> samples)
{
    auto put = [&](float f) {
        std::uint32_t u;
        std::memcpy(&u, &f, sizeof u);
        if constexpr (std::endian::native == std::endian::big) u = __builtin_bswap32(u);
        char b[4];
        std::memcpy(b, &u, 4);
        os.write(b, 4);
    };
    for (const Complex& z : samples) {
        put(static_cast<float>(z.real()));
        put(static_cast<float>(z.imag()));
    }
}

SymbolVector read_cf32_le(std::istream& is)
{
    SymbolVector out;
    char b[8];
    auto get = [](const char* p) {
        std::uint32_t u;
        std::memcpy(&u, p, 4);
        if constexpr (std::endian::native == std::endian::big) u = __builtin_bswap32(u);
        float f;
        std::memcpy(&f, &u, 4);
        return f;
    };
    while (is.read(b, 8)) out.emplace_back(get(b), get(b + 4));
    return out;
}

}  // namespace pilotlink
