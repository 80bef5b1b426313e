// SPDX-License-Identifier: Apache-2.0
#include "pilotlink/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace pilotlink {

double evm(std::span<const Complex> rx, std::span<const Complex> ref)
{
    if (rx.empty() || rx.size() != ref.size()) throw std::invalid_argument("evm: inputs must be nonempty and equal length");
    double e = 0.0, p = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        e += std::norm(rx[i] - ref[i]);
        p += std::norm(ref[i]);
    }
    if (p == 0.0) throw std::invalid_argument("evm: reference has zero power");
    return 100.0 * std::sqrt(e / p);
}

double sinr_estimate(std::span<const Complex> equalized, std::span<const Complex> decisions)
{
    if (equalized.empty() || equalized.size() != decisions.size())
        throw std::invalid_argument("sinr_estimate: inputs must be nonempty and equal length");
    double e = 0.0, p = 0.0;
    for (std::size_t i = 0; i < equalized.size(); ++i) {
        e += std::norm(equalized[i] - decisions[i]);
        p += std::norm(decisions[i]);
    }
    if (e == 0.0) return kSinrInfinite;
    return 10.0 * std::log10(p / e);
}

double goodput(std::uint64_t crc_pass, std::uint64_t data_bytes, double duration_s)
{
    if (!(duration_s > 0.0)) throw std::invalid_argument("goodput: duration must be positive");
    return static_cast<double>(crc_pass) * static_cast<double>(data_bytes) * 8.0 / duration_s;
}

double throughput(std::uint64_t frames_detected, std::uint64_t data_symbols, int bits_per_symbol, double duration_s)
{
    if (!(duration_s > 0.0)) throw std::invalid_argument("throughput: duration must be positive");
    return static_cast<double>(frames_detected) * static_cast<double>(data_symbols) * bits_per_symbol / duration_s;
}

TrialResult aggregate_trial(const FrameConfig& cfg, const ChannelProfile& profile, std::uint64_t trial,
                            std::uint64_t seed, std::uint64_t frames_sent, double symbol_period,
                            std::span<const FrameEvent> events)
{
    TrialResult r;
    r.frame_cfg = cfg;
    r.profile = profile;
    r.trial = trial;
    r.seed = seed;
    r.frames_sent = frames_sent;
    r.duration_s = static_cast<double>(frames_sent) * cfg.total_symbols() * symbol_period;

    double err_tx = 0.0, ref_tx = 0.0, err_dec = 0.0, ref_dec = 0.0, phase = 0.0;
    std::uint64_t measured_frames = 0;
    for (const FrameEvent& e : events) {
        if (e.detected) ++r.frames_detected;
        if (e.crc_pass) ++r.crc_pass;
        if (e.symbols == 0) continue;
        ++measured_frames;
        r.symbols_measured += e.symbols;
        r.decision_errors += e.decision_errors;
        err_tx += e.err_tx;
        ref_tx += e.ref_tx;
        err_dec += e.err_dec;
        ref_dec += e.ref_dec;
        phase += e.residual_phase_deg;
    }
    if (r.duration_s > 0.0) {
        r.goodput_bps = goodput(r.crc_pass, static_cast<std::uint64_t>(cfg.data_bytes()), r.duration_s);
        r.throughput_bps = throughput(r.frames_detected, static_cast<std::uint64_t>(cfg.data_symbols()),
                                      cfg.bits_per_symbol(), r.duration_s);
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    r.evm_percent = ref_tx > 0.0 ? 100.0 * std::sqrt(err_tx / ref_tx) : nan;
    r.evm_decision_percent = ref_dec > 0.0 ? 100.0 * std::sqrt(err_dec / ref_dec) : nan;
    r.sinr_db = ref_dec > 0.0 ? (err_dec == 0.0 ? kSinrInfinite : 10.0 * std::log10(ref_dec / err_dec)) : nan;
    r.mean_residual_phase_deg = measured_frames ? phase / static_cast<double>(measured_frames) : nan;
    return r;
}

const std::vector<std::string>& csv_columns()
{
    static const std::vector<std::string> cols = {
        "profile",          "lambda_p",        "modulation",     "trial",          "seed",
        "frames_sent",      "frames_detected", "crc_pass",       "duration_s",     "goodput_bps",
        "throughput_bps",   "evm_percent",     "evm_decision_percent", "sinr_db", "mean_residual_phase_deg",
        "symbols_measured", "decision_errors", "snr_db",         "delta_f_hz",     "drift_hz_per_s",
        "coherence_symbols", "fading",
    };
    return cols;
}

std::string csv_header()
{
    std::string s;
    for (const auto& c : csv_columns()) {
        if (!s.empty()) s += ',';
        s += c;
    }
    return s;
}

std::string csv_row(const TrialResult& r)
{
    const std::vector<std::string> v = {
        r.profile.name,
        std::to_string(r.frame_cfg.lambda_p),
        modulation_name(r.frame_cfg.modulation),
        std::to_string(r.trial),
        std::to_string(r.seed),
        std::to_string(r.frames_sent),
        std::to_string(r.frames_detected),
        std::to_string(r.crc_pass),
        format_double(r.duration_s),
        format_double(r.goodput_bps),
        format_double(r.throughput_bps),
        format_double(r.evm_percent),
        format_double(r.evm_decision_percent),
        format_double(r.sinr_db),
        format_double(r.mean_residual_phase_deg),
        std::to_string(r.symbols_measured),
        std::to_string(r.decision_errors),
        r.profile.snr_db ? format_double(*r.profile.snr_db) : "inf",
        format_double(r.profile.delta_f_hz),
        format_double(r.profile.drift_hz_per_s),
        r.profile.coherence_symbols ? std::to_string(*r.profile.coherence_symbols) : "inf",
        fading_name(r.profile.fading),
    };
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        s += v[i];
    }
    return s;
}

void write_csv(std::ostream& os, std::span<const TrialResult> rows)
{
    os << csv_header() << '\n';
    for (const auto& r : rows) os << csv_row(r) << '\n';
}

std::string format_double(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& s)
{
    if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw std::invalid_argument("not a number: '" + s + "'");
    return v;
}

std::string modulation_name(int order) { return std::to_string(order) + "qam"; }

int parse_modulation(const std::string& s)
{
    std::string t;
    for (char ch : s) t += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    if (t.size() > 3 && t.ends_with("qam")) t.resize(t.size() - 3);
    if (t == "qpsk") t = "4";
    if (t == "4" || t == "8" || t == "16" || t == "64") return std::stoi(t);
    throw std::invalid_argument("unknown modulation '" + s + "' (expected 4qam, 8qam, 16qam or 64qam)");
}

std::string fading_name(FadingKind k)
{
    switch (k) {
    case FadingKind::none: return "none";
    case FadingKind::block_rayleigh: return "rayleigh";
    case FadingKind::block_rician: return "rician";
    }
    return "none";
}

FadingKind parse_fading(const std::string& s)
{
    if (s == "none") return FadingKind::none;
    if (s == "rayleigh") return FadingKind::block_rayleigh;
    if (s == "rician") return FadingKind::block_rician;
    throw std::invalid_argument("unknown fading kind '" + s + "' (expected none, rayleigh or rician)");
}

}  // namespace pilotlink
