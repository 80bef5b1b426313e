// SPDX-License-Identifier: Apache-2.0
#include "pilotlink/sync.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace pilotlink {

namespace {

constexpr double kTieTol = 1e-12;

// Least-squares slope of y against x.
double ls_slope(std::span<const double> x, std::span<const double> y)
{
    const auto n = static_cast<double>(x.size());
    if (x.size() < 2) return 0.0;
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxx > 0.0 ? sxy / sxx : 0.0;
}

std::vector<double> unwrap(std::vector<double> ph)
{
    for (std::size_t i = 1; i < ph.size(); ++i) {
        double d = ph[i] - ph[i - 1];
        d -= 2.0 * kPi * std::round(d / (2.0 * kPi));
        ph[i] = ph[i - 1] + d;
    }
    return ph;
}

}  // namespace

void DetectorConfig::validate() const
{
    if (!(rho_threshold >= 0.0 && rho_threshold <= 1.0))
        throw std::invalid_argument("detector: rho_threshold must be in [0, 1]");
    if (!(mf_threshold_factor > 0.0 && mf_threshold_factor <= 1.0))
        throw std::invalid_argument("detector: mf_threshold_factor must be in (0, 1]");
}

AutocorrelationMetric autocorrelation_metric(std::span<const Complex> x, std::size_t m)
{
    if (m == 0) throw std::invalid_argument("autocorrelation_metric: lag must be positive");
    if (x.size() < 2 * m) throw std::invalid_argument("autocorrelation_metric: need at least 2M samples");
    const std::size_t n_total = x.size();
    AutocorrelationMetric out{SymbolVector(n_total), std::vector<double>(n_total), std::vector<double>(n_total)};
    auto at = [&](std::ptrdiff_t k) { return k < 0 ? Complex{} : x[static_cast<std::size_t>(k)]; };
    const auto mm = static_cast<std::ptrdiff_t>(m);
    for (std::size_t n = 0; n < n_total; ++n) {
        Complex c{};
        double e_now = 0.0, e_lag = 0.0;
        for (std::ptrdiff_t k = static_cast<std::ptrdiff_t>(n) - mm + 1; k <= static_cast<std::ptrdiff_t>(n); ++k) {
            const Complex a = at(k);
            const Complex b = at(k - mm);
            c += a * std::conj(b);
            e_now += std::norm(a);
            e_lag += std::norm(b);
        }
        const double p = 0.5 * (e_now + e_lag);
        out.c[n] = c;
        out.p[n] = p;
        out.rho[n] = p > 0.0 ? std::abs(c) / p : 0.0;
    }
    return out;
}

std::optional<CoarseSyncResult> detect_training(const AutocorrelationMetric& metric, const DetectorConfig& cfg,
                                                std::size_t m, double delta_t)
{
    cfg.validate();
    const std::size_t n_total = metric.rho.size();
    std::size_t cross = n_total;
    for (std::size_t n = 0; n < n_total; ++n) {
        if (metric.p[n] > 0.0 && metric.rho[n] >= cfg.rho_threshold) {
            cross = n;
            break;
        }
    }
    if (cross == n_total) return std::nullopt;

    std::size_t best = cross;
    const std::size_t end = std::min(n_total, cross + m);
    for (std::size_t n = cross + 1; n < end; ++n) {
        const double d = metric.rho[n] - metric.rho[best];
        if (d > kTieTol) {
            best = n;
        } else if (d >= -kTieTol) {
            const double dc = std::abs(metric.c[n]) - std::abs(metric.c[best]);
            if (dc >= -kTieTol * std::max(1.0, std::abs(metric.c[best]))) best = n;
        }
    }

    CoarseSyncResult r;
    r.cross_index = cross;
    r.detect_index = best;
    r.c_peak = metric.c[best];
    r.rho_peak = metric.rho[best];
    r.delta_t = delta_t;
    r.delta_f_est = r.c_peak == Complex{} ? 0.0 : estimate_coarse_cfo(r.c_peak, delta_t);
    return r;
}

double estimate_coarse_cfo(Complex c_peak, double delta_t)
{
    if (c_peak == Complex{}) throw std::domain_error("estimate_coarse_cfo: correlation peak is zero");
    if (!(delta_t > 0.0)) throw std::invalid_argument("estimate_coarse_cfo: delta_t must be positive");
    double a = std::arg(c_peak);
    if (a <= -kPi) a = kPi;
    return a / (2.0 * kPi * delta_t);
}

ComplexBuffer nco_correct(const ComplexBuffer& x, double f_hz)
{
    const double ts = x.sample_period();
    SymbolVector out(x.size());
    for (std::size_t n = 0; n < x.size(); ++n) {
        double cycles = f_hz * static_cast<double>(n) * ts;
        cycles -= std::floor(cycles);
        out[n] = x[n] * std::polar(1.0, -2.0 * kPi * cycles);
    }
    return ComplexBuffer(std::move(out), ts);
}

std::vector<double> golay_correlation(std::span<const Complex> x, const GolayPair& pair)
{
    const std::size_t n = pair.length();
    std::vector<double> out(x.size(), 0.0);
    if (x.size() < 2 * n) return out;
    for (std::size_t end = 2 * n - 1; end < x.size(); ++end) {
        const std::size_t a0 = end + 1 - 2 * n;
        const std::size_t b0 = end + 1 - n;
        Complex s{};
        for (std::size_t k = 0; k < n; ++k) s += static_cast<double>(pair.a[k]) * x[a0 + k];
        for (std::size_t k = 0; k < n; ++k) s += static_cast<double>(pair.b[k]) * x[b0 + k];
        out[end] = std::abs(s);
    }
    return out;
}

std::optional<GolayDetection> golay_frame_detect(std::span<const Complex> x, const GolayPair& pair,
                                                 const DetectorConfig& cfg, std::size_t search_begin,
                                                 std::size_t search_end)
{
    cfg.validate();
    const std::size_t n = pair.length();
    if (n == 0 || x.size() < 2 * n) return std::nullopt;
    search_begin = std::max(search_begin, 2 * n - 1);
    search_end = std::min(search_end, x.size());
    if (search_begin >= search_end) return std::nullopt;

    const std::vector<double> s = golay_correlation(x, pair);
    const double threshold = cfg.mf_threshold_factor * 2.0 * static_cast<double>(n);
    std::size_t cross = search_end;
    for (std::size_t i = search_begin; i < search_end; ++i) {
        if (s[i] >= threshold) {
            cross = i;
            break;
        }
    }
    if (cross == search_end) return std::nullopt;
    std::size_t best = cross;
    const std::size_t end = std::min(x.size(), cross + n);
    for (std::size_t i = cross + 1; i < end; ++i)
        if (s[i] > s[best]) best = i;
    return GolayDetection{best, best + 1, s[best]};
}

Complex estimate_channel(std::span<const Complex> rx_pilot, std::span<const Complex> ref_pilot)
{
    if (rx_pilot.size() != ref_pilot.size() || rx_pilot.empty())
        throw std::invalid_argument("estimate_channel: pilot lengths differ or are zero");
    Complex acc{};
    for (std::size_t i = 0; i < rx_pilot.size(); ++i) acc += rx_pilot[i] * std::conj(ref_pilot[i]);
    return acc / static_cast<double>(rx_pilot.size());
}

SymbolVector equalize_block(std::span<const Complex> data, Complex h, double h_min)
{
    if (!(std::abs(h) > h_min))
        throw UnequalizableBlock("equalize_block: |H| = " + std::to_string(std::abs(h)) + " is at or below h_min");
    SymbolVector out(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) out[i] = data[i] / h;
    return out;
}

ResidualOffset residual_offset(const ChannelEstimate& est, double symbol_period)
{
    ResidualOffset r;
    if (est.h_blocks.size() < 2) return r;
    std::vector<double> ph;
    ph.reserve(est.h_blocks.size());
    for (const Complex& h : est.h_blocks) ph.push_back(std::arg(h));
    ph = unwrap(std::move(ph));
    // rad per symbol; reported as the observed rotation frequency, same sense as the coarse estimate
    const double slope = ls_slope(est.block_positions, ph);
    r.residual_freq_hz = slope / (2.0 * kPi * symbol_period);
    r.mean_residual_phase_deg = std::abs(slope * est.correction_interval) * 180.0 / kPi;
    return r;
}

double segment_residual_phase_deg(std::span<const Complex> equalized, std::span<const Complex> decisions,
                                  double correction_interval)
{
    if (equalized.size() != decisions.size())
        throw std::invalid_argument("segment_residual_phase_deg: length mismatch");
    if (equalized.size() < 2) return 0.0;
    std::vector<double> idx, ph;
    for (std::size_t i = 0; i < equalized.size(); ++i) {
        const Complex z = equalized[i] * std::conj(decisions[i]);
        if (z == Complex{}) continue;
        idx.push_back(static_cast<double>(i));
        ph.push_back(std::arg(z));
    }
    return ls_slope(idx, ph) * correction_interval * 180.0 / kPi;
}

std::string to_string(RxStatus s)
{
    switch (s) {
    case RxStatus::ok: return "ok";
    case RxStatus::no_training: return "no_training";
    case RxStatus::no_frame: return "no_frame";
    case RxStatus::truncated: return "truncated";
    case RxStatus::unequalizable: return "unequalizable";
    case RxStatus::crc_fail: return "crc_fail";
    }
    return "unknown";
}

RxResult receive_frame(const ComplexBuffer& buf, const FrameConfig& cfg, const DetectorConfig& det)
{
    ReceiverConfig rx;
    rx.detector = det;
    return receive_frame(buf, cfg, rx);
}

RxResult receive_frame(const ComplexBuffer& buf, const FrameConfig& cfg, const ReceiverConfig& rx)
{
    cfg.validate();
    rx.pulse.validate();
    RxResult res;
    const int l = rx.pulse.interpolation;
    const FrameTables tables = make_frame_tables(cfg);
    const auto m = static_cast<std::size_t>(cfg.training_rep_len);
    if (buf.size() < 2 * m * static_cast<std::size_t>(l)) return res;

    ComplexBuffer scaled = buf;
    if (rx.use_agc) {
        AgcConfig a;
        a.target_power = 1.0 / l;
        a.loop_gain = rx.agc_loop_gain;
        a.hold_after = static_cast<std::size_t>(cfg.training_symbols()) * static_cast<std::size_t>(l);
        const double g = run_agc(buf, a).final_gain;
        SymbolVector v = buf.samples();
        for (Complex& z : v) z *= g;
        scaled = ComplexBuffer(std::move(v), buf.sample_period());
    }

    // Timing: the sampling phase with the largest matched-filter output energy.
    const std::vector<double> taps = design_srrc(rx.pulse);
    const SymbolVector full = matched_filter(scaled.samples(), taps);
    std::vector<double> energy(static_cast<std::size_t>(l), 0.0);
    for (std::size_t i = 0; i < full.size(); ++i) energy[i % static_cast<std::size_t>(l)] += std::norm(full[i]);
    res.timing_phase = static_cast<int>(std::max_element(energy.begin(), energy.end()) - energy.begin());
    SymbolVector sym;
    sym.reserve(full.size() / static_cast<std::size_t>(l) + 1);
    for (std::size_t i = static_cast<std::size_t>(res.timing_phase); i < full.size(); i += static_cast<std::size_t>(l))
        sym.push_back(full[i]);
    if (sym.size() < 2 * m) return res;

    const double t_sym = rx.pulse.symbol_period;
    const AutocorrelationMetric metric = autocorrelation_metric(sym, m);
    res.coarse = detect_training(metric, rx.detector, m, static_cast<double>(m) * t_sym);
    if (!res.coarse) return res;

    const ComplexBuffer corrected = nco_correct(ComplexBuffer(std::move(sym), t_sym), res.coarse->delta_f_est);

    const auto ng = static_cast<std::size_t>(cfg.golay_len);
    const std::size_t search_begin = res.coarse->detect_index + 1;
    const std::size_t search_end = res.coarse->detect_index + 2 * ng + m + 1;
    res.frame = golay_frame_detect(corrected.samples(), tables.golay, rx.detector, search_begin, search_end);
    if (!res.frame) {
        res.status = RxStatus::no_frame;
        return res;
    }

    ParsedFrame parsed;
    try {
        parsed = parse_frame(corrected.samples(), cfg, res.frame->payload_start);
    } catch (const TruncatedFrame&) {
        res.status = RxStatus::truncated;
        return res;
    }

    const FrameLayout lay = compute_layout(cfg);
    const std::size_t payload_base = lay.preamble_span.end;
    ChannelEstimate& est = res.estimate;
    est.correction_interval = static_cast<double>(cfg.payload_symbols) / cfg.lambda_p;

    const Constellation c = build_constellation(cfg.modulation);
    std::vector<SymbolVector> eq_blocks;
    for (std::size_t i = 0; i < parsed.pilot_blocks.size(); ++i) {
        const Complex h = estimate_channel(parsed.pilot_blocks[i], tables.pilots);
        est.h_blocks.push_back(h);
        est.block_positions.push_back(static_cast<double>(lay.pilot_spans[i].begin - payload_base) +
                                      0.5 * static_cast<double>(lay.pilot_spans[i].size() - 1));
        try {
            eq_blocks.push_back(equalize_block(parsed.data_blocks[i], h, rx.h_min));
        } catch (const UnequalizableBlock&) {
            res.status = RxStatus::unequalizable;
            return res;
        }
    }
    est.residual_freq_hz = residual_offset(est, t_sym).residual_freq_hz;

    for (const SymbolVector& blk : eq_blocks) {
        const SymbolVector dec = hard_decisions(blk, c);
        est.residual_phase_per_block.push_back(segment_residual_phase_deg(blk, dec, est.correction_interval));
        res.equalized.insert(res.equalized.end(), blk.begin(), blk.end());
        res.decisions.insert(res.decisions.end(), dec.begin(), dec.end());
    }

    const Bytes wire = bits_to_bytes(demap_symbols(res.equalized, c));
    res.payload = payload_from_wire(wire);
    res.status = crc_check(*res.payload) ? RxStatus::ok : RxStatus::crc_fail;
    return res;
}

}  // namespace pilotlink
