// SPDX-License-Identifier: Apache-2.0
#include "pilotlink/config_file.hpp"

#include "pilotlink/metrics.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

namespace pilotlink {

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

long parse_long(const std::string& key, const std::string& v)
{
    try {
        std::size_t used = 0;
        const long x = std::stol(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError(key + ": expected an integer, got '" + v + "'");
    }
}

int parse_int(const std::string& key, const std::string& v) { return static_cast<int>(parse_long(key, v)); }

double parse_real(const std::string& key, const std::string& v)
{
    try {
        return parse_double(v);
    } catch (const std::exception&) {
        throw ConfigError(key + ": expected a number, got '" + v + "'");
    }
}

std::uint64_t parse_u64(const std::string& key, const std::string& v)
{
    try {
        std::size_t used = 0;
        const unsigned long long x = std::stoull(v, &used, 0);
        if (used != v.size() || v.starts_with('-')) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError(key + ": expected an unsigned integer, got '" + v + "'");
    }
}

}  // namespace

std::vector<std::string> split_list(const std::string& v)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= v.size()) {
        const auto comma = v.find(',', start);
        const std::string item = trim(v.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
        if (!item.empty()) out.push_back(item);
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

std::optional<double> parse_optional_double(const std::string& v)
{
    if (v == "inf" || v == "infinite") return std::nullopt;
    return parse_double(v);
}

KeyValues parse_key_values(std::istream& in)
{
    KeyValues kv;
    std::set<std::string> seen;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        if (!seen.insert(key).second)
            throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
        kv.emplace_back(std::move(key), std::move(value));
    }
    return kv;
}

KeyValues load_key_values(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return parse_key_values(in);
}

void write_key_values(std::ostream& out, const KeyValues& kv, const std::string& line_prefix)
{
    for (const auto& [k, v] : kv) out << line_prefix << k << " = " << v << '\n';
}

KeyValues to_key_values(const FrameConfig& cfg, const std::string& prefix)
{
    return {
        {prefix + "lambda_p", std::to_string(cfg.lambda_p)},
        {prefix + "payload_symbols", std::to_string(cfg.payload_symbols)},
        {prefix + "pilot_block_len", std::to_string(cfg.pilot_block_len)},
        {prefix + "training_rep_len", std::to_string(cfg.training_rep_len)},
        {prefix + "training_reps", std::to_string(cfg.training_reps)},
        {prefix + "golay_len", std::to_string(cfg.golay_len)},
        {prefix + "modulation", modulation_name(cfg.modulation)},
        {prefix + "crc_bits", std::to_string(cfg.crc_bits)},
    };
}

KeyValues to_key_values(const ChannelProfile& p, const std::string& prefix)
{
    return {
        {prefix + "name", p.name},
        {prefix + "delta_f_hz", format_double(p.delta_f_hz)},
        {prefix + "drift_hz_per_s", format_double(p.drift_hz_per_s)},
        {prefix + "drift_walk_sigma_hz", format_double(p.drift_walk_sigma_hz)},
        {prefix + "theta_in", format_double(p.theta_in)},
        {prefix + "snr_db", p.snr_db ? format_double(*p.snr_db) : "inf"},
        {prefix + "coherence_symbols", p.coherence_symbols ? std::to_string(*p.coherence_symbols) : "inf"},
        {prefix + "fading", fading_name(p.fading)},
        {prefix + "rician_k", format_double(p.rician_k)},
        {prefix + "delay_spread_s", format_double(p.delay_spread_s)},
        {prefix + "seed", std::to_string(p.seed)},
    };
}

bool apply_key(FrameConfig& cfg, const std::string& key, const std::string& v)
{
    if (key == "lambda_p") cfg.lambda_p = parse_int(key, v);
    else if (key == "payload_symbols") cfg.payload_symbols = parse_int(key, v);
    else if (key == "pilot_block_len") cfg.pilot_block_len = parse_int(key, v);
    else if (key == "training_rep_len") cfg.training_rep_len = parse_int(key, v);
    else if (key == "training_reps") cfg.training_reps = parse_int(key, v);
    else if (key == "golay_len") cfg.golay_len = parse_int(key, v);
    else if (key == "crc_bits") cfg.crc_bits = parse_int(key, v);
    else if (key == "modulation") {
        try {
            cfg.modulation = parse_modulation(v);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(key + ": " + e.what());
        }
    } else return false;
    return true;
}

bool apply_key(ChannelProfile& p, const std::string& key, const std::string& v)
{
    if (key == "name") p.name = v;
    else if (key == "delta_f_hz") p.delta_f_hz = parse_real(key, v);
    else if (key == "drift_hz_per_s") p.drift_hz_per_s = parse_real(key, v);
    else if (key == "drift_walk_sigma_hz") p.drift_walk_sigma_hz = parse_real(key, v);
    else if (key == "theta_in") p.theta_in = parse_real(key, v);
    else if (key == "snr_db") {
        if (v == "inf" || v == "infinite") p.snr_db.reset();
        else p.snr_db = parse_real(key, v);
    } else if (key == "coherence_symbols") {
        if (v == "inf" || v == "infinite") p.coherence_symbols.reset();
        else p.coherence_symbols = parse_long(key, v);
    } else if (key == "fading") {
        try {
            p.fading = parse_fading(v);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(key + ": " + e.what());
        }
    } else if (key == "rician_k") p.rician_k = parse_real(key, v);
    else if (key == "delay_spread_s") p.delay_spread_s = parse_real(key, v);
    else if (key == "seed") p.seed = parse_u64(key, v);
    else return false;
    return true;
}

FrameConfig frame_config_from(const KeyValues& kv, const std::string& prefix)
{
    FrameConfig cfg;
    for (const auto& [k, v] : kv) {
        if (!k.starts_with(prefix)) continue;
        const std::string key = k.substr(prefix.size());
        if (key.find('.') != std::string::npos) continue;
        apply_key(cfg, key, v);
    }
    return cfg;
}

ChannelProfile channel_profile_from(const KeyValues& kv, const std::string& name)
{
    ChannelProfile p;
    p.name = name;
    const std::string prefix = name + ".";
    for (const auto& [k, v] : kv) {
        if (!k.starts_with(prefix)) continue;
        const std::string key = k.substr(prefix.size());
        if (key == "name") {
            if (v != name) throw ConfigError(k + ": a profile's name comes from its key prefix");
            continue;
        }
        if (!apply_key(p, key, v)) throw ConfigError("unknown profile key '" + k + "'");
    }
    return p;
}

}  // namespace pilotlink
