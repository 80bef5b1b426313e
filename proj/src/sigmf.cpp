// SPDX-License-Identifier: Apache-2.0
#include "pilotlink/sigmf.hpp"

#include "pilotlink/config_file.hpp"

#include <cmath>
#include <stdexcept>

namespace pilotlink {

namespace {

using json = nlohmann::ordered_json;

// JSON has no inf/nan; those go out as strings.
json real_value(double v)
{
    if (std::isfinite(v)) return v;
    return format_double(v);
}

double read_real(const json& v, const std::string& name)
{
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        const std::string s = v.get<std::string>();
        if (s == "inf" || s == "-inf" || s == "nan") return parse_double(s);
    }
    throw std::invalid_argument("field '" + name + "' must be a number");
}

const json& require(const json& obj, const std::string& key, const std::string& where)
{
    if (!obj.is_object() || !obj.contains(key))
        throw std::invalid_argument("missing field '" + key + "' in " + where);
    return obj.at(key);
}

std::optional<double> optional_real(const json& obj, const std::string& key)
{
    const json& v = require(obj, key, "global");
    if (v.is_null()) return std::nullopt;
    return read_real(v, key);
}

bool same_real(double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); }

}  // namespace

bool SigmfAnnotation::operator==(const SigmfAnnotation& o) const
{
    if (sample_start != o.sample_start || sample_count != o.sample_count || label != o.label) return false;
    if (values.size() != o.values.size()) return false;
    for (auto a = values.begin(), b = o.values.begin(); a != values.end(); ++a, ++b)
        if (a->first != b->first || !same_real(a->second, b->second)) return false;
    return true;
}

const std::vector<std::string>& sigmf_required_global_fields()
{
    static const std::vector<std::string> f = {
        "core:datatype",         "core:sample_rate",      "core:version",
        "core:description",      "experiment:modulation", "experiment:pilot_repetitions",
        "experiment:altitude",   "experiment:link_distance", "experiment:environment",
    };
    return f;
}

std::string run_id(const TrialResult& t)
{
    return t.profile.name + "_l" + std::to_string(t.frame_cfg.lambda_p) + "_" +
           modulation_name(t.frame_cfg.modulation) + "_t" + std::to_string(t.trial);
}

SigmfRecord make_sigmf_record(const TrialResult& t, const SigmfEnvironment& env, double sample_rate,
                              const std::vector<std::uint64_t>& frame_offsets)
{
    SigmfRecord rec;
    rec.sample_rate = sample_rate;
    rec.description = "simulated burst link, run " + run_id(t);
    rec.modulation = modulation_name(t.frame_cfg.modulation);
    rec.pilot_repetitions = t.frame_cfg.lambda_p;
    rec.altitude = env.altitude_m;
    rec.link_distance = env.link_distance_m;
    rec.environment = env.environment;
    for (const auto& [k, v] : to_key_values(t.profile, "channel.")) rec.parameters[k] = v;
    for (const auto& [k, v] : to_key_values(t.frame_cfg, "frame.")) rec.parameters[k] = v;
    rec.parameters["run.seed"] = std::to_string(t.seed);
    rec.parameters["run.trial"] = std::to_string(t.trial);
    rec.parameters["run.frames_sent"] = std::to_string(t.frames_sent);

    if (frame_offsets.empty()) {
        rec.captures.push_back({0, "frame 0"});
    } else {
        for (std::size_t i = 0; i < frame_offsets.size(); ++i)
            rec.captures.push_back({frame_offsets[i], "frame " + std::to_string(i)});
    }

    SigmfAnnotation a;
    a.sample_start = 0;
    a.sample_count = static_cast<std::uint64_t>(std::llround(t.duration_s * sample_rate));
    a.label = "trial_metrics";
    a.values = {
        {"frames_sent", static_cast<double>(t.frames_sent)},
        {"frames_detected", static_cast<double>(t.frames_detected)},
        {"crc_pass", static_cast<double>(t.crc_pass)},
        {"goodput_bps", t.goodput_bps},
        {"throughput_bps", t.throughput_bps},
        {"evm_percent", t.evm_percent},
        {"sinr_db", t.sinr_db},
        {"mean_residual_phase_deg", t.mean_residual_phase_deg},
    };
    rec.annotations.push_back(std::move(a));
    return rec;
}

json to_json(const SigmfRecord& rec)
{
    json global = json::object();
    global["core:datatype"] = rec.datatype;
    global["core:sample_rate"] = rec.sample_rate;
    global["core:version"] = rec.version;
    global["core:description"] = rec.description;
    global["core:extensions"] = json::array({{{"name", "experiment"}, {"version", "1.0.0"}, {"optional", true}}});
    global["experiment:modulation"] = rec.modulation;
    global["experiment:pilot_repetitions"] = rec.pilot_repetitions;
    global["experiment:altitude"] = rec.altitude ? json(*rec.altitude) : json(nullptr);
    global["experiment:link_distance"] = rec.link_distance ? json(*rec.link_distance) : json(nullptr);
    global["experiment:environment"] = rec.environment;
    json params = json::object();
    for (const auto& [k, v] : rec.parameters) params[k] = v;
    global["experiment:parameters"] = params;

    json captures = json::array();
    for (const auto& c : rec.captures) captures.push_back({{"core:sample_start", c.sample_start}, {"core:comment", c.comment}});

    json annotations = json::array();
    for (const auto& a : rec.annotations) {
        json o = {{"core:sample_start", a.sample_start}, {"core:sample_count", a.sample_count}, {"core:label", a.label}};
        for (const auto& [k, v] : a.values) o["experiment:" + k] = real_value(v);
        annotations.push_back(o);
    }
    return json{{"global", global}, {"captures", captures}, {"annotations", annotations}};
}

SigmfRecord sigmf_from_json(const json& doc)
{
    if (!doc.is_object()) throw std::invalid_argument("document is not a JSON object");
    const json& g = require(doc, "global", "document");
    SigmfRecord rec;
    auto str = [&](const std::string& key) {
        const json& v = require(g, key, "global");
        if (!v.is_string()) throw std::invalid_argument("field '" + key + "' must be a string");
        return v.get<std::string>();
    };
    rec.datatype = str("core:datatype");
    rec.sample_rate = read_real(require(g, "core:sample_rate", "global"), "core:sample_rate");
    rec.version = str("core:version");
    rec.description = str("core:description");
    rec.modulation = str("experiment:modulation");
    const json& reps = require(g, "experiment:pilot_repetitions", "global");
    if (!reps.is_number_integer()) throw std::invalid_argument("field 'experiment:pilot_repetitions' must be an integer");
    rec.pilot_repetitions = reps.get<int>();
    rec.altitude = optional_real(g, "experiment:altitude");
    rec.link_distance = optional_real(g, "experiment:link_distance");
    rec.environment = str("experiment:environment");
    if (g.contains("experiment:parameters"))
        for (const auto& [k, v] : g.at("experiment:parameters").items()) rec.parameters[k] = v.get<std::string>();

    for (const auto& c : require(doc, "captures", "document")) {
        SigmfCapture cap;
        cap.sample_start = require(c, "core:sample_start", "capture").get<std::uint64_t>();
        if (c.contains("core:comment")) cap.comment = c.at("core:comment").get<std::string>();
        rec.captures.push_back(cap);
    }
    for (const auto& a : require(doc, "annotations", "document")) {
        SigmfAnnotation ann;
        ann.sample_start = require(a, "core:sample_start", "annotation").get<std::uint64_t>();
        ann.sample_count = require(a, "core:sample_count", "annotation").get<std::uint64_t>();
        if (a.contains("core:label")) ann.label = a.at("core:label").get<std::string>();
        for (const auto& [k, v] : a.items())
            if (k.starts_with("experiment:")) ann.values[k.substr(11)] = read_real(v, k);
        rec.annotations.push_back(std::move(ann));
    }
    return rec;
}

std::vector<std::string> validate_sigmf(const json& doc)
{
    std::vector<std::string> problems;
    if (!doc.is_object()) return {"document is not a JSON object"};
    if (!doc.contains("global") || !doc.at("global").is_object()) return {"missing field 'global'"};
    const json& g = doc.at("global");
    for (const auto& f : sigmf_required_global_fields())
        if (!g.contains(f)) problems.push_back("missing field '" + f + "'");
    for (const char* k : {"captures", "annotations"})
        if (!doc.contains(k) || !doc.at(k).is_array()) problems.push_back(std::string("missing field '") + k + "'");
    if (problems.empty()) {
        try {
            const SigmfRecord rec = sigmf_from_json(doc);
            if (rec.datatype != "cf32_le") problems.push_back("core:datatype must be cf32_le");
        } catch (const std::exception& e) {
            problems.push_back(e.what());
        }
    }
    return problems;
}

}  // namespace pilotlink
