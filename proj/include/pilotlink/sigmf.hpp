// SPDX-License-Identifier: Apache-2.0
//
// SigMF-style metadata for simulated captures. Experiment parameters live in
// the "experiment:" namespace of the global object.
#pragma once

#include "pilotlink/metrics.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace pilotlink {

struct SigmfEnvironment {
    std::optional<double> altitude_m;
    std::optional<double> link_distance_m;
    std::string environment = "simulated";
};

struct SigmfCapture {
    std::uint64_t sample_start = 0;
    std::string comment;
    bool operator==(const SigmfCapture&) const = default;
};

struct SigmfAnnotation {
    std::uint64_t sample_start = 0;
    std::uint64_t sample_count = 0;
    std::string label;
    std::map<std::string, double> values;   // non-finite values allowed

    bool operator==(const SigmfAnnotation& o) const;
};

struct SigmfRecord {
    std::string datatype = "cf32_le";
    double sample_rate = 0.0;
    std::string version = "1.0.0";
    std::string description;
    std::string modulation;
    int pilot_repetitions = 0;
    std::optional<double> altitude;
    std::optional<double> link_distance;
    std::string environment;
    std::map<std::string, std::string> parameters;   // channel and run parameters, as text
    std::vector<SigmfCapture> captures;
    std::vector<SigmfAnnotation> annotations;

    bool operator==(const SigmfRecord&) const = default;
};

/// Fields every document must carry in its global object.
const std::vector<std::string>& sigmf_required_global_fields();

/// Record for one trial. frame_offsets (sample index of each received
/// frame buffer in a capture) become captures; without them a single
/// capture at sample 0 is emitted.
SigmfRecord make_sigmf_record(const TrialResult& trial, const SigmfEnvironment& env, double sample_rate,
                              const std::vector<std::uint64_t>& frame_offsets = {});

nlohmann::ordered_json to_json(const SigmfRecord& rec);
/// Throws std::invalid_argument naming the first missing or mistyped field.
SigmfRecord sigmf_from_json(const nlohmann::ordered_json& doc);

/// Problems found in a document; empty when valid.
std::vector<std::string> validate_sigmf(const nlohmann::ordered_json& doc);

/// "<profile>_l<lambda>_<mod>_t<trial>"
std::string run_id(const TrialResult& trial);

}  // namespace pilotlink
