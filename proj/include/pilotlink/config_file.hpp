// SPDX-License-Identifier: Apache-2.0
//
// Flat "key = value" text configuration. '#' starts a comment. Channel
// profiles use a "<name>." key prefix, e.g. "g2g.snr_db = 20".
#pragma once

#include "pilotlink/channel.hpp"
#include "pilotlink/framing.hpp"

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace pilotlink {

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

using KeyValues = std::vector<std::pair<std::string, std::string>>;

/// Parses lines in order. Throws ConfigError (with line number) on a line
/// without '=' or a repeated key.
KeyValues parse_key_values(std::istream& in);
KeyValues load_key_values(const std::string& path);

void write_key_values(std::ostream& out, const KeyValues& kv, const std::string& line_prefix = "");

/// Every key a FrameConfig / ChannelProfile understands, in canonical order.
KeyValues to_key_values(const FrameConfig& cfg, const std::string& prefix = "");
KeyValues to_key_values(const ChannelProfile& p, const std::string& prefix = "");

/// Applies one key (already stripped of its prefix). Returns false for an
/// unknown key; throws ConfigError for a malformed value.
bool apply_key(FrameConfig& cfg, const std::string& key, const std::string& value);
bool apply_key(ChannelProfile& p, const std::string& key, const std::string& value);

/// Reads "<prefix>key" entries; unknown keys under the prefix are errors.
FrameConfig frame_config_from(const KeyValues& kv, const std::string& prefix = "");
ChannelProfile channel_profile_from(const KeyValues& kv, const std::string& name);

std::optional<double> parse_optional_double(const std::string& v);   // "inf" -> nullopt
std::vector<std::string> split_list(const std::string& v);           // comma separated

}  // namespace pilotlink
