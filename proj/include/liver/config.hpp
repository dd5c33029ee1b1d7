#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "liver/sweep.hpp"

namespace liver {

/// Invalid configuration text. what() reads "source:line:column: message".
class ConfigError : public Error {
public:
    ConfigError(const std::string& source, int line, int column, const std::string& message);
    int line;
    int column;
};

/// Parses a YAML run configuration. Sections and keys are listed by
/// dump_config(RunConfig{}); unknown keys are errors. A run manifest written
/// by the CLI is accepted too, in which case its embedded config is used.
/// With strict = false the schedule timing chain and the cross-section checks
/// are skipped, for tools that report on them instead.
RunConfig parse_config(const std::string& text, const std::string& source = "<config>", bool strict = true);
RunConfig load_config(const std::string& path, bool strict = true);

/// Canonical YAML of every setting, with a short comment per key.
/// Round-trips: dump_config(parse_config(dump_config(c))) == dump_config(c).
std::string dump_config(const RunConfig& config);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

} // namespace liver
