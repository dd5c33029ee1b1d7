#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "liver/config.hpp"

namespace liver {

const char* version();

/// Writes through a temporary sibling and renames it into place.
void write_atomic(const std::filesystem::path& path, std::string_view content);

/// Files of one run, each hashed as it is written.
class OutputSet {
public:
    explicit OutputSet(std::filesystem::path dir);

    /// `name` is relative to the output directory.
    void write(const std::string& name, std::string_view content);
    const std::map<std::string, std::string>& hashes() const { return hashes_; }
    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path dir_;
    std::map<std::string, std::string> hashes_;
};

/// manifest.json: config snapshot, seeds, tool version, the run hash and the
/// hash of every output. The run hash covers version, command and config, so
/// two runs with the same run hash are expected to produce identical outputs.
std::string manifest_json(const std::string& command, const RunConfig& config,
                          const std::map<std::string, std::string>& outputs);
std::string run_hash(const std::string& command, const RunConfig& config);

struct SweepRun {
    SweepResult result;
    std::vector<SummaryRow> summary;
    std::map<std::string, std::string> outputs;
};

/// Runs a sweep and writes <axis>_metrics.csv, <axis>_summary.csv, one file
/// per point under points/, the optional data files under data/ and
/// manifest.json into config.output_dir.
SweepRun run_sweep_to_dir(const RunConfig& config, int jobs, std::ostream* progress = nullptr);

} // namespace liver
