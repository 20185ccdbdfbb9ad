#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace uwpde::cli {

namespace fs = std::filesystem;

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

struct RunManifest {
    std::vector<fs::path> inputs;
    fs::path out_dir;
    /// Preset name; ignored when config is set.
    std::string pipeline;
    fs::path config;
    std::vector<std::pair<std::string, std::string>> overrides;
    int bit_depth = 8;
    int jobs = 1;
};

/// Writes <stem>.<pipeline>.png plus .report.csv and .trace.csv per input,
/// and enhance_summary.csv. Returns non-zero iff any image failed.
int cmd_enhance(const RunManifest& manifest, std::ostream& out, std::ostream& err);

/// Histogram CSV at `out_csv`, plot at the same path with a .png extension.
int cmd_analyze(const fs::path& input, const fs::path& out_csv, std::ostream& out, std::ostream& err);

/// compare.csv with one baseline row plus one row per pipeline for each
/// image, and <stem>.montage.png per image.
int cmd_compare(const std::vector<fs::path>& inputs, const std::vector<std::string>& pipelines,
                const fs::path& out_dir, int jobs, std::ostream& out, std::ostream& err,
                const std::vector<std::pair<std::string, std::string>>& overrides = {});

int cmd_presets(const std::string& dump_name, std::ostream& out, std::ostream& err);

int cmd_seed_corpus(const fs::path& out_dir, std::ostream& out, std::ostream& err);

/// Splits KEY=VALUE; throws InvalidConfig when '=' is missing.
std::pair<std::string, std::string> parse_assignment(const std::string& text);

}  // namespace uwpde::cli
