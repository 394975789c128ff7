#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "imtl/harness/run_config.hpp"

namespace imtl::cli {

/// One "key = value" entry with its source line.
struct ConfigEntry {
    std::string section;
    std::string key;
    std::string value;
    std::size_t line = 0;
};

/// Parses INI-style text: [section] headers, key = value lines, '#' or ';'
/// comments. Throws ConfigError on syntax errors or duplicate keys.
std::vector<ConfigEntry> parse_config_text(const std::string& text, const std::string& origin = "<config>");
std::vector<ConfigEntry> read_config_file(const std::filesystem::path& path);

/// Applies entries over `base`. Unknown sections or keys are rejected with a
/// ConfigError naming them.
harness::RunConfig apply_config(const std::vector<ConfigEntry>& entries, harness::RunConfig base = {});

/// Seed list syntax: "7", "1,2,5" or "1-10".
std::vector<std::uint64_t> parse_seed_list(const std::string& s);

/// Effective configuration with precedence CLI flag > IMTL_SEED > file > default.
struct ConfigSources {
    std::optional<std::filesystem::path> file;
    std::optional<std::uint64_t> cli_seed;
    std::optional<std::string> env_seed;  // value of IMTL_SEED when set
};
harness::RunConfig load_run_config(const ConfigSources& sources);

/// Every accepted key as "section.key", for documentation and tests.
std::vector<std::string> known_keys();

}  // namespace imtl::cli
