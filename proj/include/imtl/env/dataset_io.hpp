#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "imtl/env/experience_cache.hpp"

namespace imtl::env {

/// CSV: header line "d_s,d_a,d_e", then one sample per line as d_s+d_a+d_e
/// comma-separated values printed with 17 significant digits.
void write_dataset(const Dataset& data, const std::filesystem::path& path);

/// Reads a dataset CSV. When `expected` is given its dims must match the
/// header; the returned spec carries `expected`'s name (or `name`).
/// Throws IoError naming the byte offset of the first problem.
Dataset read_dataset(const std::filesystem::path& path, const std::optional<mtl::TaskSpec>& expected = std::nullopt,
                     const std::string& name = "");

/// FNV-1a 64 over the file bytes, as 16 hex digits.
std::string file_checksum(const std::filesystem::path& path);
/// FNV-1a 64 over the raw bit patterns of every value.
std::uint64_t dataset_checksum(const Dataset& data);

}  // namespace imtl::env
