#pragma once

#include <filesystem>
#include <vector>

#include "imtl/mtl/model.hpp"

namespace imtl::mtl {

/// Checkpoint layout (all integers and floats little-endian):
///   "IMTLCKPT"  u32 version (=1)  u32 model_count
///   per model:
///     u32 variant  u32 tier  u64 x 9 widths (state, shared_hidden, shared_out,
///     task_hidden, latent, action, decoder_hidden, decoder_layers, heads)
///     u8 use_attention  u8 use_flag  f64 width_scale
///     u32 task_count, per task: u32 name_len, name bytes, u64 d_s, d_a, d_e
///     u64 parameter_count, then f64 values in declaration order
/// A multi-task run stores one model; a single-task run stores one per task.
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const std::filesystem::path& path, std::vector<MultiTaskModel>& models);
std::vector<MultiTaskModel> load_checkpoint(const std::filesystem::path& path);

}  // namespace imtl::mtl
