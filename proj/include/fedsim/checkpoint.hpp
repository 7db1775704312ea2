/**
 * Copyright 2026 The fedsim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef FEDSIM_CHECKPOINT_HPP
#define FEDSIM_CHECKPOINT_HPP

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "fedsim/context.hpp"

namespace fedsim {

inline constexpr std::uint16_t kCheckpointVersion = 1;

struct Checkpoint {
  FLContext context;
  std::uint64_t config_digest = 0;
};

// Layout, all integers and reals little-endian:
//   "MFCK" | u16 version | u64 digest | u64 seed | i64 round
//   u32 layers, then (i64 rows, i64 cols) per layer
//   u64 n, then n x f64 parameter values
//   u64 records, then per record:
//     i64 round | u64 m | m x i32 ids | f64 accuracy | f64 loss
//     i64 sample_count | i64 bytes_up | i64 bytes_down | f64 wall_time
//   u64 FNV-1a of every preceding byte
std::vector<unsigned char> encode_checkpoint(const FLContext& ctx, std::uint64_t config_digest);

/// Throws FormatError on bad magic, unknown version, truncation, trailing
/// bytes or checksum mismatch.
Checkpoint decode_checkpoint(std::span<const unsigned char> bytes);

/// Writes through a temporary file and renames it into place.
void save_checkpoint(const std::filesystem::path& path, const FLContext& ctx, std::uint64_t config_digest);

Checkpoint load_checkpoint(const std::filesystem::path& path);

/// load_checkpoint plus a digest check; DigestMismatchError on mismatch.
FLContext resume_checkpoint(const std::filesystem::path& path, std::uint64_t expected_digest);

}  // namespace fedsim

#endif  // FEDSIM_CHECKPOINT_HPP
