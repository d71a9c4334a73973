#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>

#include "policy/policy.hpp"

namespace dpa::policy {

// Binary layout (little endian):
//   "DPAGCKPT" | u32 version | u32 num_slots | u32 head count
//   per head: u8 role | u8 head id | u32 rows | u32 cols | f64[rows*cols]
inline constexpr std::uint32_t kCheckpointVersion = 1;

std::string encode_checkpoint(const PolicyParams& params, std::size_t num_slots);
PolicyParams decode_checkpoint(std::string_view bytes, std::size_t* num_slots = nullptr);

// One line per entry: "<head> <row> <col> <value>" with round-trip precision.
std::string checkpoint_text(const PolicyParams& params);

void save_checkpoint(const std::filesystem::path& path, const PolicyParams& params, std::size_t num_slots);
PolicyParams load_checkpoint(const std::filesystem::path& path, std::size_t* num_slots = nullptr);

}  // namespace dpa::policy
