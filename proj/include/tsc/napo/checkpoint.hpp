#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "tsc/nn/tensor.hpp"

namespace tsc::napo {

/// Binary checkpoint: magic, format version, JSON header, then the named
/// f64 arrays back to back and an FNV-1a checksum of the array bytes.
struct Checkpoint {
  nlohmann::json header;                                // caller-defined metadata
  std::vector<std::pair<std::string, nn::Mat>> arrays;  // in file order

  const nn::Mat& array(const std::string& name) const;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Writes to `path`.tmp then renames over `path`.
void write_checkpoint(const std::string& path, const Checkpoint& ckpt);
/// Throws ValidationError on a missing file, bad magic, version, truncation
/// or checksum mismatch.
Checkpoint read_checkpoint(const std::string& path);

}  // namespace tsc::napo
