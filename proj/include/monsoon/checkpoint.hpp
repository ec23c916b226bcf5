#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "monsoon/tensor.hpp"

namespace monsoon {

struct Checkpoint {
  nlohmann::json config;
  std::vector<NamedTensor> params;
};

// Single-file format: magic + format version, a JSON manifest (parameter
// names, shapes, dtype, byte counts, embedded config), then the raw buffers
// as little-endian float64 in manifest order. Round-trips bitwise.
void save_checkpoint(const std::vector<NamedTensor>& params, const nlohmann::json& config,
                     const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

// Copies checkpoint parameters into an existing parameter set; any name or
// shape disagreement is a VersionMismatch.
void load_into(std::vector<NamedTensor>& dst, const Checkpoint& checkpoint);

}  // namespace monsoon
