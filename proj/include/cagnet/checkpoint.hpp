#pragma once

#include <span>
#include <string>
#include <vector>

#include "cagnet/tensor.hpp"

namespace cagnet {

// Flat text checkpoint, one parameter per record. Values are written as C99
// hex floats so the round-trip is bit-exact.
//
//   cagnet.checkpoint.v1
//   # <metadata lines, optional>
//   param <name> <rank> <dim...> <count>
//   <values, hexfloat, space separated, wrapped>
void save_checkpoint(const std::string& path, std::span<Parameter* const> params,
                     const std::vector<std::string>& metadata = {});

// Loads into an existing parameter set; every named parameter in the file
// must exist with a matching shape and vice versa. Returns metadata lines.
std::vector<std::string> load_checkpoint(const std::string& path,
                                         std::span<Parameter* const> params);

}  // namespace cagnet
