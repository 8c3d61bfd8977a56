#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mpqa/matrix.hpp"
#include "mpqa/params.hpp"

namespace mpqa {

struct CheckpointError : std::runtime_error {
  explicit CheckpointError(const std::string& what) : std::runtime_error(what) {}
};

using CheckpointEntries = std::vector<std::pair<std::string, Matrix>>;

/// Binary tensor archive: magic "MPQACKP1", u64 entry count, then per entry
/// u32 name length + name bytes + u32 rows + u32 cols + rows*cols float64.
/// Integers and doubles are little-endian; values round-trip bit-exactly.
void save_checkpoint(const std::string& path, const CheckpointEntries& entries);
CheckpointEntries load_checkpoint(const std::string& path);

/// Saves every parameter in creation order.
void save_params(const std::string& path, const ParameterStore& store);

/// Loads values into an existing store. Every file entry must match a known
/// parameter with the same shape and every parameter must be present in the
/// file, otherwise CheckpointError.
void load_params(const std::string& path, ParameterStore& store);

}  // namespace mpqa
