#pragma once

#include <iosfwd>
#include <string>

#include "explore/gnn/network.hpp"

namespace explore::gnn {

/// Binary checkpoint layout (all integers little-endian):
///   magic   "XGNNCKPT" (8 bytes)
///   u32     format version (1)
///   u32     layer kind (0 = GCN, 1 = GG-NN)
///   u32     hidden width
///   u32     propagation steps
///   u32     tensor count
///   per tensor:
///     u32   name length, then name bytes
///     u32   ndim, then u64 dims (row-major)
///     f64   data, row-major little-endian
/// Round-trips are bit-exact.
void save_checkpoint(const PolicyParameters& params, std::ostream& os);
PolicyParameters load_checkpoint(std::istream& is);

void save_checkpoint_file(const PolicyParameters& params, const std::string& path);
PolicyParameters load_checkpoint_file(const std::string& path);

}  // namespace explore::gnn
