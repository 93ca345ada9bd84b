#pragma once

// Fixed binary weight files: 8-byte magic "SDNCWT01", then d_model, d_k,
// d_v, H as 32-bit little-endian unsigned integers, then the matrices
// W_Q[0..H), W_K[0..H), W_V[0..H), W_O — row-major 64-bit little-endian
// IEEE-754, no padding. The format is bit-exact: load(save(p)) == p.

#include <cstddef>
#include <string>

#include "sdnc/controller.hpp"

namespace sdnc {

// Exact byte length of a weight file with these dimensions.
std::size_t expected_weight_file_size(std::size_t d_model, std::size_t d_k, std::size_t d_v,
                                      std::size_t n_heads);

// Both throw IoError on filesystem failures; load also throws IoError on a
// bad magic, a dimension overflow, or a length that disagrees with the
// header.
void save_weights(const LayerParams& params, const std::string& path);
LayerParams load_weights(const std::string& path);

}  // namespace sdnc
