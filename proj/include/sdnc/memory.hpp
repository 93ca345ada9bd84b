#pragma once

#include <cstddef>

#include "sdnc/linalg.hpp"

namespace sdnc {

// Strictly append-only dual-track store: one key row and one value row per
// write. There is deliberately no overwrite, erase, or insert operation;
// their absence is part of the contract. Rows live in append order, so row j
// was written at timestep j+1.
//
// Concurrency: single writer. content_read is pure and may run concurrently
// with other reads, but not with an append.
class WriteOnceMemory {
  public:
    WriteOnceMemory(std::size_t key_width, std::size_t value_width);

    // Grows both tracks by one row and returns the new row's index.
    std::size_t append(const DenseVector& key, const DenseVector& value);

    std::size_t size() const { return count_; }
    std::size_t key_width() const { return d_k_; }
    std::size_t value_width() const { return d_v_; }

    // Spans are invalidated by the next append; copy to keep a snapshot.
    std::span<const double> key_row(std::size_t i) const;
    std::span<const double> value_row(std::size_t i) const;

    // A sealed store rejects any further append. Used for source-side
    // memories that are populated once and then only read.
    void seal() { sealed_ = true; }
    bool sealed() const { return sealed_; }

  private:
    std::size_t d_k_;
    std::size_t d_v_;
    std::size_t count_ = 0;
    bool sealed_ = false;
    std::vector<double> keys_;    // count_ x d_k_, row-major
    std::vector<double> values_;  // count_ x d_v_, row-major
};

struct ReadResult {
    SimplexVector weights;  // one weight per stored row
    DenseVector readout;    // weighted sum of value rows, accumulated in row order
};

// logits[j] = scale * dot(key_row(j), query), j increasing. Pure; requires a
// non-empty memory and scale > 0.
DenseVector content_logits(const WriteOnceMemory& mem, const DenseVector& query, double scale);
ReadResult content_read(const WriteOnceMemory& mem, const DenseVector& query, double scale);

}  // namespace sdnc
