#include "sdnc/memory.hpp"

#include <cassert>
#include <string>

namespace sdnc {

WriteOnceMemory::WriteOnceMemory(std::size_t key_width, std::size_t value_width)
    : d_k_(key_width), d_v_(value_width) {
    if (key_width < 1 || value_width < 1) {
        throw ShapeError("memory track widths must be >= 1");
    }
}

std::size_t WriteOnceMemory::append(const DenseVector& key, const DenseVector& value) {
    if (sealed_) throw SealedMemory("append to sealed memory");
    if (key.size() != d_k_) {
        throw ShapeError("key length " + std::to_string(key.size()) + ", track width " +
                         std::to_string(d_k_));
    }
    if (value.size() != d_v_) {
        throw ShapeError("value length " + std::to_string(value.size()) + ", track width " +
                         std::to_string(d_v_));
    }
    keys_.insert(keys_.end(), key.data.begin(), key.data.end());
    values_.insert(values_.end(), value.data.begin(), value.data.end());
    return count_++;
}

std::span<const double> WriteOnceMemory::key_row(std::size_t i) const {
    if (i >= count_) throw IndexError("key row " + std::to_string(i));
    return {keys_.data() + i * d_k_, d_k_};
}

std::span<const double> WriteOnceMemory::value_row(std::size_t i) const {
    if (i >= count_) throw IndexError("value row " + std::to_string(i));
    return {values_.data() + i * d_v_, d_v_};
}

DenseVector content_logits(const WriteOnceMemory& mem, const DenseVector& query, double scale) {
    if (mem.size() == 0) throw EmptyMemory("read from empty memory");
    if (query.size() != mem.key_width()) {
        throw ShapeError("query length " + std::to_string(query.size()) + ", key width " +
                         std::to_string(mem.key_width()));
    }
    assert(scale > 0.0);
    DenseVector logits(mem.size());
    for (std::size_t j = 0; j < mem.size(); ++j) {
        logits[j] = scale * dot(mem.key_row(j), query.span());
    }
    return logits;
}

ReadResult content_read(const WriteOnceMemory& mem, const DenseVector& query, double scale) {
    DenseVector logits = content_logits(mem, query, scale);
    SimplexVector weights = softmax_stable(logits);
    DenseVector readout(mem.value_width());
    for (std::size_t j = 0; j < mem.size(); ++j) {
        axpy(weights[j], mem.value_row(j), readout.span());
    }
    return ReadResult{std::move(weights), std::move(readout)};
}

}  // namespace sdnc
