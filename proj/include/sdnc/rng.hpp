#pragma once

#include <cstdint>
#include <random>

#include "sdnc/linalg.hpp"

namespace sdnc {

// Seeded generator with a fixed uniform mapping. std::uniform_real_distribution
// is implementation-defined, so the 53-bit mapping is done by hand here: the
// same seed yields the same stream on every platform.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double uniform(double lo, double hi) {
        double u = static_cast<double>(gen_() >> 11) * 0x1.0p-53;
        return lo + (hi - lo) * u;
    }

    std::uint64_t next_u64() { return gen_(); }

  private:
    std::mt19937_64 gen_;
};

inline DenseVector random_vector(Rng& rng, std::size_t n, double lo, double hi) {
    DenseVector v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = rng.uniform(lo, hi);
    return v;
}

// Row-major fill order; part of the seeded-generation contract.
inline DenseMatrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols, double lo,
                                 double hi) {
    DenseMatrix m(rows, cols);
    for (std::size_t i = 0; i < m.data.size(); ++i) m.data[i] = rng.uniform(lo, hi);
    return m;
}

}  // namespace sdnc
