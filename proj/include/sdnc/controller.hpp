#pragma once

#include <cstdint>
#include <vector>

#include "sdnc/linalg.hpp"
#include "sdnc/rng.hpp"

namespace sdnc {

// Per-head projection weights of one layer. w_q/w_k/w_v are d_model x d_k
// (resp. d_v) per head; w_o is (H*d_v) x d_model and mixes the concatenated
// per-head readouts.
struct LayerParams {
    std::size_t d_model = 0;
    std::size_t d_k = 0;
    std::size_t d_v = 0;
    std::size_t n_heads = 0;
    std::vector<DenseMatrix> w_q, w_k, w_v;
    DenseMatrix w_o;

    void validate() const;  // throws ShapeError on any shape mismatch
};

struct ProjectedToken {
    DenseVector q;  // length d_k
    DenseVector k;  // length d_k
    DenseVector v;  // length d_v
    std::size_t head = 0;
    std::size_t position = 0;
};

struct SequenceProjection {
    DenseMatrix q;  // T x d_k
    DenseMatrix k;  // T x d_k
    DenseMatrix v;  // T x d_v
};

// q = w_q[head]^T x, k = w_k[head]^T x, v = w_v[head]^T x. Pure and
// stateless: the result depends only on the arguments.
ProjectedToken project(const DenseVector& x, const LayerParams& params, std::size_t head,
                       std::size_t position = 0);

// Row t of each output equals project(X row t) bit for bit.
SequenceProjection project_sequence(const DenseMatrix& x, const LayerParams& params,
                                    std::size_t head);

// Seeded initialization: every matrix uniform on [-1/sqrt(d_model),
// +1/sqrt(d_model)], drawn in the order w_q[0..H), w_k[0..H), w_v[0..H), w_o,
// each row-major. The tied variant draws one matrix per head and uses it for
// all of w_q/w_k/w_v (requires d_k == d_v); this is the restricted
// single-track configuration where the read query coincides with the stored
// key and the key track coincides with the value track.
LayerParams make_layer_params(std::size_t d_model, std::size_t d_k, std::size_t d_v,
                              std::size_t n_heads, Rng& rng);
LayerParams make_tied_layer_params(std::size_t d_model, std::size_t d_k, std::size_t d_v,
                                   std::size_t n_heads, Rng& rng);

}  // namespace sdnc
