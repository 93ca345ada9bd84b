#pragma once

// Hand-derived reverse pass for the batched causal attention computation,
// plus the central-finite-difference harness that checks it. The loss under
// differentiation is the scalar L = sum_{t,i} upstream[t,i] * Z[t,i], which
// makes `upstream` exactly dL/dZ.

#include <cstddef>
#include <string>
#include <vector>

#include "sdnc/equivalence.hpp"

namespace sdnc {

struct GradientBundle {
    DenseMatrix d_x;                  // T x d_model
    std::vector<DenseMatrix> d_w_q;   // per head, d_model x d_k
    std::vector<DenseMatrix> d_w_k;   // per head, d_model x d_k
    std::vector<DenseMatrix> d_w_v;   // per head, d_model x d_v
    DenseMatrix d_w_o;                // (H*d_v) x d_model
};

struct GradCheckReport {
    double max_rel_err = 0.0;
    std::string worst_parameter;  // e.g. "X[2,3]" or "W_Q[1][0,2]"
    double eps = 0.0;
    double threshold = 0.0;
    std::size_t probes = 0;  // how many scalar parameters were checked
    bool passed = false;
    EquivConfig config;
};

// L as defined above; shares the forward pass with causal_self_attention.
double attention_loss(const DenseMatrix& x, const LayerParams& params,
                      const DenseMatrix& upstream);

// Analytic dL/d{X, W_Q, W_K, W_V, W_O}. Heads are processed independently
// (in parallel) and their dX contributions are summed serially in head
// order, so results do not depend on thread count.
GradientBundle attention_backward(const DenseMatrix& x, const LayerParams& params,
                                  const DenseMatrix& upstream);

// Central differences (L(p+eps) - L(p-eps)) / (2 eps) against the analytic
// gradient for every scalar parameter, or for a seeded subsample of at least
// 200 entries when `samples` is nonzero and smaller than the total count.
// Relative error uses denominator max(|analytic|, |numeric|, 1e-8); the same
// 1e-8 also acts as an absolute floor: pairs that differ by at most 1e-8 —
// in particular pairs where both magnitudes are at or below 1e-8 — count as
// exact agreement, since a central difference of a 64-bit loss cannot
// resolve anything finer. Requires eps in [1e-8, 1e-3].
GradCheckReport finite_diff_check(const EquivConfig& cfg, double eps,
                                  double threshold = 1e-5, std::size_t samples = 0);

// Same check on explicit inputs instead of a seeded instance. sample_seed
// only matters when a subsample is drawn.
GradCheckReport finite_diff_check_instance(const DenseMatrix& x, const LayerParams& params,
                                           const DenseMatrix& upstream, double eps,
                                           double threshold = 1e-5, std::size_t samples = 0,
                                           std::uint64_t sample_seed = 0);

}  // namespace sdnc
