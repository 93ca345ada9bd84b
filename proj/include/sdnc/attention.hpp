#pragma once

#include <vector>

#include "sdnc/controller.hpp"
#include "sdnc/linalg.hpp"

namespace sdnc {

struct AttentionOutput {
    DenseMatrix z;  // T x d_model
    // One T x T_src matrix per head. Each row is a probability simplex over
    // the admissible positions; masked positions are exactly 0.
    std::vector<DenseMatrix> head_weights;
};

// Batched causal self-attention over a whole sequence. The causal mask is a
// prefix restriction: row t's softmax and value sum run over j <= t only, so
// the per-row arithmetic is the same operation sequence as an incremental
// store-then-read. Rows and heads are computed in parallel; each output
// element's reduction order is fixed, so results do not depend on the thread
// count.
AttentionOutput causal_self_attention(const DenseMatrix& x, const LayerParams& params);

// Source-side attention: queries from x_dec rows, keys/values projected once
// from enc_states, no mask. Every decoder position attends over all source
// rows.
AttentionOutput cross_attention(const DenseMatrix& x_dec, const DenseMatrix& enc_states,
                                const LayerParams& params);

// Row-wise concatenation of the per-head outputs in head order, multiplied
// by w_o.
DenseMatrix concat_heads_and_mix(const std::vector<DenseMatrix>& head_outputs,
                                 const DenseMatrix& w_o);

// Single-threaded textbook implementations, kept as the reference the
// parallel kernels are tested against (bitwise) and benchmarked against.
namespace serial {
AttentionOutput causal_self_attention(const DenseMatrix& x, const LayerParams& params);
AttentionOutput cross_attention(const DenseMatrix& x_dec, const DenseMatrix& enc_states,
                                const LayerParams& params);
}  // namespace serial

}  // namespace sdnc
