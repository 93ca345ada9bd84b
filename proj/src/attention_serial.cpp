#include "sdnc/attention.hpp"

namespace sdnc::serial {

namespace {

// Straightforward single-threaded attention over key rows [0, limit). Kept
// deliberately textbook-shaped so it can serve as the reference the threaded
// kernels are tested against, and as the baseline in the benchmark.
void attend_row_serial(std::span<const double> query, const DenseMatrix& keys,
                       const DenseMatrix& values, std::size_t limit, double scale,
                       std::span<double> weights_row, std::span<double> out_row) {
    for (std::size_t j = 0; j < limit; ++j) {
        weights_row[j] = scale * dot(keys.row_span(j), query);
    }
    softmax_in_place(weights_row.first(limit));
    for (std::size_t j = 0; j < limit; ++j) {
        axpy(weights_row[j], values.row_span(j), out_row);
    }
}

AttentionOutput attend_sequence_serial(const DenseMatrix& x_dec,
                                       const DenseMatrix* enc_states,
                                       const LayerParams& params) {
    params.validate();
    if (x_dec.rows < 1) throw ShapeError("empty decoder sequence");
    if (x_dec.cols != params.d_model) throw ShapeError("decoder width mismatch");
    const bool causal = enc_states == nullptr;
    if (!causal) {
        if (enc_states->rows < 1) throw EmptyMemory("cross-attention over empty source");
        if (enc_states->cols != params.w_k[0].rows) throw ShapeError("source width mismatch");
    }

    const std::size_t seq_len = x_dec.rows;
    const std::size_t src_len = causal ? seq_len : enc_states->rows;
    const double scale = attention_scale(params.d_k);

    AttentionOutput out;
    out.head_weights.assign(params.n_heads, DenseMatrix());
    std::vector<DenseMatrix> head_out(params.n_heads);
    for (std::size_t h = 0; h < params.n_heads; ++h) {
        SequenceProjection dec = project_sequence(x_dec, params, h);
        DenseMatrix queries = std::move(dec.q);
        DenseMatrix keys, values;
        if (causal) {
            keys = std::move(dec.k);
            values = std::move(dec.v);
        } else {
            SequenceProjection src = project_sequence(*enc_states, params, h);
            keys = std::move(src.k);
            values = std::move(src.v);
        }
        out.head_weights[h] = DenseMatrix(seq_len, src_len);
        head_out[h] = DenseMatrix(seq_len, params.d_v);
        for (std::size_t t = 0; t < seq_len; ++t) {
            const std::size_t limit = causal ? t + 1 : src_len;
            attend_row_serial(queries.row_span(t), keys, values, limit, scale,
                              out.head_weights[h].row_span(t), head_out[h].row_span(t));
        }
    }

    out.z = concat_heads_and_mix(head_out, params.w_o);
    return out;
}

}  // namespace

AttentionOutput causal_self_attention(const DenseMatrix& x, const LayerParams& params) {
    return attend_sequence_serial(x, nullptr, params);
}

AttentionOutput cross_attention(const DenseMatrix& x_dec, const DenseMatrix& enc_states,
                                const LayerParams& params) {
    return attend_sequence_serial(x_dec, &enc_states, params);
}

}  // namespace sdnc::serial
