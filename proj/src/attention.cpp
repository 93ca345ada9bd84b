#include "sdnc/attention.hpp"

#include <cstdint>
#include <string>

namespace sdnc {

namespace {

// One output row of scaled-dot-product attention against key rows [0, limit):
// logits into the weight row, softmax over that prefix, then the weighted
// value sum accumulated in increasing row order. Shared by the self and cross
// kernels; entries of weights_row at and beyond limit are left untouched.
void attend_row(std::span<const double> query, const DenseMatrix& keys,
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

AttentionOutput attend_sequence(const DenseMatrix& x_dec, const DenseMatrix* enc_states,
                                const LayerParams& params) {
    params.validate();
    if (x_dec.rows < 1) throw ShapeError("empty decoder sequence");
    if (x_dec.cols != params.d_model) {
        throw ShapeError("decoder width " + std::to_string(x_dec.cols) + ", expected " +
                         std::to_string(params.d_model));
    }
    const bool causal = enc_states == nullptr;
    if (!causal) {
        if (enc_states->rows < 1) throw EmptyMemory("cross-attention over empty source");
        if (enc_states->cols != params.w_k[0].rows) {
            throw ShapeError("source width " + std::to_string(enc_states->cols) +
                             ", expected " + std::to_string(params.w_k[0].rows));
        }
    }

    const std::size_t seq_len = x_dec.rows;
    const std::size_t src_len = causal ? seq_len : enc_states->rows;
    const double scale = attention_scale(params.d_k);
    const std::size_t n_heads = params.n_heads;

    // Keys/values are projected once per head, before the row loop. For the
    // cross form this is the cached source projection.
    std::vector<DenseMatrix> queries(n_heads), keys(n_heads), values(n_heads);
    std::vector<DenseMatrix> head_out(n_heads);
    AttentionOutput out;
    out.head_weights.assign(n_heads, DenseMatrix());
    for (std::size_t h = 0; h < n_heads; ++h) {
        if (causal) {
            SequenceProjection p = project_sequence(x_dec, params, h);
            queries[h] = std::move(p.q);
            keys[h] = std::move(p.k);
            values[h] = std::move(p.v);
        } else {
            SequenceProjection dec = project_sequence(x_dec, params, h);
            queries[h] = std::move(dec.q);
            SequenceProjection src = project_sequence(*enc_states, params, h);
            keys[h] = std::move(src.k);
            values[h] = std::move(src.v);
        }
        out.head_weights[h] = DenseMatrix(seq_len, src_len);
        head_out[h] = DenseMatrix(seq_len, params.d_v);
    }

    const std::int64_t hn = static_cast<std::int64_t>(n_heads);
    const std::int64_t tn = static_cast<std::int64_t>(seq_len);
#pragma omp parallel for collapse(2) schedule(static)
    for (std::int64_t h = 0; h < hn; ++h) {
        for (std::int64_t t = 0; t < tn; ++t) {
            const std::size_t hh = static_cast<std::size_t>(h);
            const std::size_t tt = static_cast<std::size_t>(t);
            const std::size_t limit = causal ? tt + 1 : src_len;
            attend_row(queries[hh].row_span(tt), keys[hh], values[hh], limit, scale,
                       out.head_weights[hh].row_span(tt), head_out[hh].row_span(tt));
        }
    }

    out.z = concat_heads_and_mix(head_out, params.w_o);
    return out;
}

}  // namespace

AttentionOutput causal_self_attention(const DenseMatrix& x, const LayerParams& params) {
    return attend_sequence(x, nullptr, params);
}

AttentionOutput cross_attention(const DenseMatrix& x_dec, const DenseMatrix& enc_states,
                                const LayerParams& params) {
    return attend_sequence(x_dec, &enc_states, params);
}

DenseMatrix concat_heads_and_mix(const std::vector<DenseMatrix>& head_outputs,
                                 const DenseMatrix& w_o) {
    if (head_outputs.empty()) throw ShapeError("no head outputs");
    const std::size_t seq_len = head_outputs[0].rows;
    const std::size_t d_v = head_outputs[0].cols;
    for (const DenseMatrix& m : head_outputs) {
        if (m.rows != seq_len || m.cols != d_v) {
            throw ShapeError("head outputs disagree on shape");
        }
    }
    if (w_o.rows != head_outputs.size() * d_v) {
        throw ShapeError("w_o rows " + std::to_string(w_o.rows) + ", expected " +
                         std::to_string(head_outputs.size() * d_v));
    }
    DenseMatrix concat(seq_len, head_outputs.size() * d_v);
    for (std::size_t t = 0; t < seq_len; ++t) {
        for (std::size_t h = 0; h < head_outputs.size(); ++h) {
            for (std::size_t i = 0; i < d_v; ++i) {
                concat(t, h * d_v + i) = head_outputs[h](t, i);
            }
        }
    }
    return matmul(concat, w_o);
}

}  // namespace sdnc
