#include "sdnc/equivalence.hpp"

#include <cmath>

#include "sdnc/attention.hpp"

namespace sdnc {

namespace {

// Element-wise comparison of two T x d matrices into a report. Ties go to
// the earliest (row, column) in row-major order, so argmax is deterministic.
EquivalenceReport compare(const DenseMatrix& batched, const DenseMatrix& streamed,
                          const EquivConfig& cfg) {
    EquivalenceReport rep;
    rep.config = cfg;
    rep.per_position_diffs.assign(batched.rows, 0.0);
    for (std::size_t t = 0; t < batched.rows; ++t) {
        for (std::size_t i = 0; i < batched.cols; ++i) {
            const double d = std::fabs(batched(t, i) - streamed(t, i));
            if (d > rep.per_position_diffs[t]) rep.per_position_diffs[t] = d;
            if (d > rep.max_abs_diff) {
                rep.max_abs_diff = d;
                rep.argmax_position = t;
                rep.argmax_component = i;
            }
        }
    }
    rep.passed = rep.max_abs_diff <= cfg.tol;
    return rep;
}

}  // namespace

void EquivConfig::validate() const {
    if (seq_len < 1) throw ConfigError("seq_len must be at least 1");
    if (mode == EquivMode::cross && enc_len < 1) throw ConfigError("enc_len must be at least 1");
    if (d_model < 1 || d_k < 1 || d_v < 1 || n_heads < 1) {
        throw ConfigError("dimensions must be at least 1");
    }
    if (!(tol > 0.0)) throw ConfigError("tol must be positive");
    if (mode == EquivMode::paper_restricted && d_k != d_v) {
        throw ConfigError("paper_restricted mode requires d_k == d_v");
    }
}

EquivInstance make_instance(const EquivConfig& cfg) {
    cfg.validate();
    Rng rng(cfg.seed);
    EquivInstance inst;
    inst.params = cfg.mode == EquivMode::paper_restricted
                      ? make_tied_layer_params(cfg.d_model, cfg.d_k, cfg.d_v, cfg.n_heads, rng)
                      : make_layer_params(cfg.d_model, cfg.d_k, cfg.d_v, cfg.n_heads, rng);
    inst.x = random_matrix(rng, cfg.seq_len, cfg.d_model, -1.0, 1.0);
    if (cfg.mode == EquivMode::cross) {
        inst.enc_states = random_matrix(rng, cfg.enc_len, cfg.d_model, -1.0, 1.0);
    }
    return inst;
}

EquivalenceReport check_self_equivalence(const EquivConfig& cfg) {
    if (cfg.mode == EquivMode::cross) {
        throw ConfigError("check_self_equivalence expects mode self or paper_restricted");
    }
    EquivInstance inst = make_instance(cfg);
    AttentionOutput batched = causal_self_attention(inst.x, inst.params);
    SdncEngine engine(inst.params, cfg.scale_variant);
    DenseMatrix streamed = engine.run(inst.x);
    return compare(batched.z, streamed, cfg);
}

EquivalenceReport check_cross_equivalence(const EquivConfig& cfg) {
    if (cfg.mode != EquivMode::cross) {
        throw ConfigError("check_cross_equivalence expects mode cross");
    }
    EquivInstance inst = make_instance(cfg);
    AttentionOutput batched = cross_attention(inst.x, inst.enc_states, inst.params);
    SdncEngine engine(inst.params, cfg.scale_variant);
    engine.load_encoder_memory(inst.enc_states);
    DenseMatrix streamed(cfg.seq_len, cfg.d_model);
    for (std::size_t t = 0; t < cfg.seq_len; ++t) {
        DenseVector z = engine.cross_step(inst.x.row(t));
        for (std::size_t i = 0; i < cfg.d_model; ++i) streamed(t, i) = z[i];
    }
    return compare(batched.z, streamed, cfg);
}

bool check_causality(const EquivConfig& cfg, std::size_t perturb_position) {
    if (cfg.mode == EquivMode::cross) {
        throw ConfigError("check_causality applies to the causal modes");
    }
    EquivInstance inst = make_instance(cfg);
    if (perturb_position < 1 || perturb_position > cfg.seq_len) {
        throw IndexError("perturb_position out of range");
    }
    DenseMatrix x_perturbed = inst.x;
    for (std::size_t i = 0; i < cfg.d_model; ++i) {
        x_perturbed(perturb_position - 1, i) += 1.0;
    }

    DenseMatrix batched_a = causal_self_attention(inst.x, inst.params).z;
    DenseMatrix batched_b = causal_self_attention(x_perturbed, inst.params).z;
    SdncEngine engine_a(inst.params, cfg.scale_variant);
    SdncEngine engine_b(inst.params, cfg.scale_variant);
    DenseMatrix streamed_a = engine_a.run(inst.x);
    DenseMatrix streamed_b = engine_b.run(x_perturbed);

    for (std::size_t t = 0; t + 1 < perturb_position; ++t) {
        if (!bitwise_equal(streamed_a.row_span(t), streamed_b.row_span(t))) return false;
        for (std::size_t i = 0; i < cfg.d_model; ++i) {
            if (std::fabs(batched_a(t, i) - batched_b(t, i)) > 1e-15) return false;
        }
    }
    return true;
}

}  // namespace sdnc
