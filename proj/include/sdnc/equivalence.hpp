#pragma once

// Verification harness: generates a seeded instance, runs the batched
// attention path and the streamed engine on the same inputs, and reports the
// element-wise deviation. Everything here is deterministic — the same config
// yields the same report, bit for bit.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "sdnc/engine.hpp"

namespace sdnc {

enum class EquivMode { self, cross, paper_restricted };

struct EquivConfig {
    std::size_t seq_len = 1;  // decoder length T
    std::size_t enc_len = 1;  // source length S; read only in cross mode
    std::size_t d_model = 4;
    std::size_t d_k = 4;
    std::size_t d_v = 4;
    std::size_t n_heads = 1;
    std::uint64_t seed = 0;
    double tol = 1e-10;
    EquivMode mode = EquivMode::self;
    // Read scale handed to the streamed engine. The batched side always
    // scales by 1/sqrt(d_k), so `dv` with d_k != d_v is a deliberate
    // mismatch knob.
    ScaleVariant scale_variant = ScaleVariant::dk;

    void validate() const;  // throws ConfigError
};

struct EquivalenceReport {
    double max_abs_diff = 0.0;
    std::size_t argmax_position = 0;   // row index of the largest deviation
    std::size_t argmax_component = 0;  // column index within that row
    std::vector<double> per_position_diffs;
    bool passed = false;
    EquivConfig config;
};

// Instance generation shared by every check: one generator seeded from
// cfg.seed draws the layer parameters first, then X (T x d_model rows on
// [-1, 1]), then — in cross mode — the source states (S x d_model).
struct EquivInstance {
    LayerParams params;
    DenseMatrix x;
    DenseMatrix enc_states;  // empty outside cross mode
};
EquivInstance make_instance(const EquivConfig& cfg);

// Batched causal attention vs. a fresh engine's run(), element for element.
// Accepts self and paper_restricted modes (the latter ties the projections).
EquivalenceReport check_self_equivalence(const EquivConfig& cfg);

// Batched cross-attention vs. load_encoder_memory + per-row cross_step.
EquivalenceReport check_cross_equivalence(const EquivConfig& cfg);

// True iff adding 1.0 to every component of X at perturb_position (1-based)
// leaves every earlier output row unchanged in BOTH paths: bit-exact for the
// streamed engine, within 1e-15 per element for the batched path.
bool check_causality(const EquivConfig& cfg, std::size_t perturb_position);

}  // namespace sdnc
