#pragma once

// Streaming engine: a stateless controller over per-head write-once memories.
// Each step projects the incoming token, appends its (key, value) row to every
// head's memory, then reads back with the token's query. Appending before
// reading is what lets a position attend to itself, so the streamed outputs
// line up with the causal batched path row for row.

#include <cstddef>
#include <vector>

#include "sdnc/controller.hpp"
#include "sdnc/errors.hpp"
#include "sdnc/linalg.hpp"
#include "sdnc/memory.hpp"

namespace sdnc {

// Which width feeds the 1/sqrt(dim) read scale. `dk` is the key width (the
// default, and what the batched attention path always uses); `dv` is the
// value width. The two only differ when d_k != d_v, which makes `dv` a
// useful deliberate-mismatch control.
enum class ScaleVariant { dk, dv };

class SdncEngine {
public:
    explicit SdncEngine(LayerParams params, ScaleVariant variant = ScaleVariant::dk);

    // Appends the token's (k, v) to every self-memory, then content-reads with
    // its query and mixes the per-head readouts. Advances the step count.
    DenseVector step(const DenseVector& x_t);

    // step() applied to each row of x in order; requires a fresh engine so row
    // t of the result is unambiguously the output for position t.
    DenseMatrix run(const DenseMatrix& x);

    // Projects every encoder row to (key, value) per head and seals the
    // resulting memories. May be called once.
    void load_encoder_memory(const DenseMatrix& enc_states);

    // Reads the sealed encoder memories with x_t's query. Touches neither the
    // self-memories nor the step count, so it may interleave freely with
    // step() and repeats are bit-identical.
    DenseVector cross_step(const DenseVector& x_t) const;

    std::size_t step_count() const { return step_count_; }
    bool encoder_loaded() const { return !enc_memories_.empty(); }
    const WriteOnceMemory& self_memory(std::size_t head) const;
    const WriteOnceMemory& encoder_memory(std::size_t head) const;
    const LayerParams& params() const { return params_; }
    double read_scale() const { return read_scale_; }

private:
    DenseVector read_and_mix(const DenseVector& x_t,
                             const std::vector<WriteOnceMemory>& memories) const;

    LayerParams params_;
    double read_scale_;
    // Transposed projections cached once so each step is a plain matvec.
    std::vector<DenseMatrix> w_q_t_, w_k_t_, w_v_t_;
    std::vector<WriteOnceMemory> self_memories_;
    std::vector<WriteOnceMemory> enc_memories_;
    std::size_t step_count_ = 0;
};

}  // namespace sdnc
