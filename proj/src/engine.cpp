#include "sdnc/engine.hpp"

#include <string>
#include <utility>

#include "sdnc/attention.hpp"

namespace sdnc {

SdncEngine::SdncEngine(LayerParams params, ScaleVariant variant)
    : params_(std::move(params)) {
    params_.validate();
    read_scale_ = attention_scale(variant == ScaleVariant::dk ? params_.d_k : params_.d_v);
    w_q_t_.reserve(params_.n_heads);
    w_k_t_.reserve(params_.n_heads);
    w_v_t_.reserve(params_.n_heads);
    self_memories_.reserve(params_.n_heads);
    for (std::size_t h = 0; h < params_.n_heads; ++h) {
        w_q_t_.push_back(transpose(params_.w_q[h]));
        w_k_t_.push_back(transpose(params_.w_k[h]));
        w_v_t_.push_back(transpose(params_.w_v[h]));
        self_memories_.emplace_back(params_.d_k, params_.d_v);
    }
}

DenseVector SdncEngine::read_and_mix(const DenseVector& x_t,
                                     const std::vector<WriteOnceMemory>& memories) const {
    std::vector<DenseMatrix> readouts(params_.n_heads);
    for (std::size_t h = 0; h < params_.n_heads; ++h) {
        DenseVector q = matvec(w_q_t_[h], x_t);
        ReadResult r = content_read(memories[h], q, read_scale_);
        readouts[h] = DenseMatrix(1, params_.d_v);
        for (std::size_t i = 0; i < params_.d_v; ++i) readouts[h](0, i) = r.readout[i];
    }
    DenseMatrix mixed = concat_heads_and_mix(readouts, params_.w_o);
    return mixed.row(0);
}

DenseVector SdncEngine::step(const DenseVector& x_t) {
    if (x_t.size() != params_.d_model) {
        throw ShapeError("token length " + std::to_string(x_t.size()) + ", expected " +
                         std::to_string(params_.d_model));
    }
    // Append before reading: the freshly written row is visible to its own
    // read, so position t covers rows 1..t.
    for (std::size_t h = 0; h < params_.n_heads; ++h) {
        DenseVector k = matvec(w_k_t_[h], x_t);
        DenseVector v = matvec(w_v_t_[h], x_t);
        self_memories_[h].append(k, v);
    }
    ++step_count_;
    return read_and_mix(x_t, self_memories_);
}

DenseMatrix SdncEngine::run(const DenseMatrix& x) {
    if (step_count_ != 0) {
        throw NonFreshEngine("run requires a fresh engine, step count is " +
                             std::to_string(step_count_));
    }
    if (x.rows < 1) throw ShapeError("empty input sequence");
    if (x.cols != params_.d_model) {
        throw ShapeError("input width " + std::to_string(x.cols) + ", expected " +
                         std::to_string(params_.d_model));
    }
    DenseMatrix out(x.rows, params_.d_model);
    for (std::size_t t = 0; t < x.rows; ++t) {
        DenseVector z = step(x.row(t));
        for (std::size_t i = 0; i < params_.d_model; ++i) out(t, i) = z[i];
    }
    return out;
}

void SdncEngine::load_encoder_memory(const DenseMatrix& enc_states) {
    if (encoder_loaded()) throw AlreadyLoaded("encoder memory already loaded");
    if (enc_states.rows < 1) throw ShapeError("empty encoder sequence");
    if (enc_states.cols != params_.d_model) {
        throw ShapeError("encoder width " + std::to_string(enc_states.cols) +
                         ", expected " + std::to_string(params_.d_model));
    }
    enc_memories_.reserve(params_.n_heads);
    for (std::size_t h = 0; h < params_.n_heads; ++h) {
        WriteOnceMemory mem(params_.d_k, params_.d_v);
        for (std::size_t s = 0; s < enc_states.rows; ++s) {
            DenseVector row = enc_states.row(s);
            mem.append(matvec(w_k_t_[h], row), matvec(w_v_t_[h], row));
        }
        mem.seal();
        enc_memories_.push_back(std::move(mem));
    }
}

DenseVector SdncEngine::cross_step(const DenseVector& x_t) const {
    if (!encoder_loaded()) throw EncoderMemoryMissing("no encoder memory loaded");
    if (x_t.size() != params_.d_model) {
        throw ShapeError("token length " + std::to_string(x_t.size()) + ", expected " +
                         std::to_string(params_.d_model));
    }
    return read_and_mix(x_t, enc_memories_);
}

const WriteOnceMemory& SdncEngine::self_memory(std::size_t head) const {
    if (head >= params_.n_heads) throw IndexError("head index out of range");
    return self_memories_[head];
}

const WriteOnceMemory& SdncEngine::encoder_memory(std::size_t head) const {
    if (!encoder_loaded()) throw EncoderMemoryMissing("no encoder memory loaded");
    if (head >= params_.n_heads) throw IndexError("head index out of range");
    return enc_memories_[head];
}

}  // namespace sdnc
