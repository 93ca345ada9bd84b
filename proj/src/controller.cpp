#include "sdnc/controller.hpp"

#include <cmath>
#include <string>

namespace sdnc {

void LayerParams::validate() const {
    if (d_model < 1 || d_k < 1 || d_v < 1 || n_heads < 1) {
        throw ShapeError("layer dimensions must all be >= 1");
    }
    if (w_q.size() != n_heads || w_k.size() != n_heads || w_v.size() != n_heads) {
        throw ShapeError("per-head weight count does not match head count");
    }
    for (std::size_t h = 0; h < n_heads; ++h) {
        if (w_q[h].rows != d_model || w_q[h].cols != d_k) throw ShapeError("w_q shape");
        if (w_k[h].rows != d_model || w_k[h].cols != d_k) throw ShapeError("w_k shape");
        if (w_v[h].rows != d_model || w_v[h].cols != d_v) throw ShapeError("w_v shape");
    }
    if (w_o.rows != n_heads * d_v || w_o.cols != d_model) throw ShapeError("w_o shape");
}

ProjectedToken project(const DenseVector& x, const LayerParams& params, std::size_t head,
                       std::size_t position) {
    if (head >= params.n_heads) {
        throw IndexError("head " + std::to_string(head) + " out of range");
    }
    if (x.size() != params.d_model) {
        throw ShapeError("input length " + std::to_string(x.size()) + ", expected " +
                         std::to_string(params.d_model));
    }
    ProjectedToken out;
    out.q = matvec(transpose(params.w_q[head]), x);
    out.k = matvec(transpose(params.w_k[head]), x);
    out.v = matvec(transpose(params.w_v[head]), x);
    out.head = head;
    out.position = position;
    return out;
}

SequenceProjection project_sequence(const DenseMatrix& x, const LayerParams& params,
                                    std::size_t head) {
    if (head >= params.n_heads) {
        throw IndexError("head " + std::to_string(head) + " out of range");
    }
    if (x.rows < 1) throw ShapeError("empty sequence");
    if (x.cols != params.d_model) {
        throw ShapeError("sequence width " + std::to_string(x.cols) + ", expected " +
                         std::to_string(params.d_model));
    }
    // Transposing once per head is exact, so each row still equals
    // project(X row t) bit for bit.
    DenseMatrix wq_t = transpose(params.w_q[head]);
    DenseMatrix wk_t = transpose(params.w_k[head]);
    DenseMatrix wv_t = transpose(params.w_v[head]);
    SequenceProjection out;
    out.q = DenseMatrix(x.rows, params.d_k);
    out.k = DenseMatrix(x.rows, params.d_k);
    out.v = DenseMatrix(x.rows, params.d_v);
    for (std::size_t t = 0; t < x.rows; ++t) {
        DenseVector row = x.row(t);
        DenseVector q = matvec(wq_t, row);
        DenseVector k = matvec(wk_t, row);
        DenseVector v = matvec(wv_t, row);
        for (std::size_t i = 0; i < params.d_k; ++i) out.q(t, i) = q[i];
        for (std::size_t i = 0; i < params.d_k; ++i) out.k(t, i) = k[i];
        for (std::size_t i = 0; i < params.d_v; ++i) out.v(t, i) = v[i];
    }
    return out;
}

namespace {

LayerParams draw_params(std::size_t d_model, std::size_t d_k, std::size_t d_v,
                        std::size_t n_heads, Rng& rng, bool tied) {
    if (d_model < 1 || d_k < 1 || d_v < 1 || n_heads < 1) {
        throw ShapeError("layer dimensions must all be >= 1");
    }
    if (tied && d_k != d_v) {
        throw ConfigError("tied projections require d_k == d_v");
    }
    const double bound = 1.0 / std::sqrt(static_cast<double>(d_model));
    LayerParams p;
    p.d_model = d_model;
    p.d_k = d_k;
    p.d_v = d_v;
    p.n_heads = n_heads;
    if (tied) {
        for (std::size_t h = 0; h < n_heads; ++h) {
            p.w_q.push_back(random_matrix(rng, d_model, d_k, -bound, bound));
        }
        p.w_k = p.w_q;
        p.w_v = p.w_q;
    } else {
        for (std::size_t h = 0; h < n_heads; ++h) {
            p.w_q.push_back(random_matrix(rng, d_model, d_k, -bound, bound));
        }
        for (std::size_t h = 0; h < n_heads; ++h) {
            p.w_k.push_back(random_matrix(rng, d_model, d_k, -bound, bound));
        }
        for (std::size_t h = 0; h < n_heads; ++h) {
            p.w_v.push_back(random_matrix(rng, d_model, d_v, -bound, bound));
        }
    }
    p.w_o = random_matrix(rng, n_heads * d_v, d_model, -bound, bound);
    p.validate();
    return p;
}

}  // namespace

LayerParams make_layer_params(std::size_t d_model, std::size_t d_k, std::size_t d_v,
                              std::size_t n_heads, Rng& rng) {
    return draw_params(d_model, d_k, d_v, n_heads, rng, false);
}

LayerParams make_tied_layer_params(std::size_t d_model, std::size_t d_k, std::size_t d_v,
                                   std::size_t n_heads, Rng& rng) {
    return draw_params(d_model, d_k, d_v, n_heads, rng, true);
}

}  // namespace sdnc
