#include <doctest.h>

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "sdnc/attention.hpp"
#include "sdnc/grad.hpp"

using namespace sdnc;

namespace {

LayerParams seeded_params(std::size_t d_model, std::size_t d_k, std::size_t d_v,
                          std::size_t n_heads, std::uint64_t seed) {
    Rng rng(seed);
    return make_layer_params(d_model, d_k, d_v, n_heads, rng);
}

DenseMatrix seeded_input(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    Rng rng(seed ^ 0x5eedULL);
    return random_matrix(rng, rows, cols, -1.0, 1.0);
}

void check_all_zero(const DenseMatrix& m) {
    for (double v : m.data) CHECK(v == 0.0);
}

EquivConfig grad_cfg(std::size_t t, std::size_t d_model, std::size_t heads,
                     std::uint64_t seed) {
    EquivConfig cfg;
    cfg.seq_len = t;
    cfg.d_model = d_model;
    cfg.d_k = cfg.d_v = d_model / heads;
    cfg.n_heads = heads;
    cfg.seed = seed;
    return cfg;
}

}  // namespace

TEST_CASE("loss is the plain weighted sum of the attention output") {
    const LayerParams p = seeded_params(4, 2, 2, 2, 90);
    const DenseMatrix x = seeded_input(5, 4, 90);
    const DenseMatrix u = seeded_input(5, 4, 91);
    const DenseMatrix z = causal_self_attention(x, p).z;
    double manual = 0.0;
    for (std::size_t i = 0; i < z.data.size(); ++i) manual += u.data[i] * z.data[i];
    CHECK(attention_loss(x, p, u) == manual);
}

TEST_CASE("zero upstream yields identically zero gradients") {
    const LayerParams p = seeded_params(4, 2, 3, 2, 92);
    const DenseMatrix x = seeded_input(6, 4, 92);
    const GradientBundle g = attention_backward(x, p, DenseMatrix(6, 4));
    check_all_zero(g.d_x);
    check_all_zero(g.d_w_o);
    for (std::size_t h = 0; h < 2; ++h) {
        check_all_zero(g.d_w_q[h]);
        check_all_zero(g.d_w_k[h]);
        check_all_zero(g.d_w_v[h]);
    }
}

TEST_CASE("single token: projection gradients vanish, value path is a product") {
    // With one token the sole attention weight is constantly 1, so the loss
    // never depends on W_Q or W_K and the value path is plain linear algebra.
    const LayerParams p = seeded_params(4, 3, 2, 2, 93);
    const DenseMatrix x = seeded_input(1, 4, 93);
    const DenseMatrix u = seeded_input(1, 4, 94);
    const GradientBundle g = attention_backward(x, p, u);
    for (std::size_t h = 0; h < 2; ++h) {
        check_all_zero(g.d_w_q[h]);
        check_all_zero(g.d_w_k[h]);
    }
    // dW_V[h] = X^T * (upstream W_O^T, head slice).
    const DenseMatrix d_concat = matmul(u, transpose(p.w_o));
    for (std::size_t h = 0; h < 2; ++h) {
        DenseMatrix slice(1, 2);
        for (std::size_t i = 0; i < 2; ++i) slice(0, i) = d_concat(0, h * 2 + i);
        const DenseMatrix expect = matmul(transpose(x), slice);
        CHECK(bitwise_equal(g.d_w_v[h], expect));
    }
}

TEST_CASE("analytic gradients pass the finite-difference check") {
    const GradCheckReport rep = finite_diff_check(grad_cfg(6, 4, 2, 42), 1e-6);
    CHECK(rep.passed);
    CHECK(rep.max_rel_err <= 1e-5);
    // T*d_model + H*(2*d_model*d_k + d_model*d_v) + H*d_v*d_model
    CHECK(rep.probes == 6 * 4 + 2 * (2 * 4 * 2 + 4 * 2) + 2 * 2 * 4);
    CHECK(rep.eps == 1e-6);
    CHECK_FALSE(rep.worst_parameter.empty());
}

TEST_CASE("upstream supported on early rows keeps late input gradients at zero") {
    const LayerParams p = seeded_params(4, 2, 2, 2, 95);
    const DenseMatrix x = seeded_input(7, 4, 95);
    DenseMatrix u = seeded_input(7, 4, 96);
    const std::size_t cut = 3;  // zero every upstream row from here on
    for (std::size_t t = cut; t < 7; ++t) {
        for (std::size_t i = 0; i < 4; ++i) u(t, i) = 0.0;
    }
    const GradientBundle g = attention_backward(x, p, u);
    for (std::size_t t = cut; t < 7; ++t) {
        for (std::size_t i = 0; i < 4; ++i) CHECK(g.d_x(t, i) == 0.0);
    }
    // Earlier rows do feed the loss.
    double early = 0.0;
    for (std::size_t t = 0; t < cut; ++t) {
        for (std::size_t i = 0; i < 4; ++i) early += std::fabs(g.d_x(t, i));
    }
    CHECK(early > 0.0);
}

TEST_CASE("backward is linear in the upstream signal") {
    const LayerParams p = seeded_params(4, 2, 2, 2, 97);
    const DenseMatrix x = seeded_input(5, 4, 97);
    const DenseMatrix u1 = seeded_input(5, 4, 98);
    const DenseMatrix u2 = seeded_input(5, 4, 99);
    DenseMatrix sum(5, 4);
    for (std::size_t i = 0; i < sum.data.size(); ++i) sum.data[i] = u1.data[i] + u2.data[i];

    const GradientBundle ga = attention_backward(x, p, u1);
    const GradientBundle gb = attention_backward(x, p, u2);
    const GradientBundle gs = attention_backward(x, p, sum);
    for (std::size_t i = 0; i < gs.d_x.data.size(); ++i) {
        CHECK(std::fabs(gs.d_x.data[i] - (ga.d_x.data[i] + gb.d_x.data[i])) <= 1e-12);
    }
    for (std::size_t i = 0; i < gs.d_w_o.data.size(); ++i) {
        CHECK(std::fabs(gs.d_w_o.data[i] - (ga.d_w_o.data[i] + gb.d_w_o.data[i])) <= 1e-12);
    }
}

TEST_CASE("zero upstream makes the finite-difference check exact") {
    const LayerParams p = seeded_params(4, 2, 2, 1, 100);
    const DenseMatrix x = seeded_input(3, 4, 100);
    const GradCheckReport rep =
        finite_diff_check_instance(x, p, DenseMatrix(3, 4), 1e-6);
    CHECK(rep.passed);
    CHECK(rep.max_rel_err == 0.0);
}

TEST_CASE("step size and threshold are validated") {
    const EquivConfig cfg = grad_cfg(2, 4, 1, 0);
    CHECK_THROWS_AS(finite_diff_check(cfg, 1e-12), ConfigError);
    CHECK_THROWS_AS(finite_diff_check(cfg, 1e-2), ConfigError);
    CHECK_THROWS_AS(finite_diff_check(cfg, 1e-6, 0.0), ConfigError);
    CHECK_NOTHROW(finite_diff_check(cfg, 1e-8));
    CHECK_NOTHROW(finite_diff_check(cfg, 1e-3));
}

TEST_CASE("subsampling probes a deterministic subset") {
    const EquivConfig cfg = grad_cfg(12, 8, 2, 5);
    // Full parameter count: 12*8 + 2*(2*8*4 + 8*4) + 2*4*8 = 352.
    const GradCheckReport full = finite_diff_check(cfg, 1e-6, 1e-5, 400);
    CHECK(full.probes == 352);

    const GradCheckReport a = finite_diff_check(cfg, 1e-6, 1e-5, 200);
    const GradCheckReport b = finite_diff_check(cfg, 1e-6, 1e-5, 200);
    CHECK(a.probes == 200);
    CHECK(a.passed);
    CHECK(a.max_rel_err == b.max_rel_err);
    CHECK(a.worst_parameter == b.worst_parameter);

    // Asking for fewer than the floor still probes the floor.
    CHECK(finite_diff_check(cfg, 1e-6, 1e-5, 10).probes == 200);
}

TEST_CASE("single-token check is exact up to a tiny threshold") {
    const GradCheckReport rep = finite_diff_check(grad_cfg(1, 4, 1, 3), 1e-6, 1e-7);
    CHECK(rep.passed);
}

TEST_CASE("backward validates its inputs") {
    const LayerParams p = seeded_params(4, 2, 2, 1, 101);
    const DenseMatrix x = seeded_input(3, 4, 101);
    CHECK_THROWS_AS(attention_backward(x, p, DenseMatrix(2, 4)), ShapeError);
    CHECK_THROWS_AS(attention_backward(x, p, DenseMatrix(3, 5)), ShapeError);
    DenseMatrix bad(3, 4);
    bad(1, 2) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(attention_backward(x, p, bad), NonFiniteInput);
}
