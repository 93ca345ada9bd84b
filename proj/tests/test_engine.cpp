#include <doctest.h>

#include <cmath>
#include <cstddef>
#include <vector>

#include "sdnc/attention.hpp"
#include "sdnc/engine.hpp"

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

}  // namespace

TEST_CASE("first step appends one row per head and reads it back whole") {
    const LayerParams p = seeded_params(4, 3, 2, 2, 70);
    SdncEngine eng(p);
    CHECK(eng.step_count() == 0);
    CHECK(eng.self_memory(0).size() == 0);

    const DenseVector x1 = seeded_input(1, 4, 70).row(0);
    const DenseVector z1 = eng.step(x1);
    CHECK(eng.step_count() == 1);

    DenseVector concat(2 * 2);
    for (std::size_t h = 0; h < 2; ++h) {
        CHECK(eng.self_memory(h).size() == 1);
        const ProjectedToken pt = project(x1, p, h);
        CHECK(bitwise_equal(eng.self_memory(h).key_row(0), pt.k.span()));
        CHECK(bitwise_equal(eng.self_memory(h).value_row(0), pt.v.span()));
        // The sole read weight must be exactly 1.
        const ReadResult r = content_read(eng.self_memory(h), pt.q, eng.read_scale());
        CHECK(r.weights[0] == 1.0);
        for (std::size_t i = 0; i < 2; ++i) concat[h * 2 + i] = pt.v[i];
    }
    CHECK(bitwise_equal(z1, matvec(transpose(p.w_o), concat)));
}

TEST_CASE("repeating a token splits the second read evenly") {
    const LayerParams p = seeded_params(3, 2, 2, 1, 71);
    const DenseVector x = seeded_input(1, 3, 71).row(0);
    SdncEngine eng(p);
    eng.step(x);
    eng.step(x);
    const ProjectedToken pt = project(x, p, 0);
    const ReadResult r = content_read(eng.self_memory(0), pt.q, eng.read_scale());
    CHECK(r.weights[0] == 0.5);
    CHECK(r.weights[1] == 0.5);
}

TEST_CASE("streamed run matches batched causal attention") {
    const LayerParams p = seeded_params(8, 4, 4, 2, 42);
    const DenseMatrix x = seeded_input(16, 8, 42);
    const DenseMatrix streamed = SdncEngine(p).run(x);
    const AttentionOutput batched = causal_self_attention(x, p);
    REQUIRE(streamed.rows == 16);
    CHECK(max_abs_diff(streamed, batched.z) <= 1e-10);
}

TEST_CASE("run equals stepping token by token") {
    const LayerParams p = seeded_params(6, 3, 3, 2, 72);
    const DenseMatrix x = seeded_input(9, 6, 72);
    SdncEngine whole(p);
    const DenseMatrix all = whole.run(x);

    SdncEngine one_at_a_time(p);
    for (std::size_t t = 0; t < x.rows; ++t) {
        const DenseVector z = one_at_a_time.step(x.row(t));
        CHECK(bitwise_equal(z.span(), all.row_span(t)));
    }
    for (std::size_t h = 0; h < 2; ++h) {
        CHECK(whole.self_memory(h).size() == 9);
        for (std::size_t j = 0; j < 9; ++j) {
            CHECK(bitwise_equal(whole.self_memory(h).key_row(j),
                                one_at_a_time.self_memory(h).key_row(j)));
            CHECK(bitwise_equal(whole.self_memory(h).value_row(j),
                                one_at_a_time.self_memory(h).value_row(j)));
        }
    }
}

TEST_CASE("run requires a fresh engine and valid shapes") {
    const LayerParams p = seeded_params(4, 2, 2, 1, 73);
    SdncEngine eng(p);
    eng.step(seeded_input(1, 4, 73).row(0));
    CHECK_THROWS_AS(eng.run(seeded_input(3, 4, 73)), NonFreshEngine);

    SdncEngine fresh(p);
    CHECK_THROWS_AS(fresh.run(DenseMatrix(0, 4)), ShapeError);
    CHECK_THROWS_AS(fresh.run(seeded_input(3, 5, 73)), ShapeError);
    CHECK_THROWS_AS(fresh.step(DenseVector(5)), ShapeError);

    // A one-row run is exactly one step.
    const DenseMatrix x1 = seeded_input(1, 4, 74);
    SdncEngine a(p), b(p);
    CHECK(bitwise_equal(a.run(x1).row_span(0), b.step(x1.row(0)).span()));
}

TEST_CASE("encoder load projects, seals, and refuses a second load") {
    const LayerParams p = seeded_params(5, 3, 2, 2, 75);
    const DenseMatrix enc = seeded_input(4, 5, 75);
    SdncEngine eng(p);
    CHECK_FALSE(eng.encoder_loaded());
    CHECK_THROWS_AS(eng.encoder_memory(0), EncoderMemoryMissing);

    eng.load_encoder_memory(enc);
    CHECK(eng.encoder_loaded());
    for (std::size_t h = 0; h < 2; ++h) {
        const WriteOnceMemory& mem = eng.encoder_memory(h);
        CHECK(mem.size() == 4);
        CHECK(mem.sealed());
        for (std::size_t s = 0; s < 4; ++s) {
            const ProjectedToken pt = project(enc.row(s), p, h);
            CHECK(bitwise_equal(mem.key_row(s), pt.k.span()));
            CHECK(bitwise_equal(mem.value_row(s), pt.v.span()));
        }
    }
    CHECK_THROWS_AS(eng.load_encoder_memory(enc), AlreadyLoaded);
    CHECK_THROWS_AS(SdncEngine(p).load_encoder_memory(DenseMatrix(0, 5)), ShapeError);
    CHECK_THROWS_AS(SdncEngine(p).load_encoder_memory(seeded_input(2, 4, 75)), ShapeError);
}

TEST_CASE("cross reads require a loaded encoder and repeat bit-identically") {
    const LayerParams p = seeded_params(4, 2, 2, 2, 76);
    const DenseVector x = seeded_input(1, 4, 76).row(0);
    SdncEngine eng(p);
    CHECK_THROWS_AS(eng.cross_step(x), EncoderMemoryMissing);

    eng.load_encoder_memory(seeded_input(3, 4, 77));
    CHECK_THROWS_AS(eng.cross_step(DenseVector(3)), ShapeError);
    const DenseVector once = eng.cross_step(x);
    const DenseVector again = eng.cross_step(x);
    CHECK(bitwise_equal(once, again));
}

TEST_CASE("a single source row is read back for any query") {
    const LayerParams p = seeded_params(4, 3, 3, 2, 78);
    const DenseMatrix enc = seeded_input(1, 4, 78);
    SdncEngine eng(p);
    eng.load_encoder_memory(enc);

    DenseVector concat(2 * 3);
    for (std::size_t h = 0; h < 2; ++h) {
        const DenseVector v = matvec(transpose(p.w_v[h]), enc.row(0));
        for (std::size_t i = 0; i < 3; ++i) concat[h * 3 + i] = v[i];
    }
    const DenseVector expect = matvec(transpose(p.w_o), concat);
    for (std::uint64_t s = 0; s < 5; ++s) {
        const DenseVector x = seeded_input(1, 4, 100 + s).row(0);
        CHECK(bitwise_equal(eng.cross_step(x), expect));
    }
}

TEST_CASE("streamed cross reads match batched cross-attention") {
    const LayerParams p = seeded_params(8, 4, 4, 2, 42);
    const DenseMatrix x = seeded_input(3, 8, 79);
    const DenseMatrix enc = seeded_input(5, 8, 80);
    const AttentionOutput batched = cross_attention(x, enc, p);

    SdncEngine eng(p);
    eng.load_encoder_memory(enc);
    for (std::size_t t = 0; t < 3; ++t) {
        const DenseVector z = eng.cross_step(x.row(t));
        double worst = 0.0;
        for (std::size_t i = 0; i < 8; ++i) {
            const double d = z[i] - batched.z(t, i);
            if (std::fabs(d) > worst) worst = std::fabs(d);
        }
        CHECK(worst <= 1e-10);
    }
}

TEST_CASE("cross reads leave the self-track untouched") {
    const LayerParams p = seeded_params(4, 2, 2, 1, 81);
    const DenseMatrix x = seeded_input(4, 4, 81);
    const DenseMatrix enc = seeded_input(2, 4, 82);

    SdncEngine eng(p);
    eng.load_encoder_memory(enc);
    eng.step(x.row(0));
    const std::size_t count_before = eng.step_count();
    const std::size_t mem_before = eng.self_memory(0).size();
    const DenseVector key_snapshot(eng.self_memory(0).key_row(0));

    const DenseVector cross_early = eng.cross_step(x.row(3));
    CHECK(eng.step_count() == count_before);
    CHECK(eng.self_memory(0).size() == mem_before);
    CHECK(bitwise_equal(eng.self_memory(0).key_row(0), key_snapshot.span()));

    // More self steps must not change what a cross read returns.
    eng.step(x.row(1));
    eng.step(x.row(2));
    CHECK(bitwise_equal(eng.cross_step(x.row(3)), cross_early));
}

TEST_CASE("two engines fed the same prefix are bit-identical") {
    const LayerParams p = seeded_params(5, 2, 3, 2, 83);
    const DenseMatrix x = seeded_input(6, 5, 83);
    SdncEngine a(p), b(p);
    for (std::size_t t = 0; t < 6; ++t) {
        const DenseVector za = a.step(x.row(t));
        const DenseVector zb = b.step(x.row(t));
        CHECK(bitwise_equal(za, zb));
    }
    for (std::size_t h = 0; h < 2; ++h) {
        for (std::size_t j = 0; j < 6; ++j) {
            CHECK(bitwise_equal(a.self_memory(h).key_row(j), b.self_memory(h).key_row(j)));
            CHECK(bitwise_equal(a.self_memory(h).value_row(j),
                                b.self_memory(h).value_row(j)));
        }
    }
}

TEST_CASE("outputs up to t depend only on tokens up to t") {
    const LayerParams p = seeded_params(4, 2, 2, 2, 84);
    const DenseMatrix x = seeded_input(7, 4, 84);
    DenseMatrix x2 = x;
    for (std::size_t t = 4; t < 7; ++t) {
        for (std::size_t i = 0; i < 4; ++i) x2(t, i) = -x(t, i) + 0.125;
    }
    const DenseMatrix za = SdncEngine(p).run(x);
    const DenseMatrix zb = SdncEngine(p).run(x2);
    for (std::size_t t = 0; t < 4; ++t) {
        CHECK(bitwise_equal(za.row_span(t), zb.row_span(t)));
    }
    CHECK_FALSE(bitwise_equal(za.row_span(4), zb.row_span(4)));
}

TEST_CASE("engine accessors bound-check the head index") {
    const LayerParams p = seeded_params(4, 2, 3, 2, 85);
    SdncEngine eng(p);
    CHECK_THROWS_AS(eng.self_memory(2), IndexError);
    CHECK(eng.read_scale() == attention_scale(2));

    // The variant knob swaps the scale width; with d_k != d_v they differ.
    SdncEngine dv_eng(p, ScaleVariant::dv);
    CHECK(dv_eng.read_scale() == attention_scale(3));
    CHECK(dv_eng.read_scale() != eng.read_scale());
}
