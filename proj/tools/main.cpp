// Command-line front end: seeded equivalence and gradient checks, a
// batched-vs-streamed benchmark, and weight-file generation. All result
// output is machine-readable key=value lines on stdout; exit code 0 means
// every requested check passed, 1 means a check failed, 2 means the
// invocation itself was bad (flags, config, or I/O).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <CLI11.hpp>

#include "sdnc/attention.hpp"
#include "sdnc/engine.hpp"
#include "sdnc/equivalence.hpp"
#include "sdnc/grad.hpp"
#include "sdnc/report.hpp"
#include "sdnc/weights_io.hpp"

namespace {

using namespace sdnc;

struct DimArgs {
    std::size_t seq_len = 8;
    std::size_t enc_len = 1;
    std::size_t d_model = 8;
    std::size_t d_k = 0;  // 0 = derive as d_model / heads
    std::size_t d_v = 0;
    std::size_t heads = 1;
    std::uint64_t seed = 0;
    std::size_t n_seeds = 1;
};

void add_dim_flags(CLI::App* cmd, DimArgs& args, bool with_seq) {
    if (with_seq) cmd->add_option("--seq-len", args.seq_len, "sequence length T");
    cmd->add_option("--d-model", args.d_model, "token width");
    cmd->add_option("--d-k", args.d_k, "key/query width (default d_model/heads)");
    cmd->add_option("--d-v", args.d_v, "value width (default d_model/heads)");
    cmd->add_option("--heads", args.heads, "number of heads");
    cmd->add_option("--seed", args.seed, "base seed");
}

// Resolves the d_k/d_v defaults. Returns false (usage error) when a default
// is needed but d_model is not divisible by the head count.
bool resolve_dims(DimArgs& args) {
    if (args.d_k == 0 || args.d_v == 0) {
        if (args.heads == 0 || args.d_model % args.heads != 0) {
            std::cerr << "error: --d-k/--d-v default to d_model/heads, which requires "
                         "d_model divisible by heads\n";
            return false;
        }
        if (args.d_k == 0) args.d_k = args.d_model / args.heads;
        if (args.d_v == 0) args.d_v = args.d_model / args.heads;
    }
    return true;
}

EquivConfig to_config(const DimArgs& args, double tol, EquivMode mode,
                      ScaleVariant variant, std::uint64_t seed) {
    EquivConfig cfg;
    cfg.seq_len = args.seq_len;
    cfg.enc_len = args.enc_len;
    cfg.d_model = args.d_model;
    cfg.d_k = args.d_k;
    cfg.d_v = args.d_v;
    cfg.n_heads = args.heads;
    cfg.seed = seed;
    cfg.tol = tol;
    cfg.mode = mode;
    cfg.scale_variant = variant;
    return cfg;
}

// Runs one line-producing job per seed, optionally in parallel; lines are
// buffered and printed in seed order either way, so the bytes on stdout do
// not depend on scheduling. Returns true iff every job reported passed.
bool emit_per_seed(std::size_t n_seeds, bool parallel,
                   const std::function<std::string(std::uint64_t, bool&)>& job,
                   std::uint64_t base_seed) {
    std::vector<std::string> lines(n_seeds);
    std::vector<char> ok(n_seeds, 1);
    const std::int64_t n = static_cast<std::int64_t>(n_seeds);
    if (parallel) {
#pragma omp parallel for schedule(dynamic)
        for (std::int64_t i = 0; i < n; ++i) {
            bool passed = true;
            lines[i] = job(base_seed + static_cast<std::uint64_t>(i), passed);
            ok[i] = passed ? 1 : 0;
        }
    } else {
        for (std::int64_t i = 0; i < n; ++i) {
            bool passed = true;
            lines[i] = job(base_seed + static_cast<std::uint64_t>(i), passed);
            ok[i] = passed ? 1 : 0;
        }
    }
    bool all = true;
    for (std::size_t i = 0; i < n_seeds; ++i) {
        std::cout << lines[i] << '\n';
        if (!ok[i]) all = false;
    }
    return all;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Best-of-`repeat` wall time of fn().
template <typename Fn>
double best_time(std::size_t repeat, Fn&& fn) {
    double best = 0.0;
    for (std::size_t r = 0; r < repeat; ++r) {
        const auto start = std::chrono::steady_clock::now();
        fn();
        const double s = seconds_since(start);
        if (r == 0 || s < best) best = s;
    }
    return best;
}

std::string dims_echo(const DimArgs& args) {
    std::string out;
    out += "T=" + std::to_string(args.seq_len);
    out += " d_model=" + std::to_string(args.d_model);
    out += " d_k=" + std::to_string(args.d_k);
    out += " d_v=" + std::to_string(args.d_v);
    out += " H=" + std::to_string(args.heads);
    return out;
}

int run_bench(DimArgs args, std::size_t repeat, bool fit_scaling) {
    EquivConfig cfg = to_config(args, 1e-10, EquivMode::self, ScaleVariant::dk, args.seed);
    EquivInstance inst = make_instance(cfg);

    const double batched = best_time(repeat, [&] {
        volatile double sink = causal_self_attention(inst.x, inst.params).z(0, 0);
        (void)sink;
    });
    const double batched_serial = best_time(repeat, [&] {
        volatile double sink = serial::causal_self_attention(inst.x, inst.params).z(0, 0);
        (void)sink;
    });

    // Streamed timing also collects per-token step latencies (min over the
    // repeats) so the growth of read cost with t is visible.
    std::vector<double> step_best(args.seq_len, 0.0);
    const double streamed = best_time(repeat, [&] {
        SdncEngine engine(inst.params);
        for (std::size_t t = 0; t < args.seq_len; ++t) {
            const auto start = std::chrono::steady_clock::now();
            volatile double sink = engine.step(inst.x.row(t))[0];
            (void)sink;
            const double s = seconds_since(start);
            if (step_best[t] == 0.0 || s < step_best[t]) step_best[t] = s;
        }
    });

    const std::string echo = dims_echo(args) + " repeat=" + std::to_string(repeat);
    std::cout << "check=bench_batched " << echo << " seconds=" << format_double(batched)
              << '\n';
    std::cout << "check=bench_batched_serial " << echo
              << " seconds=" << format_double(batched_serial) << '\n';
    std::cout << "check=bench_streamed " << echo << " seconds=" << format_double(streamed)
              << '\n';

    std::vector<std::size_t> positions;
    for (std::size_t q = 1; q <= 4; ++q) {
        const std::size_t t = std::max<std::size_t>(1, args.seq_len * q / 4);
        if (positions.empty() || positions.back() != t) positions.push_back(t);
    }
    for (std::size_t t : positions) {
        std::cout << "check=bench_latency " << echo << " t=" << t
                  << " seconds=" << format_double(step_best[t - 1]) << '\n';
    }

    if (fit_scaling) {
        // Double T and fit the growth exponent of total streamed time.
        DimArgs big = args;
        big.seq_len = args.seq_len * 2;
        EquivConfig cfg2 = to_config(big, 1e-10, EquivMode::self, ScaleVariant::dk, args.seed);
        EquivInstance inst2 = make_instance(cfg2);
        const double streamed2 = best_time(repeat, [&] {
            SdncEngine engine(inst2.params);
            for (std::size_t t = 0; t < big.seq_len; ++t) {
                volatile double sink = engine.step(inst2.x.row(t))[0];
                (void)sink;
            }
        });
        const double exponent = std::log2(streamed2 / streamed);
        std::cout << "check=bench_fit T=" << args.seq_len << " T2=" << big.seq_len
                  << " exponent=" << format_double(exponent) << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"streamed/batched attention equivalence toolkit"};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "worker thread count (0 = library default)");

    DimArgs equiv_args;
    double equiv_tol = 1e-10;
    std::string equiv_mode = "self";
    std::string equiv_scale = "dk";
    bool equiv_parallel = false;
    CLI::App* equiv = app.add_subcommand("equiv", "batched vs. streamed output comparison");
    add_dim_flags(equiv, equiv_args, true);
    CLI::Option* enc_opt =
        equiv->add_option("--enc-len", equiv_args.enc_len, "source length S (cross mode)");
    equiv->add_option("--seeds", equiv_args.n_seeds, "number of consecutive seeds to run");
    equiv->add_option("--tol", equiv_tol, "pass tolerance on max abs diff");
    equiv->add_option("--mode", equiv_mode, "check variant")
        ->check(CLI::IsMember({"self", "cross", "paper-restricted"}));
    equiv->add_option("--scale-variant", equiv_scale, "streamed read scale: 1/sqrt of")
        ->check(CLI::IsMember({"dk", "dv"}));
    equiv->add_flag("--parallel", equiv_parallel, "run seeds concurrently");

    DimArgs grad_args;
    grad_args.seq_len = 6;
    double grad_eps = 1e-6;
    double grad_threshold = 1e-5;
    std::size_t grad_samples = 0;
    bool grad_parallel = false;
    CLI::App* grad = app.add_subcommand("gradcheck", "analytic vs. finite-difference gradients");
    add_dim_flags(grad, grad_args, true);
    grad->add_option("--seeds", grad_args.n_seeds, "number of consecutive seeds to run");
    grad->add_option("--eps", grad_eps, "finite-difference step, in [1e-8, 1e-3]");
    grad->add_option("--threshold", grad_threshold, "pass threshold on max relative error");
    grad->add_option("--samples", grad_samples,
                     "probe a seeded subsample of at least this many parameters (0 = all)");
    grad->add_flag("--parallel", grad_parallel, "run seeds concurrently");

    DimArgs bench_args;
    bench_args.seq_len = 256;
    bench_args.d_model = 16;
    std::size_t bench_repeat = 5;
    bool bench_fit = false;
    CLI::App* bench = app.add_subcommand("bench", "batched vs. streamed wall-clock timing");
    add_dim_flags(bench, bench_args, true);
    bench->add_option("--repeat", bench_repeat, "timing repeats (best-of)");
    bench->add_flag("--fit-scaling", bench_fit,
                    "also time 2x the sequence length and report the growth exponent");

    DimArgs gen_args;
    std::string gen_out;
    CLI::App* gen = app.add_subcommand("gen-weights", "write a seeded binary weight file");
    add_dim_flags(gen, gen_args, false);
    gen->add_option("--out", gen_out, "output path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;  // help/version vs. genuine usage error
    }

#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(threads);
#endif

    try {
        if (equiv->parsed()) {
            if (!resolve_dims(equiv_args)) return 2;
            const EquivMode mode = equiv_mode == "cross" ? EquivMode::cross
                                   : equiv_mode == "paper-restricted"
                                       ? EquivMode::paper_restricted
                                       : EquivMode::self;
            if (enc_opt->count() > 0 && mode != EquivMode::cross) {
                std::cerr << "error: --enc-len only applies to --mode cross\n";
                return 2;
            }
            const ScaleVariant variant =
                equiv_scale == "dv" ? ScaleVariant::dv : ScaleVariant::dk;
            const bool all = emit_per_seed(
                equiv_args.n_seeds, equiv_parallel,
                [&](std::uint64_t seed, bool& passed) {
                    const EquivConfig cfg = to_config(equiv_args, equiv_tol, mode, variant, seed);
                    const EquivalenceReport rep = mode == EquivMode::cross
                                                      ? check_cross_equivalence(cfg)
                                                      : check_self_equivalence(cfg);
                    passed = rep.passed;
                    return to_line(rep);
                },
                equiv_args.seed);
            return all ? 0 : 1;
        }
        if (grad->parsed()) {
            if (!resolve_dims(grad_args)) return 2;
            const bool all = emit_per_seed(
                grad_args.n_seeds, grad_parallel,
                [&](std::uint64_t seed, bool& passed) {
                    const EquivConfig cfg = to_config(grad_args, 1e-10, EquivMode::self,
                                                      ScaleVariant::dk, seed);
                    const GradCheckReport rep =
                        finite_diff_check(cfg, grad_eps, grad_threshold, grad_samples);
                    passed = rep.passed;
                    return to_line(rep);
                },
                grad_args.seed);
            return all ? 0 : 1;
        }
        if (bench->parsed()) {
            if (!resolve_dims(bench_args)) return 2;
            if (bench_repeat == 0) {
                std::cerr << "error: --repeat must be at least 1\n";
                return 2;
            }
            return run_bench(bench_args, bench_repeat, bench_fit);
        }
        if (gen->parsed()) {
            if (!resolve_dims(gen_args)) return 2;
            Rng rng(gen_args.seed);
            const LayerParams params = make_layer_params(gen_args.d_model, gen_args.d_k,
                                                         gen_args.d_v, gen_args.heads, rng);
            save_weights(params, gen_out);
            std::cout << "check=gen_weights d_model=" << gen_args.d_model
                      << " d_k=" << gen_args.d_k << " d_v=" << gen_args.d_v
                      << " H=" << gen_args.heads << " seed=" << gen_args.seed << " bytes="
                      << expected_weight_file_size(gen_args.d_model, gen_args.d_k,
                                                   gen_args.d_v, gen_args.heads)
                      << " out=" << gen_out << '\n';
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}
