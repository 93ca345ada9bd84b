#include "sdnc/weights_io.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <limits>
#include <vector>

#include "sdnc/errors.hpp"

namespace sdnc {

namespace {

constexpr char kMagic[8] = {'S', 'D', 'N', 'C', 'W', 'T', '0', '1'};

void append_u32(std::string& out, std::uint32_t v) {
    for (int shift = 0; shift < 32; shift += 8) {
        out.push_back(static_cast<char>((v >> shift) & 0xff));
    }
}

void append_f64(std::string& out, double d) {
    const std::uint64_t v = std::bit_cast<std::uint64_t>(d);
    for (int shift = 0; shift < 64; shift += 8) {
        out.push_back(static_cast<char>((v >> shift) & 0xff));
    }
}

std::uint32_t read_u32(const std::string& in, std::size_t at) {
    std::uint32_t v = 0;
    for (int b = 0; b < 4; ++b) {
        v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[at + b])) << (8 * b);
    }
    return v;
}

double read_f64(const std::string& in, std::size_t at) {
    std::uint64_t v = 0;
    for (int b = 0; b < 8; ++b) {
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[at + b])) << (8 * b);
    }
    return std::bit_cast<double>(v);
}

void append_matrix(std::string& out, const DenseMatrix& m) {
    for (double d : m.data) append_f64(out, d);
}

DenseMatrix read_matrix(const std::string& in, std::size_t& at, std::size_t rows,
                        std::size_t cols) {
    DenseMatrix m(rows, cols);
    for (double& d : m.data) {
        d = read_f64(in, at);
        at += 8;
    }
    return m;
}

}  // namespace

std::size_t expected_weight_file_size(std::size_t d_model, std::size_t d_k, std::size_t d_v,
                                      std::size_t n_heads) {
    const std::size_t doubles =
        n_heads * d_model * d_k * 2 + n_heads * d_model * d_v + n_heads * d_v * d_model;
    return 8 + 16 + 8 * doubles;
}

void save_weights(const LayerParams& params, const std::string& path) {
    params.validate();
    std::string buf;
    buf.reserve(expected_weight_file_size(params.d_model, params.d_k, params.d_v,
                                          params.n_heads));
    buf.append(kMagic, sizeof kMagic);
    append_u32(buf, static_cast<std::uint32_t>(params.d_model));
    append_u32(buf, static_cast<std::uint32_t>(params.d_k));
    append_u32(buf, static_cast<std::uint32_t>(params.d_v));
    append_u32(buf, static_cast<std::uint32_t>(params.n_heads));
    for (const DenseMatrix& m : params.w_q) append_matrix(buf, m);
    for (const DenseMatrix& m : params.w_k) append_matrix(buf, m);
    for (const DenseMatrix& m : params.w_v) append_matrix(buf, m);
    append_matrix(buf, params.w_o);

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    out.flush();
    if (!out) throw IoError("write to '" + path + "' failed");
}

LayerParams load_weights(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("read from '" + path + "' failed");

    if (buf.size() < 24 || buf.compare(0, sizeof kMagic, kMagic, sizeof kMagic) != 0) {
        throw IoError("'" + path + "' is not a weight file (bad magic)");
    }
    const std::size_t d_model = read_u32(buf, 8);
    const std::size_t d_k = read_u32(buf, 12);
    const std::size_t d_v = read_u32(buf, 16);
    const std::size_t n_heads = read_u32(buf, 20);
    if (d_model < 1 || d_k < 1 || d_v < 1 || n_heads < 1) {
        throw IoError("'" + path + "' has zero dimensions in its header");
    }
    if (buf.size() != expected_weight_file_size(d_model, d_k, d_v, n_heads)) {
        throw IoError("'" + path + "' length does not match its header");
    }

    LayerParams params;
    params.d_model = d_model;
    params.d_k = d_k;
    params.d_v = d_v;
    params.n_heads = n_heads;
    std::size_t at = 24;
    for (std::size_t h = 0; h < n_heads; ++h) {
        params.w_q.push_back(read_matrix(buf, at, d_model, d_k));
    }
    for (std::size_t h = 0; h < n_heads; ++h) {
        params.w_k.push_back(read_matrix(buf, at, d_model, d_k));
    }
    for (std::size_t h = 0; h < n_heads; ++h) {
        params.w_v.push_back(read_matrix(buf, at, d_model, d_v));
    }
    params.w_o = read_matrix(buf, at, n_heads * d_v, d_model);
    params.validate();
    return params;
}

}  // namespace sdnc
