#include "gatecell/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace gatecell {

namespace {

constexpr char kMagic[5] = {'G', 'C', 'E', 'L', '1'};

void put_u32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& in) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4))
        throw ParseError("checkpoint: truncated header");
    return std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) | (std::uint32_t(b[2]) << 16) |
           (std::uint32_t(b[3]) << 24);
}

void put_f64_block(std::ostream& out, const double* data, std::size_t count) {
    for (std::size_t k = 0; k < count; ++k) {
        const std::uint64_t bits = std::bit_cast<std::uint64_t>(data[k]);
        unsigned char b[8];
        for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
        out.write(reinterpret_cast<const char*>(b), 8);
    }
}

void get_f64_block(std::istream& in, double* data, std::size_t count, const char* what) {
    for (std::size_t k = 0; k < count; ++k) {
        unsigned char b[8];
        if (!in.read(reinterpret_cast<char*>(b), 8))
            throw ParseError(std::string("checkpoint: truncated block ") + what);
        std::uint64_t bits = 0;
        for (int i = 0; i < 8; ++i) bits |= std::uint64_t(b[i]) << (8 * i);
        data[k] = std::bit_cast<double>(bits);
    }
}

std::uint32_t variant_tag(GateVariant v) {
    switch (v) {
    case GateVariant::Vanilla: return 0;
    case GateVariant::NoInput: return 1;
    case GateVariant::NoInputNoBias: return 2;
    case GateVariant::BiasOnly: return 3;
    }
    return 0;
}

GateVariant variant_from_tag(std::uint32_t tag) {
    switch (tag) {
    case 0: return GateVariant::Vanilla;
    case 1: return GateVariant::NoInput;
    case 2: return GateVariant::NoInputNoBias;
    case 3: return GateVariant::BiasOnly;
    default: throw ParseError("checkpoint: unknown variant tag " + std::to_string(tag));
    }
}

} // namespace

void write_lstm_checkpoint(std::ostream& out, const LstmParams& params) {
    out.write(kMagic, sizeof(kMagic));
    put_u32(out, variant_tag(params.variant));
    put_u32(out, static_cast<std::uint32_t>(params.m));
    put_u32(out, static_cast<std::uint32_t>(params.n));
    for (const TensorRef& t : param_tensors(const_cast<LstmParams&>(params)))
        put_f64_block(out, t.data, t.size);
}

LstmParams read_lstm_checkpoint(std::istream& in) {
    char magic[5];
    if (!in.read(magic, 5) || std::memcmp(magic, kMagic, 5) != 0)
        throw ParseError("checkpoint: bad magic, expected GCEL1");
    const GateVariant v = variant_from_tag(get_u32(in));
    const std::uint32_t m = get_u32(in);
    const std::uint32_t n = get_u32(in);
    if (m == 0 || n == 0)
        throw ParseError("checkpoint: zero dimension in header");
    // build the presence pattern, then fill it in block order
    LstmParams p = make_params(v, m, n);
    for (const TensorRef& t : param_tensors(p))
        get_f64_block(in, t.data, t.size, t.name);
    return p;
}

void write_lstm_checkpoint(const std::string& path, const LstmParams& params) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError(path + ": cannot open for writing");
    write_lstm_checkpoint(out, params);
    if (!out) throw ParseError(path + ": write failed");
}

LstmParams read_lstm_checkpoint_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path + ": cannot open");
    LstmParams p = read_lstm_checkpoint(in);
    if (in.peek() != std::char_traits<char>::eof())
        throw ParseError(path + ": trailing bytes after parameter blocks");
    return p;
}

void write_model_checkpoint(const std::string& path, const Model& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError(path + ": cannot open for writing");
    write_lstm_checkpoint(out, model.lstm);
    if (model.embedding) {
        put_u32(out, static_cast<std::uint32_t>(model.embedding->vocab));
        put_u32(out, static_cast<std::uint32_t>(model.embedding->dim));
        put_f64_block(out, model.embedding->table.data.data(), model.embedding->table.size());
    } else {
        put_u32(out, 0);
    }
    put_u32(out, static_cast<std::uint32_t>(model.head.w.rows));
    put_f64_block(out, model.head.w.data.data(), model.head.w.size());
    put_f64_block(out, model.head.b.data.data(), model.head.b.size());
    if (!out) throw ParseError(path + ": write failed");
}

Model read_model_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path + ": cannot open");
    Model model;
    model.lstm = read_lstm_checkpoint(in);
    const std::uint32_t vocab = get_u32(in);
    if (vocab > 0) {
        const std::uint32_t dim = get_u32(in);
        EmbeddingTable emb;
        emb.vocab = vocab;
        emb.dim = dim;
        emb.table = Matrix(vocab, dim);
        get_f64_block(in, emb.table.data.data(), emb.table.size(), "embedding");
        model.embedding = std::move(emb);
    }
    const std::uint32_t classes = get_u32(in);
    if (classes == 0)
        throw ParseError(path + ": model checkpoint without a classifier head");
    model.head.w = Matrix(classes, model.lstm.n);
    get_f64_block(in, model.head.w.data.data(), model.head.w.size(), "head_W");
    model.head.b = Vector(classes);
    get_f64_block(in, model.head.b.data.data(), model.head.b.size(), "head_b");
    if (in.peek() != std::char_traits<char>::eof())
        throw ParseError(path + ": trailing bytes after model blocks");
    check_model_dims(model);
    return model;
}

} // namespace gatecell
