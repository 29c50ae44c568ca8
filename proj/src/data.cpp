#include "gatecell/data.hpp"

#include <zlib.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace gatecell {

namespace {

std::uint32_t read_be32(const std::vector<unsigned char>& bytes, std::size_t offset) {
    if (offset + 4 > bytes.size())
        throw ParseError("idx: truncated header at byte " + std::to_string(offset));
    return (std::uint32_t(bytes[offset]) << 24) | (std::uint32_t(bytes[offset + 1]) << 16) |
           (std::uint32_t(bytes[offset + 2]) << 8) | std::uint32_t(bytes[offset + 3]);
}

void write_be32(std::vector<unsigned char>& out, std::uint32_t v) {
    out.push_back(static_cast<unsigned char>(v >> 24));
    out.push_back(static_cast<unsigned char>(v >> 16));
    out.push_back(static_cast<unsigned char>(v >> 8));
    out.push_back(static_cast<unsigned char>(v));
}

constexpr std::uint32_t kImagesMagic = 0x00000803;
constexpr std::uint32_t kLabelsMagic = 0x00000801;

} // namespace

IdxContent parse_idx(const std::vector<unsigned char>& bytes) {
    const std::uint32_t magic = read_be32(bytes, 0);
    IdxContent content;
    if (magic == kImagesMagic) {
        const std::uint64_t count = read_be32(bytes, 4);
        const std::uint64_t height = read_be32(bytes, 8);
        const std::uint64_t width = read_be32(bytes, 12);
        const std::uint64_t expected = count * height * width;
        if (height == 0 || width == 0 || expected > (std::uint64_t(1) << 40))
            throw ParseError("idx: implausible dims " + std::to_string(count) + "x" + std::to_string(height) +
                             "x" + std::to_string(width) + " at byte 4");
        if (bytes.size() != 16 + expected)
            throw ParseError("idx: truncated payload at byte 16: expected " + std::to_string(expected) +
                             " pixel bytes, have " + std::to_string(bytes.size() - 16));
        ImageSet set;
        set.count = count;
        set.height = height;
        set.width = width;
        set.pixels.resize(expected);
        for (std::uint64_t k = 0; k < expected; ++k)
            set.pixels[k] = static_cast<double>(bytes[16 + k]) / 255.0;
        content.images = std::move(set);
        return content;
    }
    if (magic == kLabelsMagic) {
        const std::uint64_t count = read_be32(bytes, 4);
        if (bytes.size() != 8 + count)
            throw ParseError("idx: truncated payload at byte 8: expected " + std::to_string(count) +
                             " label bytes, have " + std::to_string(bytes.size() - 8));
        content.labels = std::vector<std::uint8_t>(bytes.begin() + 8, bytes.end());
        return content;
    }
    std::ostringstream os;
    os << "idx: unsupported magic 0x" << std::hex << magic << " at byte 0";
    throw ParseError(os.str());
}

std::vector<unsigned char> serialize_idx_images(std::size_t height, std::size_t width,
                                                const std::vector<std::uint8_t>& pixels) {
    if (height == 0 || width == 0 || pixels.size() % (height * width) != 0)
        throw std::invalid_argument("serialize_idx_images: pixel count not a multiple of height*width");
    std::vector<unsigned char> out;
    out.reserve(16 + pixels.size());
    write_be32(out, kImagesMagic);
    write_be32(out, static_cast<std::uint32_t>(pixels.size() / (height * width)));
    write_be32(out, static_cast<std::uint32_t>(height));
    write_be32(out, static_cast<std::uint32_t>(width));
    out.insert(out.end(), pixels.begin(), pixels.end());
    return out;
}

std::vector<unsigned char> serialize_idx_labels(const std::vector<std::uint8_t>& labels) {
    std::vector<unsigned char> out;
    out.reserve(8 + labels.size());
    write_be32(out, kLabelsMagic);
    write_be32(out, static_cast<std::uint32_t>(labels.size()));
    out.insert(out.end(), labels.begin(), labels.end());
    return out;
}

namespace {

std::vector<unsigned char> gunzip(const std::vector<unsigned char>& compressed, const std::string& path) {
    z_stream zs{};
    if (inflateInit2(&zs, 16 + MAX_WBITS) != Z_OK)
        throw ParseError(path + ": inflateInit failed");
    std::vector<unsigned char> out;
    out.reserve(compressed.size() * 4);
    unsigned char buf[1 << 16];
    zs.next_in = const_cast<unsigned char*>(compressed.data());
    zs.avail_in = static_cast<uInt>(compressed.size());
    int rc = Z_OK;
    do {
        zs.next_out = buf;
        zs.avail_out = sizeof(buf);
        rc = inflate(&zs, Z_NO_FLUSH);
        if (rc != Z_OK && rc != Z_STREAM_END) {
            inflateEnd(&zs);
            throw ParseError(path + ": gzip inflate failed (rc=" + std::to_string(rc) + ")");
        }
        out.insert(out.end(), buf, buf + (sizeof(buf) - zs.avail_out));
    } while (rc != Z_STREAM_END);
    inflateEnd(&zs);
    return out;
}

} // namespace

std::vector<unsigned char> read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ParseError(path + ": cannot open");
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() >= 2 && bytes[0] == 0x1f && bytes[1] == 0x8b)
        return gunzip(bytes, path);
    return bytes;
}

ImageSet load_image_set(const std::string& images_path, const std::string& labels_path) {
    IdxContent imgs = parse_idx(read_file_bytes(images_path));
    if (!imgs.images)
        throw ParseError(images_path + ": expected an image file (magic 0x803)");
    IdxContent labs = parse_idx(read_file_bytes(labels_path));
    if (!labs.labels)
        throw ParseError(labels_path + ": expected a label file (magic 0x801)");
    if (labs.labels->size() != imgs.images->count)
        throw ParseError(labels_path + ": " + std::to_string(labs.labels->size()) + " labels for " +
                         std::to_string(imgs.images->count) + " images");
    imgs.images->labels = std::move(*labs.labels);
    return std::move(*imgs.images);
}

PixelStats standardize(ImageSet& train, ImageSet& test) {
    if (train.pixels.empty())
        throw ContractError("standardize: empty training set");
    double sum = 0.0;
    for (double v : train.pixels) sum += v;
    const double mean = sum / static_cast<double>(train.pixels.size());
    double sq = 0.0;
    for (double v : train.pixels) sq += (v - mean) * (v - mean);
    double stddev = std::sqrt(sq / static_cast<double>(train.pixels.size()));
    if (stddev < 1e-8) stddev = 1e-8;
    for (double& v : train.pixels) v = (v - mean) / stddev;
    for (double& v : test.pixels) v = (v - mean) / stddev;
    return {mean, stddev};
}

namespace {

std::vector<std::size_t> all_indices(std::size_t n) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    return idx;
}

} // namespace

std::vector<Matrix> to_pixel_sequence(const ImageSet& images, const std::vector<std::size_t>& indices) {
    const std::size_t seq_len = images.height * images.width;
    std::vector<Matrix> seq(seq_len, Matrix(1, indices.size()));
    for (std::size_t j = 0; j < indices.size(); ++j) {
        const double* img = images.pixels.data() + indices[j] * seq_len;
        for (std::size_t t = 0; t < seq_len; ++t)
            seq[t](0, j) = img[t];
    }
    return seq;
}

std::vector<Matrix> to_pixel_sequence(const ImageSet& images) {
    return to_pixel_sequence(images, all_indices(images.count));
}

std::vector<Matrix> to_row_sequence(const ImageSet& images, const std::vector<std::size_t>& indices) {
    std::vector<Matrix> seq(images.height, Matrix(images.width, indices.size()));
    for (std::size_t j = 0; j < indices.size(); ++j) {
        const double* img = images.pixels.data() + indices[j] * images.height * images.width;
        for (std::size_t t = 0; t < images.height; ++t)
            for (std::size_t c = 0; c < images.width; ++c)
                seq[t](c, j) = img[t * images.width + c];
    }
    return seq;
}

std::vector<Matrix> to_row_sequence(const ImageSet& images) {
    return to_row_sequence(images, all_indices(images.count));
}

std::vector<std::uint32_t> pad_truncate(const std::vector<std::uint32_t>& seq, std::size_t maxlen) {
    if (maxlen == 0)
        throw std::invalid_argument("pad_truncate: maxlen must be >= 1");
    std::vector<std::uint32_t> out;
    out.reserve(maxlen);
    if (seq.size() > maxlen) {
        out.assign(seq.end() - static_cast<std::ptrdiff_t>(maxlen), seq.end());
    } else {
        out = seq;
        out.resize(maxlen, 0);
    }
    return out;
}

TokenSet load_tokens(const std::string& path, std::size_t vocab_size) {
    if (vocab_size < 2)
        throw std::invalid_argument("load_tokens: vocab_size must be >= 2");
    std::ifstream in(path);
    if (!in)
        throw ParseError(path + ": cannot open");
    TokenSet set;
    set.vocab_size = vocab_size;
    const std::uint32_t oov = static_cast<std::uint32_t>(vocab_size - 1);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::size_t tab = line.find('\t');
        if (tab == std::string::npos)
            throw ParseError(path + ": line " + std::to_string(line_no) + ": missing tab separator");
        int label = 0;
        try {
            std::size_t used = 0;
            label = std::stoi(line.substr(0, tab), &used);
            if (used != tab) throw std::invalid_argument("");
        } catch (const std::exception&) {
            throw ParseError(path + ": line " + std::to_string(line_no) + ": bad label '" +
                             line.substr(0, tab) + "'");
        }
        std::vector<std::uint32_t> ids;
        std::istringstream rest(line.substr(tab + 1));
        std::string tok;
        while (rest >> tok) {
            unsigned long v = 0;
            try {
                std::size_t used = 0;
                v = std::stoul(tok, &used);
                if (used != tok.size()) throw std::invalid_argument("");
            } catch (const std::exception&) {
                throw ParseError(path + ": line " + std::to_string(line_no) + ": bad token id '" + tok + "'");
            }
            ids.push_back(v >= vocab_size ? oov : static_cast<std::uint32_t>(v));
        }
        set.labels.push_back(label);
        set.sequences.push_back(std::move(ids));
    }
    return set;
}

namespace {

std::vector<std::vector<std::size_t>> batch_index_groups(std::size_t count, std::size_t batch_size,
                                                         Rng& rng, bool shuffle) {
    if (batch_size == 0)
        throw std::invalid_argument("batches: batch_size must be >= 1");
    std::vector<std::size_t> order = shuffle ? rng.permutation(count) : all_indices(count);
    std::vector<std::vector<std::size_t>> groups;
    for (std::size_t start = 0; start < count; start += batch_size) {
        const std::size_t end = std::min(count, start + batch_size);
        groups.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                            order.begin() + static_cast<std::ptrdiff_t>(end));
    }
    return groups;
}

} // namespace

std::vector<SequenceBatch> batches(const ImageSet& set, SeqMode mode, std::size_t batch_size,
                                   Rng& rng, bool shuffle) {
    std::vector<SequenceBatch> out;
    for (const auto& group : batch_index_groups(set.count, batch_size, rng, shuffle)) {
        SequenceBatch b;
        b.dense = mode == SeqMode::Pixel ? to_pixel_sequence(set, group) : to_row_sequence(set, group);
        b.labels.reserve(group.size());
        for (std::size_t idx : group) b.labels.push_back(set.labels[idx]);
        out.push_back(std::move(b));
    }
    return out;
}

std::vector<SequenceBatch> batches(const TokenSet& set, std::size_t maxlen, std::size_t batch_size,
                                   Rng& rng, bool shuffle) {
    std::vector<SequenceBatch> out;
    for (const auto& group : batch_index_groups(set.sequences.size(), batch_size, rng, shuffle)) {
        SequenceBatch b;
        b.tokens.reserve(group.size());
        b.labels.reserve(group.size());
        for (std::size_t idx : group) {
            b.tokens.push_back(pad_truncate(set.sequences[idx], maxlen));
            b.labels.push_back(set.labels[idx]);
        }
        out.push_back(std::move(b));
    }
    return out;
}

ImageSet subset(const ImageSet& set, std::size_t limit, Rng& rng) {
    if (limit == 0 || limit >= set.count) return set;
    std::vector<std::size_t> order = rng.permutation(set.count);
    ImageSet out;
    out.count = limit;
    out.height = set.height;
    out.width = set.width;
    const std::size_t stride = set.height * set.width;
    out.pixels.resize(limit * stride);
    out.labels.resize(limit);
    for (std::size_t i = 0; i < limit; ++i) {
        const std::size_t src = order[i];
        std::memcpy(out.pixels.data() + i * stride, set.pixels.data() + src * stride, stride * sizeof(double));
        out.labels[i] = set.labels[src];
    }
    return out;
}

TokenSet subset(const TokenSet& set, std::size_t limit, Rng& rng) {
    if (limit == 0 || limit >= set.sequences.size()) return set;
    std::vector<std::size_t> order = rng.permutation(set.sequences.size());
    TokenSet out;
    out.vocab_size = set.vocab_size;
    out.sequences.reserve(limit);
    out.labels.reserve(limit);
    for (std::size_t i = 0; i < limit; ++i) {
        out.sequences.push_back(set.sequences[order[i]]);
        out.labels.push_back(set.labels[order[i]]);
    }
    return out;
}

} // namespace gatecell
