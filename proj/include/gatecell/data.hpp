#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gatecell/linalg.hpp"

namespace gatecell {

struct ImageSet {
    std::size_t count = 0, height = 0, width = 0;
    std::vector<double> pixels;       // count * height * width, row-major per image
    std::vector<std::uint8_t> labels; // empty until paired with a label file
};

// parse_idx accepts either payload: magic 0x00000803 (images, 3 dims) or
// 0x00000801 (labels, 1 dim); exactly one member is set.
struct IdxContent {
    std::optional<ImageSet> images;
    std::optional<std::vector<std::uint8_t>> labels;
};

// Big-endian IDX container. Pixel bytes map to [0,1] via /255. Errors carry
// the offending byte offset.
IdxContent parse_idx(const std::vector<unsigned char>& bytes);

// Fixture-side serializers; parse_idx(serialize_idx(...)) round-trips.
std::vector<unsigned char> serialize_idx_images(std::size_t height, std::size_t width,
                                                const std::vector<std::uint8_t>& pixels);
std::vector<unsigned char> serialize_idx_labels(const std::vector<std::uint8_t>& labels);

// Whole-file read; gzip-compressed files (magic 1f 8b) are inflated
// transparently so the canonical .gz distribution can be used as-is.
std::vector<unsigned char> read_file_bytes(const std::string& path);

ImageSet load_image_set(const std::string& images_path, const std::string& labels_path);

struct PixelStats {
    double mean = 0.0;
    double stddev = 1.0;
};

// One global scalar mean/std over all train pixels; both sets transformed with
// the train statistics. std floored at 1e-8 so constant data maps to zeros.
PixelStats standardize(ImageSet& train, ImageSet& test);

// Sequence shaping. Pixel-wise: T = H*W scalar steps, scanned row by row from
// the top-left corner. Row-wise: T = H steps of width-W vectors.
// The result is timestep-major: T matrices of m x N (column per image).
std::vector<Matrix> to_pixel_sequence(const ImageSet& images);
std::vector<Matrix> to_pixel_sequence(const ImageSet& images, const std::vector<std::size_t>& indices);
std::vector<Matrix> to_row_sequence(const ImageSet& images);
std::vector<Matrix> to_row_sequence(const ImageSet& images, const std::vector<std::size_t>& indices);

struct TokenSet {
    std::vector<std::vector<std::uint32_t>> sequences;
    std::vector<int> labels; // {0, 1}
    std::size_t vocab_size = 0;
};

// Shorter sequences are zero-padded at the end; longer ones keep the LAST
// maxlen tokens (documented truncate-front rule).
std::vector<std::uint32_t> pad_truncate(const std::vector<std::uint32_t>& seq, std::size_t maxlen);

// Text format: one example per line, `label<TAB>id id id ...`. Ids at or above
// vocab_size clip to the reserved OOV id vocab_size-1.
TokenSet load_tokens(const std::string& path, std::size_t vocab_size);

struct SequenceBatch {
    std::vector<Matrix> dense;                       // T matrices of m x B, or empty
    std::vector<std::vector<std::uint32_t>> tokens;  // B rows of T ids, or empty
    std::vector<int> labels;                          // B

    std::size_t batch_size() const { return labels.size(); }
    std::size_t seq_len() const { return dense.empty() ? (tokens.empty() ? 0 : tokens.front().size()) : dense.size(); }
};

enum class SeqMode { Pixel, Row };

// One epoch of batches. Shuffling draws a fresh permutation from rng; the last
// short batch is emitted as-is. Every example appears exactly once.
std::vector<SequenceBatch> batches(const ImageSet& set, SeqMode mode, std::size_t batch_size,
                                   Rng& rng, bool shuffle);
std::vector<SequenceBatch> batches(const TokenSet& set, std::size_t maxlen, std::size_t batch_size,
                                   Rng& rng, bool shuffle);

// First `limit` entries of a seeded permutation (limit = 0 keeps everything).
ImageSet subset(const ImageSet& set, std::size_t limit, Rng& rng);
TokenSet subset(const TokenSet& set, std::size_t limit, Rng& rng);

} // namespace gatecell
