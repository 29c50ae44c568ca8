#include "gatecell/fixtures.hpp"

#include <filesystem>
#include <fstream>

#include "gatecell/data.hpp"
#include "gatecell/harness.hpp"

namespace gatecell {

namespace {

void make_images(std::size_t count, std::size_t classes, Rng& rng,
                 std::vector<std::uint8_t>& pixels, std::vector<std::uint8_t>& labels) {
    constexpr std::size_t kSide = 28;
    pixels.resize(count * kSide * kSide);
    labels.resize(count);
    for (std::size_t img = 0; img < count; ++img) {
        const std::size_t label = img % classes;
        labels[img] = static_cast<std::uint8_t>(label);
        // bright band over columns [2k+2, 2k+8), dim elsewhere, plus jitter
        const std::size_t band_lo = 2 * label + 2, band_hi = band_lo + 6;
        std::uint8_t* base = pixels.data() + img * kSide * kSide;
        for (std::size_t r = 0; r < kSide; ++r)
            for (std::size_t c = 0; c < kSide; ++c) {
                const int bright = (c >= band_lo && c < band_hi) ? 220 : 24;
                const int jitter = static_cast<int>(rng.below(31)) - 15;
                int v = bright + jitter;
                if (v < 0) v = 0;
                if (v > 255) v = 255;
                base[r * kSide + c] = static_cast<std::uint8_t>(v);
            }
    }
}

void write_blob(const std::string& path, const std::vector<unsigned char>& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError(path + ": cannot open for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw ParseError(path + ": write failed");
}

void write_token_file(const std::string& path, std::size_t count, const FixtureSpec& spec, Rng& rng) {
    std::ofstream out(path);
    if (!out) throw ParseError(path + ": cannot open for writing");
    for (std::size_t i = 0; i < count; ++i) {
        // lengths in [4, window + 4] so some sequences exercise truncation
        const std::size_t len = 4 + rng.below(spec.window + 1);
        std::vector<std::uint32_t> seq(len);
        for (std::uint32_t& id : seq) {
            if (rng.uniform() < 0.3) {
                id = spec.marker;
            } else {
                // non-marker, non-pad id
                std::uint32_t v = 1 + static_cast<std::uint32_t>(rng.below(spec.vocab - 2));
                if (v >= spec.marker) ++v;
                id = v;
            }
        }
        // label = parity of markers in the window the trainer will see
        const std::size_t start = len > spec.window ? len - spec.window : 0;
        std::size_t markers = 0;
        for (std::size_t t = start; t < len; ++t)
            if (seq[t] == spec.marker) ++markers;
        out << (markers % 2);
        out << '\t';
        for (std::size_t t = 0; t < len; ++t) {
            if (t) out << ' ';
            out << seq[t];
        }
        out << '\n';
    }
}

} // namespace

FixturePaths write_fixtures(const std::string& out_dir, const FixtureSpec& spec) {
    std::filesystem::create_directories(out_dir);
    Rng root = Rng(spec.seed).substream(streams::kFixtures);

    FixturePaths paths;
    paths.train_images = out_dir + "/train-images-idx3-ubyte";
    paths.train_labels = out_dir + "/train-labels-idx1-ubyte";
    paths.test_images = out_dir + "/test-images-idx3-ubyte";
    paths.test_labels = out_dir + "/test-labels-idx1-ubyte";
    paths.tokens_train = out_dir + "/tokens-train.txt";
    paths.tokens_test = out_dir + "/tokens-test.txt";

    std::vector<std::uint8_t> pixels, labels;
    Rng img_rng = root.substream(1);
    make_images(spec.train_images, spec.classes, img_rng, pixels, labels);
    write_blob(paths.train_images, serialize_idx_images(28, 28, pixels));
    write_blob(paths.train_labels, serialize_idx_labels(labels));

    Rng test_rng = root.substream(2);
    make_images(spec.test_images, spec.classes, test_rng, pixels, labels);
    write_blob(paths.test_images, serialize_idx_images(28, 28, pixels));
    write_blob(paths.test_labels, serialize_idx_labels(labels));

    Rng tok_train_rng = root.substream(3);
    write_token_file(paths.tokens_train, spec.token_train, spec, tok_train_rng);
    Rng tok_test_rng = root.substream(4);
    write_token_file(paths.tokens_test, spec.token_test, spec, tok_test_rng);
    return paths;
}

} // namespace gatecell
