#pragma once

#include <cstdint>
#include <string>

namespace gatecell {

// Miniature synthetic datasets for tests and examples. Images are 28x28 with a
// class-keyed bright column band plus seeded jitter, so a small network can
// learn them in a few epochs. The token task is parity-of-marker-token: the
// label is the parity of the marker-id count among the last `window` tokens
// (matching training with maxlen = window under the truncate-front rule).
struct FixtureSpec {
    std::size_t train_images = 64;
    std::size_t test_images = 16;
    std::size_t classes = 10;
    std::size_t token_train = 512;
    std::size_t token_test = 128;
    std::size_t vocab = 16;
    std::uint32_t marker = 7;
    std::size_t window = 12;
    std::uint64_t seed = 7;
};

struct FixturePaths {
    std::string train_images, train_labels, test_images, test_labels;
    std::string tokens_train, tokens_test;
};

// Writes 4 IDX files plus two token files into out_dir; byte-idempotent for a
// fixed spec.
FixturePaths write_fixtures(const std::string& out_dir, const FixtureSpec& spec = {});

} // namespace gatecell
